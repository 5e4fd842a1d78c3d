"""Single-source shortest-path engines.

All engines return the same result shape so callers can swap them by
configuration and tests can diff them against each other:

  * bellman_ford: exact, any integer weights, verified negative-cycle
    witness; synchronous relaxation rounds (vectorized over the edge list).
  * bellman_ford_bounded: distances of shortest walks using at most
    max_rounds edges; no cycle detection.
  * dijkstra: nonnegative weights only.
  * scaling_sssp: bit-scaling over ceil-scaled weights with a potential
    function keeping reduced costs >= -1 per phase; each phase repairs with
    one Bellman-Ford round over the negative-reduced-cost arcs followed by
    a Dijkstra pass, and the final answer is a Dijkstra run on reduced
    costs.  Exactness is the contract; phase counts are reported, not
    asserted.

A successful run never leaves a tense edge (dist[v] > dist[u] + w).
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeCycleError, NegativeEdgeError, UnreachableError
from .graph import INF, DiGraph


@dataclass
class EngineStats:
    relaxations: int = 0
    rounds: int = 0
    phases: int = 0
    pops: int = 0


@dataclass
class SSSPResult:
    source: int
    dist: np.ndarray                 # int64 with INF sentinel
    pred: list                       # per vertex: (prev_vertex, edge_id) | None
    stats: EngineStats = field(default_factory=EngineStats)

    def reachable(self, v: int) -> bool:
        return int(self.dist[v]) < INF

    def path_to(self, v: int) -> list:
        """Edge ids of a shortest source->v path (walks the pred chain)."""
        if not self.reachable(v):
            raise UnreachableError(f"vertex {v} is unreachable")
        edges = []
        cur = v
        guard = 0
        while cur != self.source:
            step = self.pred[cur]
            if step is None:
                raise UnreachableError(f"broken predecessor chain at {cur}")
            pv, pe = step
            edges.append(pe)
            cur = pv
            guard += 1
            if guard > len(self.pred):
                raise UnreachableError("predecessor walk did not terminate")
        edges.reverse()
        return edges


def first_tense_edge(g: DiGraph, dist: np.ndarray):
    """Index of an edge with dist[head] > dist[tail] + w, or None."""
    if g.m == 0:
        return None
    dt = dist[g.tails]
    cand = dt + g.weights
    np.copyto(cand, INF, where=dt >= INF)
    bad = np.flatnonzero(dist[g.heads] > cand)
    return int(bad[0]) if len(bad) else None


# ---------------------------------------------------------------------------
# cycle utilities


def simplify_negative_walk(g: DiGraph, walk_edges: list):
    """Extract a simple negative cycle from a closed walk of negative total.

    Splits the walk at a repeated vertex and recurses into a negative half
    (one always exists); returns (vertices, edges, weight).
    """
    edges = list(walk_edges)
    while True:
        verts = [int(g.tails[edges[0]])]
        for e in edges:
            verts.append(int(g.heads[e]))
        assert verts[0] == verts[-1], "walk is not closed"
        seen = {}
        split = None
        for i, v in enumerate(verts[:-1]):
            if v in seen:
                split = (seen[v], i)
                break
            seen[v] = i
        if split is None:
            weight = sum(int(g.weights[e]) for e in edges)
            assert weight < 0, "walk simplification lost negativity"
            return verts[:-1], edges, weight
        i, j = split
        inner = edges[i:j]
        outer = edges[:i] + edges[j:]
        w_inner = sum(int(g.weights[e]) for e in inner)
        edges = inner if w_inner < 0 else outer


def _extract_pred_cycle(g, pred_v, pred_e, start):
    """Follow predecessor pointers from `start` until a vertex repeats;
    returns the (vertices, edges, weight) of the verified negative cycle,
    or None if the chain dead-ends first."""
    seq = [start]
    eseq = []
    seen = {start: 0}
    cur = start
    for _ in range(g.n + 2):
        nxt = int(pred_v[cur])
        if nxt < 0:
            return None
        eseq.append(int(pred_e[cur]))
        cur = nxt
        if cur in seen:
            idx = seen[cur]
            cyc_edges = list(reversed(eseq[idx:]))
            weight = sum(int(g.weights[e]) for e in cyc_edges)
            if weight >= 0:
                return None
            verts = [int(g.tails[cyc_edges[0]])]
            for e in cyc_edges[:-1]:
                verts.append(int(g.heads[e]))
            return verts, cyc_edges, weight
        seq.append(cur)
        seen[cur] = len(seq) - 1
    return None


# ---------------------------------------------------------------------------
# Bellman-Ford (vectorized synchronous rounds)


class _RoundRelaxer:
    """Grouped-by-head edge arrays for one synchronous relaxation round."""

    def __init__(self, g: DiGraph):
        self.g = g
        order = np.lexsort((np.arange(g.m), g.heads))
        self.order = order
        self.t_s = g.tails[order]
        self.w_s = g.weights[order]
        h_s = g.heads[order]
        self.starts = np.flatnonzero(np.diff(h_s, prepend=-1))
        self.group_heads = h_s[self.starts]

    def round(self, dist, pred_v, pred_e):
        """One synchronous round; returns the array of improved vertices."""
        g = self.g
        dt = dist[self.t_s]
        cand = dt + self.w_s
        np.copyto(cand, INF, where=dt >= INF)
        mins = np.minimum.reduceat(cand, self.starts)
        improved = mins < dist[self.group_heads]
        if not improved.any():
            return np.empty(0, np.int64)
        sizes = np.diff(self.starts, append=len(cand))
        rep = np.repeat(mins, sizes)
        pos = np.where(cand == rep, self.order, g.m + 1)
        best_e = np.minimum.reduceat(pos, self.starts)
        heads = self.group_heads[improved]
        dist[heads] = mins[improved]
        eids = best_e[improved]
        pred_v[heads] = g.tails[eids]
        pred_e[heads] = eids
        return heads


def _empty_result(g, s):
    dist = np.full(g.n, INF, dtype=np.int64)
    dist[s] = 0
    return dist, np.full(g.n, -1, np.int64), np.full(g.n, -1, np.int64)


def _result(s, dist, pred_v, pred_e, stats):
    pred = [None if pred_v[v] < 0 else (int(pred_v[v]), int(pred_e[v]))
            for v in range(len(dist))]
    return SSSPResult(source=s, dist=dist, pred=pred, stats=stats)


def bellman_ford(g: DiGraph, s: int) -> SSSPResult:
    """Exact distances, or NegativeCycle with a verified witness."""
    if not (0 <= s < g.n):
        raise ValueError("source out of range")
    dist, pred_v, pred_e = _empty_result(g, s)
    stats = EngineStats()
    if g.m == 0:
        return _result(s, dist, pred_v, pred_e, stats)
    rr = _RoundRelaxer(g)
    for rnd in range(1, g.n + 1):
        improved = rr.round(dist, pred_v, pred_e)
        stats.rounds = rnd
        stats.relaxations += g.m
        if len(improved) == 0:
            return _result(s, dist, pred_v, pred_e, stats)
    # still improving after n rounds: some pred chain closes a cycle
    for v in improved.tolist():
        found = _extract_pred_cycle(g, pred_v, pred_e, int(v))
        if found:
            verts, edges, weight = found
            raise NegativeCycleError(
                f"negative cycle of weight {weight}", vertices=verts,
                edges=edges, weight=weight)
    raise AssertionError("negative cycle detected but not extractable")


def bellman_ford_bounded(g: DiGraph, s: int, max_rounds: int) -> SSSPResult:
    """dist[v] = length of the shortest walk from s using <= max_rounds
    edges.  No cycle detection; never runs more than max_rounds rounds."""
    if not (0 <= s < g.n):
        raise ValueError("source out of range")
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    dist, pred_v, pred_e = _empty_result(g, s)
    stats = EngineStats()
    if g.m == 0 or max_rounds == 0:
        return _result(s, dist, pred_v, pred_e, stats)
    rr = _RoundRelaxer(g)
    for rnd in range(1, max_rounds + 1):
        improved = rr.round(dist, pred_v, pred_e)
        stats.rounds = rnd
        stats.relaxations += g.m
        if len(improved) == 0:
            break
    return _result(s, dist, pred_v, pred_e, stats)


# ---------------------------------------------------------------------------
# Dijkstra


def _adjacency(g: DiGraph, weights=None):
    w = g.weights if weights is None else weights
    adj = [[] for _ in range(g.n)]
    for i in range(g.m):
        adj[int(g.tails[i])].append((int(g.heads[i]), int(w[i]), i))
    return adj


def _dijkstra_core(n, adj, dist, pred_v, pred_e, seeds, stats):
    """Multi-source Dijkstra continuing from existing labels."""
    heap = [(int(dist[v]), int(v)) for v in seeds]
    heapq.heapify(heap)
    push = heapq.heappush
    pop = heapq.heappop
    while heap:
        d, u = pop(heap)
        if d != dist[u]:
            continue
        stats.pops += 1
        for v, w, eid in adj[u]:
            nd = d + w
            stats.relaxations += 1
            if nd < dist[v]:
                dist[v] = nd
                pred_v[v] = u
                pred_e[v] = eid
                push(heap, (nd, v))


def dijkstra(g: DiGraph, s: int) -> SSSPResult:
    """Nonnegative weights only; raises NegativeEdge otherwise."""
    if not (0 <= s < g.n):
        raise ValueError("source out of range")
    if g.m:
        neg = np.flatnonzero(g.weights < 0)
        if len(neg):
            raise NegativeEdgeError(
                f"negative edge {int(neg[0])} rejected", edge_id=int(neg[0]))
    dist, pred_v, pred_e = _empty_result(g, s)
    stats = EngineStats()
    _dijkstra_core(g.n, _adjacency(g), dist, pred_v, pred_e, [s], stats)
    return _result(s, dist, pred_v, pred_e, stats)


# ---------------------------------------------------------------------------
# scaling engine


def _negative_cycle_via_bellman_ford(g: DiGraph):
    """Guaranteed witness extraction: super-source Bellman-Ford over the
    original weights.  Original edge ids are preserved (virtual arcs are
    appended after them and can never lie on a cycle)."""
    n = g.n
    tails = np.concatenate([g.tails, np.full(n, n, np.int64)])
    heads = np.concatenate([g.heads, np.arange(n, dtype=np.int64)])
    weights = np.concatenate([g.weights, np.zeros(n, np.int64)])
    aug = DiGraph(n + 1, tails, heads, weights)
    bellman_ford(aug, n)  # raises NegativeCycleError with original edge ids
    raise AssertionError("scaling engine detected a cycle Bellman-Ford denies")


def _repair_phase(g, rc, stats):
    """Exact distances from a virtual source wired to every vertex with
    weight 0, under reduced costs rc.  Detects negative cycles."""
    n = g.n
    dist = np.zeros(n, dtype=np.int64)
    pred_v = np.full(n, -1, np.int64)
    pred_e = np.full(n, -1, np.int64)
    neg = np.flatnonzero(rc < 0)
    if len(neg) == 0:
        return dist
    order = neg[np.lexsort((neg, g.heads[neg]))]
    t_neg = g.tails[order]
    w_neg = rc[order]
    h_neg = g.heads[order]
    starts = np.flatnonzero(np.diff(h_neg, prepend=-1))
    group_heads = h_neg[starts]
    nonneg_adj = [[] for _ in range(n)]
    for i in np.flatnonzero(rc >= 0).tolist():
        nonneg_adj[int(g.tails[i])].append((int(g.heads[i]), int(rc[i]), i))
    for iteration in range(n + 1):
        dt = dist[t_neg]
        cand = dt + w_neg
        np.copyto(cand, INF, where=dt >= INF)
        mins = np.minimum.reduceat(cand, starts)
        improved_mask = mins < dist[group_heads]
        stats.relaxations += len(order)
        if not improved_mask.any():
            return dist
        sizes = np.diff(starts, append=len(cand))
        rep = np.repeat(mins, sizes)
        pos = np.where(cand == rep, order, g.m + 1)
        best_e = np.minimum.reduceat(pos, starts)
        heads = group_heads[improved_mask]
        dist[heads] = mins[improved_mask]
        pred_v[heads] = g.tails[best_e[improved_mask]]
        pred_e[heads] = best_e[improved_mask]
        _dijkstra_core(n, nonneg_adj, dist, pred_v, pred_e, heads.tolist(),
                       stats)
    # too many repair iterations: a genuine negative cycle exists
    _negative_cycle_via_bellman_ford(g)


def scaling_sssp(g: DiGraph, s: int) -> SSSPResult:
    """Exact SSSP for integer weights via bit scaling.

    ceil-scaled weights keep every intermediate level free of spurious
    negative cycles, so failures always certify a cycle of the input.
    Nonnegative inputs short-circuit to a single Dijkstra phase.
    """
    if not (0 <= s < g.n):
        raise ValueError("source out of range")
    k = g.neg_magnitude
    if k == 0:
        res = dijkstra(g, s)
        res.stats.phases = 1
        return res
    stats = EngineStats()
    n = g.n
    bits = k.bit_length()  # == ceil(log2(K + 1))
    pot = np.zeros(n, dtype=np.int64)
    for level in range(bits - 1, -1, -1):
        pot *= 2
        w_level = -((-g.weights) >> level)  # ceil(w / 2^level)
        rc = w_level + pot[g.tails] - pot[g.heads]
        if int(rc.min()) < -1:
            raise AssertionError("scaling invariant violated: rc < -1")
        pot += _repair_phase(g, rc, stats)
        stats.phases += 1
    rc = g.weights + pot[g.tails] - pot[g.heads]
    dist, pred_v, pred_e = _empty_result(g, s)
    adj = _adjacency(g, weights=rc)
    _dijkstra_core(n, adj, dist, pred_v, pred_e, [s], stats)
    finite = dist < INF
    dist[finite] += pot[finite] - pot[s]
    return _result(s, dist, pred_v, pred_e, stats)
