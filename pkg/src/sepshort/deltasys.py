"""All-pairs merge over a delta system of pieces.

A delta system is a family of vertex sets whose pairwise intersections all
equal a common core T.  Given exact APSP matrices for the pieces, the
merge computes the exact APSP matrix of the union graph (the graph whose
edges are, per piece, all pairs weighted by that piece's distances) in
four phases:

  1. core clique: arc (u, v) = min over pieces of the piece distance,
     then a cubic APSP (Floyd-Warshall) over the core;
  2. core -> outside: D(u, v) = min_z core_dist(u, z) + piece(z, v);
  3. outside -> core, symmetrically;
  4. outside -> outside via the core, also minimized against the direct
     piece distance when both endpoints share a piece.

Inner-loop work is counted exactly (the number of candidate triples a
scalar implementation would examine) and exposed through MergeOps.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDeltaError, NegativeCycleError
from .graph import INF, DiGraph

_CHUNK = 16  # row blocks for the min-plus products


@dataclass
class MergeOps:
    """Exact inner-loop counts per merge phase."""

    build_core: int = 0
    core_apsp: int = 0
    cross: int = 0
    final: int = 0

    @property
    def inner_ops(self) -> int:
        return self.build_core + self.core_apsp + self.cross + self.final

    def accounting_bound(self, n: int, t: int, c: float = 8.0) -> float:
        return c * (n * n * t + n * t * t + t ** 3)


class DistMatrix:
    """Square APSP solution over an ordered vertex list.

    `dist` is int64 with the INF sentinel; `pred[u, v]` is the local index
    of the previous vertex on a shortest u->v path (-1 when none);
    `arc_piece[u, v]` tags the piece providing the final arc of that path
    (-1 for matrices taken directly from a graph).
    """

    __slots__ = ("verts", "dist", "pred", "arc_piece")

    def __init__(self, verts, dist, pred=None, arc_piece=None):
        self.verts = np.ascontiguousarray(verts, dtype=np.int64)
        self.dist = np.ascontiguousarray(dist, dtype=np.int64)
        k = len(self.verts)
        if self.dist.shape != (k, k):
            raise ValueError("dist must be square over verts")
        self.pred = None if pred is None else \
            np.ascontiguousarray(pred, dtype=np.int32)
        self.arc_piece = None if arc_piece is None else \
            np.ascontiguousarray(arc_piece, dtype=np.int16)

    @property
    def n(self) -> int:
        return len(self.verts)

    def positions(self, wanted) -> np.ndarray:
        """Local indices of the given global ids (must all be present)."""
        wanted = np.asarray(wanted, dtype=np.int64)
        order = np.argsort(self.verts, kind="stable")
        pos = order[np.searchsorted(self.verts[order], wanted)]
        if not np.array_equal(self.verts[pos], wanted):
            raise KeyError("vertex not present in matrix")
        return pos

    def restrict(self, sub_verts) -> "DistMatrix":
        """Distance-only restriction to a vertex subset (order = given)."""
        pos = self.positions(sub_verts)
        return DistMatrix(np.asarray(sub_verts, dtype=np.int64),
                          self.dist[np.ix_(pos, pos)])

    def entry(self, u: int, v: int) -> int:
        pu = int(self.positions([u])[0])
        pv = int(self.positions([v])[0])
        return int(self.dist[pu, pv])

    def validate(self):
        """Check diag, triangle inequality, and pred-walk consistency."""
        failures = []
        n = self.n
        d = self.dist
        if n and not (np.diag(d) == 0).all():
            failures.append("diagonal is not identically zero")
        for z in range(n):
            cand = d[:, z:z + 1] + d[z:z + 1, :]
            np.copyto(cand, INF, where=(d[:, z:z + 1] >= INF)
                      | (d[z:z + 1, :] >= INF))
            if (d > cand).any():
                u, v = np.argwhere(d > cand)[0]
                failures.append(f"triangle violated at ({u}, {z}, {v})")
                break
        if self.pred is not None and not failures:
            for u in range(n):
                for v in range(n):
                    if u == v or d[u, v] >= INF:
                        continue
                    cur, steps = v, 0
                    ok = True
                    while cur != u:
                        p = int(self.pred[u, cur])
                        if p < 0 or steps > n or \
                                d[u, cur] != d[u, p] + d[p, cur]:
                            ok = False
                            break
                        cur, steps = p, steps + 1
                    if not ok:
                        failures.append(f"pred walk broken for ({u}, {v})")
                        return failures
        return failures

    def to_tsv(self) -> str:
        """Debug dump; INF prints as 'inf'."""
        rows = ["\t".join(str(v) for v in self.verts.tolist())]
        for i in range(self.n):
            rows.append("\t".join(
                "inf" if x >= INF else str(int(x))
                for x in self.dist[i].tolist()))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class DeltaSystem:
    """Pieces (each with its APSP matrix) sharing the common core."""

    pieces: tuple
    core: np.ndarray

    def __init__(self, pieces, core):
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "core",
                           np.sort(np.asarray(core, dtype=np.int64)))


@dataclass
class DeltaReport:
    ok: bool
    failures: list = field(default_factory=list)


def validate_delta(ds: DeltaSystem, check_matrices: bool = True) -> DeltaReport:
    """Pairwise-intersection check against the core, plus per-piece
    DistMatrix invariants (skippable; they cost O(n^3) per piece)."""
    failures = []
    core = set(ds.core.tolist())
    sets = [set(p.verts.tolist()) for p in ds.pieces]
    for i, s in enumerate(sets):
        if not core <= s:
            failures.append(f"core not contained in piece {i}")
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if sets[i] & sets[j] != core:
                failures.append(
                    f"pieces {i} and {j} intersect outside the core")
    if check_matrices:
        for i, p in enumerate(ds.pieces):
            for f in p.validate():
                failures.append(f"piece {i}: {f}")
    return DeltaReport(ok=not failures, failures=failures)


def merge_vertex_order(ds: DeltaSystem) -> np.ndarray:
    """Vertex layout used by merge_apsp and union_graph: core first, then
    each piece's non-core vertices, sorted within each block."""
    blocks = [ds.core]
    core = set(ds.core.tolist())
    for p in ds.pieces:
        w = np.array(sorted(set(p.verts.tolist()) - core), dtype=np.int64)
        blocks.append(w)
    return np.concatenate(blocks) if blocks else np.empty(0, np.int64)


def union_graph(ds: DeltaSystem) -> DiGraph:
    """The explicit graph the merge reasons about: one clique per piece,
    arcs weighted by piece distances, parallel arcs kept.

    Vertices are indexed by merge_vertex_order(ds).
    """
    verts = merge_vertex_order(ds)
    pos = {int(v): i for i, v in enumerate(verts)}
    tails, heads, weights = [], [], []
    for p in ds.pieces:
        k = p.n
        for a in range(k):
            ga = pos[int(p.verts[a])]
            row = p.dist[a]
            for b in range(k):
                if a == b or row[b] >= INF:
                    continue
                tails.append(ga)
                heads.append(pos[int(p.verts[b])])
                weights.append(int(row[b]))
    return DiGraph(len(verts), np.array(tails, np.int64),
                   np.array(heads, np.int64), np.array(weights, np.int64))


def _masked_row_products(left, right):
    """Generator of (row_block, cand) for the min-plus product left @ right.

    left: (p, t), right: (t, q); yields blocks of the (p, t, q) candidate
    tensor so callers can take min/argmin without materializing it all.
    """
    p = left.shape[0]
    for lo in range(0, p, _CHUNK):
        hi = min(lo + _CHUNK, p)
        block = left[lo:hi][:, :, None] + right[None, :, :]
        np.copyto(block, INF, where=(left[lo:hi][:, :, None] >= INF)
                  | (right[None, :, :] >= INF))
        yield lo, hi, block


def _core_floyd_warshall(dt, predt, piecet, ops):
    t = dt.shape[0]
    for z in range(t):
        col = dt[:, z:z + 1]
        row = dt[z:z + 1, :]
        cand = col + row
        np.copyto(cand, INF, where=(col >= INF) | (row >= INF))
        improved = cand < dt
        if improved.any():
            dt[improved] = cand[improved]
            predt[improved] = np.broadcast_to(predt[z:z + 1, :],
                                              predt.shape)[improved]
            piecet[improved] = np.broadcast_to(piecet[z:z + 1, :],
                                               piecet.shape)[improved]
        ops.core_apsp += t * t


def merge_apsp(ds: DeltaSystem, ops: MergeOps | None = None) -> DistMatrix:
    """Exact APSP of the union graph, in core-first layout.

    Ties in the minimizations go to the lowest core index, then the lowest
    piece id; the direct piece arc wins ties in phase 4.  Raises
    NegativeCycle (witness vertex) when any diagonal goes negative, and
    InvalidDelta when the pieces do not form a delta system.
    """
    quick = validate_delta(ds, check_matrices=False)
    if not quick.ok:
        raise InvalidDeltaError("; ".join(quick.failures))
    if ops is None:
        ops = MergeOps()
    verts = merge_vertex_order(ds)
    n = len(verts)
    t = len(ds.core)
    core = set(ds.core.tolist())
    k = len(ds.pieces)

    dist = np.full((n, n), INF, dtype=np.int64)
    pred = np.full((n, n), -1, dtype=np.int32)
    piece_of = np.full((n, n), -1, dtype=np.int16)

    # block offsets: piece i's non-core vertices live at [w_lo[i], w_hi[i])
    w_lo, w_hi = [], []
    cursor = t
    piece_w_verts = []
    for p in ds.pieces:
        wv = np.array(sorted(set(p.verts.tolist()) - core), dtype=np.int64)
        piece_w_verts.append(wv)
        w_lo.append(cursor)
        w_hi.append(cursor + len(wv))
        cursor += len(wv)

    # phase 1: core clique by min over pieces, then cubic APSP
    dt = np.full((t, t), INF, dtype=np.int64)
    piecet = np.full((t, t), -1, dtype=np.int16)
    for i, p in enumerate(ds.pieces):
        post = p.positions(ds.core)
        sub = p.dist[np.ix_(post, post)]
        better = sub < dt
        dt[better] = sub[better]
        piecet[better] = i
        ops.build_core += t * t
    predt = np.where((dt < INF) & ~np.eye(t, dtype=bool),
                     np.arange(t, dtype=np.int32)[:, None], np.int32(-1))
    np.fill_diagonal(dt, 0)
    np.fill_diagonal(piecet, -1)
    _core_floyd_warshall(dt, predt, piecet, ops)
    if t and int(np.diag(dt).min()) < 0:
        u = int(np.argmin(np.diag(dt)))
        raise NegativeCycleError(
            f"negative cycle through core vertex {int(ds.core[u])}",
            vertices=[int(ds.core[u])])
    dist[:t, :t] = dt
    pred[:t, :t] = predt
    piece_of[:t, :t] = piecet

    # phases 2 and 3: core <-> piece remainders
    for i, p in enumerate(ds.pieces):
        wv = piece_w_verts[i]
        if not len(wv) or t == 0:
            continue
        lo, hi = w_lo[i], w_hi[i]
        post = p.positions(ds.core)
        posw = p.positions(wv)
        bi = p.dist[np.ix_(post, posw)]       # core -> remainder, in-piece
        ci = p.dist[np.ix_(posw, post)]       # remainder -> core, in-piece
        for blo, bhi, block in _masked_row_products(dt, bi):
            dist[blo:bhi, lo:hi] = block.min(axis=1)
            zstar = block.argmin(axis=1).astype(np.int32)
            pred[blo:bhi, lo:hi] = zstar
            piece_of[blo:bhi, lo:hi] = i
        ops.cross += t * t * len(wv)
        for blo, bhi, block in _masked_row_products(ci, dt):
            dist[lo + blo:lo + bhi, :t] = block.min(axis=1)
            zstar = block.argmin(axis=1)
            cols = np.broadcast_to(np.arange(t), zstar.shape)
            via_pred = predt[zstar, cols]
            via_piece = piecet[zstar, cols]
            direct = zstar == cols  # path stayed inside the piece
            rows_local = np.arange(blo, bhi, dtype=np.int32)[:, None] + lo
            pred[lo + blo:lo + bhi, :t] = np.where(direct, rows_local,
                                                   via_pred)
            piece_of[lo + blo:lo + bhi, :t] = np.where(direct, i, via_piece)
        ops.cross += t * t * len(wv)

    # phase 4: remainder x remainder via the core, then direct arcs
    q = n - t
    if q:
        left = dist[t:, :t]
        right = dist[:t, t:]
        pred_r = pred[:t, t:]
        piece_r = piece_of[:t, t:]
        if t:
            for blo, bhi, block in _masked_row_products(left, right):
                dist[t + blo:t + bhi, t:] = block.min(axis=1)
                zstar = block.argmin(axis=1)
                cols = np.broadcast_to(np.arange(q), zstar.shape)
                pred[t + blo:t + bhi, t:] = pred_r[zstar, cols]
                piece_of[t + blo:t + bhi, t:] = piece_r[zstar, cols]
            ops.final += q * q * t
        for i, p in enumerate(ds.pieces):
            wv = piece_w_verts[i]
            if not len(wv):
                continue
            lo, hi = w_lo[i], w_hi[i]
            posw = p.positions(wv)
            direct = p.dist[np.ix_(posw, posw)]
            cur = dist[lo:hi, lo:hi]
            better = (direct < cur) | ((direct == cur) & (direct < INF))
            cur[better] = direct[better]
            rows_local = np.broadcast_to(
                np.arange(lo, hi, dtype=np.int32)[:, None], better.shape)
            pred[lo:hi, lo:hi][better] = rows_local[better]
            piece_of[lo:hi, lo:hi][better] = i
            ops.final += len(wv) ** 2
        diag = np.diag(dist[t:, t:])
        if q and int(diag.min()) < 0:
            u = int(np.argmin(diag))
            raise NegativeCycleError(
                f"negative cycle through vertex {int(verts[t + u])}",
                vertices=[int(verts[t + u])])
        idx = np.arange(t, n)
        dist[idx, idx] = 0
        pred[idx, idx] = -1
        piece_of[idx, idx] = -1

    unreachable = dist >= INF
    pred[unreachable] = -1
    piece_of[unreachable] = -1
    return DistMatrix(verts, dist, pred, piece_of)


# ---------------------------------------------------------------------------
# production Floyd-Warshall over explicit graphs


def min_arc_matrices(g: DiGraph):
    """(weight, edge_id) matrices of the cheapest arc per ordered pair.

    Parallel arcs collapse to the minimum weight; ties keep the lowest
    edge id.  Self-loops are skipped (only a negative one matters and it
    would surface as a negative cycle).
    """
    n = g.n
    wmat = np.full((n, n), INF, dtype=np.int64)
    emat = np.full((n, n), -1, dtype=np.int64)
    if g.m:
        order = np.lexsort((np.arange(g.m), g.weights, g.heads, g.tails))
        t = g.tails[order]
        h = g.heads[order]
        first = np.flatnonzero(np.diff(t * n + h, prepend=-1))
        keep = order[first]
        mask = g.tails[keep] != g.heads[keep]
        keep = keep[mask]
        wmat[g.tails[keep], g.heads[keep]] = g.weights[keep]
        emat[g.tails[keep], g.heads[keep]] = keep
    return wmat, emat


def floyd_warshall(g: DiGraph) -> DistMatrix:
    """Exact APSP with predecessors; raises NegativeCycle on a bad diag."""
    n = g.n
    wmat, _ = min_arc_matrices(g)
    dist = wmat.copy()
    pred = np.where((dist < INF) & ~np.eye(n, dtype=bool),
                    np.arange(n, dtype=np.int32)[:, None], np.int32(-1))
    np.fill_diagonal(dist, 0)
    if g.m:
        loops = (g.tails == g.heads) & (g.weights < 0)
        if loops.any():
            v = int(g.tails[loops][0])
            raise NegativeCycleError(f"negative self-loop at {v}",
                                     vertices=[v])
    for z in range(n):
        col = dist[:, z:z + 1]
        row = dist[z:z + 1, :]
        cand = col + row
        np.copyto(cand, INF, where=(col >= INF) | (row >= INF))
        improved = cand < dist
        if improved.any():
            dist[improved] = cand[improved]
            pred[improved] = np.broadcast_to(pred[z:z + 1, :],
                                             pred.shape)[improved]
    if n and int(np.diag(dist).min()) < 0:
        v = int(np.argmin(np.diag(dist)))
        raise NegativeCycleError(f"negative cycle through vertex {v}",
                                 vertices=[v])
    return DistMatrix(np.arange(n, dtype=np.int64), dist, pred)
