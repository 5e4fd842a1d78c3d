"""Shared brute-force oracles and corpus helpers.

Everything here is deliberately naive pure Python: these are the
independent references the library is checked against, so they must not
share code with the implementation under test.
"""

import itertools
import math
import random

import numpy as np
import pytest

from sepshort.graph import DiGraph


# ---------------------------------------------------------------------------
# oracles


def brute_floyd_warshall(n, edges):
    """Plain O(n^3) APSP over (u, v, w) triples; math.inf for unreachable."""
    dist = [[math.inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0
    for u, v, w in edges:
        if u == v:
            if w < 0:
                dist[u][u] = min(dist[u][u], w)
            continue
        if w < dist[u][v]:
            dist[u][v] = w
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == math.inf:
                continue
            di = dist[i]
            for j in range(n):
                c = dik + dk[j]
                if c < di[j]:
                    di[j] = c
    return dist


def brute_has_negative_cycle(n, edges):
    dist = brute_floyd_warshall(n, edges)
    return any(dist[i][i] < 0 for i in range(n))


def brute_bellman_ford(n, edges, source):
    """Textbook edge-list Bellman-Ford; returns (dist, cycle_found)."""
    dist = [math.inf] * n
    dist[source] = 0
    for _ in range(n - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] != math.inf and dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    for u, v, w in edges:
        if dist[u] != math.inf and dist[u] + w < dist[v]:
            return dist, True
    return dist, False


def brute_min_balanced_separation(g: DiGraph, weights, alpha):
    """Exhaustive scan of all 3-colorings (A-only, B-only, separator).

    Returns (best_size, best_assignment) where best_assignment maps each
    vertex to 'a', 'b' or 's'; None when no legal separation meets the
    balance bound (cannot happen: separator = V always does).
    """
    n = g.n
    und = set()
    for u, v, _ in zip(g.tails, g.heads, g.weights):
        if u != v:
            und.add((min(int(u), int(v)), max(int(u), int(v))))
    total = sum(weights)
    best = None
    best_assign = None
    for colors in itertools.product("abs", repeat=n):
        ok = True
        for u, v in und:
            cu, cv = colors[u], colors[v]
            if (cu == "a" and cv == "b") or (cu == "b" and cv == "a"):
                ok = False
                break
        if not ok:
            continue
        wa = sum(weights[i] for i in range(n) if colors[i] == "a")
        wb = sum(weights[i] for i in range(n) if colors[i] == "b")
        if wa > alpha * total + 1e-9 or wb > alpha * total + 1e-9:
            continue
        size = colors.count("s")
        if best is None or size < best:
            best = size
            best_assign = colors
    return best, best_assign


def path_weight(g: DiGraph, edge_ids):
    return sum(int(g.weights[e]) for e in edge_ids)


def assert_valid_path(g: DiGraph, edge_ids, start, end):
    """Every hop is a real edge and hops chain from start to end."""
    cur = start
    for e in edge_ids:
        assert 0 <= e < g.m
        assert int(g.tails[e]) == cur
        cur = int(g.heads[e])
    assert cur == end


# ---------------------------------------------------------------------------
# corpus helpers


def random_no_cycle_graph(seed, n_max=40, w_base=9, w_pot=6, density=2.0):
    """Sparse random digraph with negative weights but no negative cycle.

    Potential-shifted weights: w(u,v) = base + phi(u) - phi(v), base >= 0.
    """
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    phi = [rng.randint(0, w_pot) for _ in range(n)]
    m = max(1, int(density * n))
    edges = []
    for _ in range(m):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        base = rng.randint(0, w_base)
        edges.append((u, v, base + phi[u] - phi[v]))
    # a weak backbone so a fair share of vertices is reachable from 0
    for v in range(1, n):
        if rng.random() < 0.5:
            u = rng.randrange(v)
            base = rng.randint(0, w_base)
            edges.append((u, v, base + phi[u] - phi[v]))
    return DiGraph.from_edges(n, edges)


def random_region_graph(seed, n_max=60):
    """Connected-ish sparse graph suitable as a region local graph."""
    rng = random.Random(seed)
    n = rng.randint(2, n_max)
    phi = [rng.randint(0, 5) for _ in range(n)]
    edges = []
    for v in range(1, n):
        u = rng.randint(max(0, v - 6), v - 1)
        base = rng.randint(0, 8)
        edges.append((u, v, base + phi[u] - phi[v]))
        if rng.random() < 0.7:
            edges.append((v, u, rng.randint(0, 8) + phi[v] - phi[u]))
    for _ in range(n):
        u = rng.randrange(n)
        v = rng.randint(max(0, u - 6), min(n - 1, u + 6))
        if u != v:
            edges.append((u, v, rng.randint(0, 8) + phi[u] - phi[v]))
    return DiGraph.from_edges(n, edges)


def plant_negative_cycle(g: DiGraph, seed):
    """Append a negative directed cycle through vertices reachable from 0."""
    rng = random.Random(seed)
    res, _ = brute_bellman_ford(g.n, list(g.edges()), 0)
    reach = [v for v in range(g.n) if res[v] != math.inf]
    k = min(len(reach), rng.randint(2, 4))
    cyc = rng.sample(reach, k)
    edges = list(zip(g.tails.tolist(), g.heads.tolist(), g.weights.tolist()))
    for i in range(k):
        u, v = cyc[i], cyc[(i + 1) % k]
        w = rng.randint(0, 3) if i < k - 1 else -(3 * k + rng.randint(1, 5))
        edges.append((u, v, w))
    return DiGraph.from_edges(g.n, edges)


def delta_matrix_from_edges(verts, edges):
    """Piece DistMatrix = brute-force APSP of the given small graph."""
    from sepshort.deltasys import DistMatrix
    from sepshort.graph import INF

    verts = sorted(verts)
    pos = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    local = [(pos[u], pos[v], w) for u, v, w in edges]
    dist = brute_floyd_warshall(n, local)
    out = np.full((n, n), INF, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if dist[i][j] != math.inf:
                out[i, j] = dist[i][j]
    return DistMatrix(np.array(verts, np.int64), out)


def random_delta_system(seed, k_max=5, v_max=20, t_min=1, t_max=3):
    """Seeded delta system; potential-shifted weights in [-3, 9] keep the
    union graph free of negative cycles."""
    from sepshort.deltasys import DeltaSystem

    rng = random.Random(seed)
    k = rng.randint(1, k_max)
    t = rng.randint(t_min, t_max)
    budget = v_max - t
    pool = iter(range(100))
    core = [next(pool) for _ in range(t)]
    phi = {}
    for v in core:
        phi[v] = rng.randint(0, 3)
    pieces = []
    for _ in range(k):
        w_cnt = rng.randint(0, max(0, budget // k))
        if t == 0:
            w_cnt = max(1, w_cnt)  # a piece must have at least one vertex
        extra = [next(pool) for _ in range(w_cnt)]
        for v in extra:
            phi[v] = rng.randint(0, 3)
        vs = sorted(core + extra)
        edges = []
        for _ in range(rng.randint(1, 3 * len(vs))):
            u, v = rng.choice(vs), rng.choice(vs)
            if u != v:
                base = rng.randint(0, 6)
                edges.append((u, v, base + phi[u] - phi[v]))
        pieces.append(delta_matrix_from_edges(vs, edges))
    return DeltaSystem(pieces, np.array(core, np.int64))


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
