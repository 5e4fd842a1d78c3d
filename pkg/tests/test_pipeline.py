import math

import numpy as np
import pytest

from sepshort.engines import bellman_ford
from sepshort.errors import NegativeCycleError, UnreachableError
from sepshort.graph import INF, DiGraph, gen_grid, gen_sparse
from sepshort.pipeline import (
    GAMMA_STAR,
    Pipeline,
    PipelineConfig,
    choose_params,
    config_from_text,
    extract_path,
    solve_multi,
    solve_sssp,
)

from conftest import (
    assert_valid_path,
    brute_bellman_ford,
    plant_negative_cycle,
    random_no_cycle_graph,
)


def three_vertex():
    return DiGraph.from_edges(3, [(0, 1, 2), (1, 2, -5), (0, 2, 1)])


def diff_against_bf(g, s, cfg=None):
    got = solve_sssp(g, s, cfg)
    want = bellman_ford(g, s)
    assert np.array_equal(got.dist, want.dist), \
        f"mismatch at {np.flatnonzero(got.dist != want.dist)[:5]}"
    return got


# ---------------------------------------------------------------------------
# choose_params


def test_choose_params_clamps():
    assert choose_params(1) == (GAMMA_STAR, 1)


def test_choose_params_golden_million():
    # frozen from an independent high-precision evaluation of the closed form
    _, r = choose_params(10 ** 6)
    assert r == 12565


def test_choose_params_gamma_half_degenerates():
    cfg = PipelineConfig(gamma=0.5)
    gamma, _ = choose_params(100, cfg)
    assert (2 - gamma) / 3 == pytest.approx(0.5)


def test_choose_params_known_sizes():
    for n, want in [(2000, 180), (10 ** 4, 541), (4 * 10 ** 4, 1394)]:
        assert choose_params(n)[1] == want


# ---------------------------------------------------------------------------
# config plumbing


def test_config_from_text_roundtrip():
    cfg = config_from_text("gamma=0.45\nengine=bf\nbase_cap=12\nseed=7\n")
    assert cfg.gamma == 0.45
    assert cfg.engine == "bf"
    assert cfg.base_cap == 12
    assert cfg.seed == 7
    with pytest.raises(ValueError):
        config_from_text("nonsense=1")
    with pytest.raises(ValueError):
        PipelineConfig(gamma=0.7)


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("SEPSHORT_SEED", "123")
    assert PipelineConfig().effective_seed() == 123
    assert PipelineConfig(seed=5).effective_seed() == 5


# ---------------------------------------------------------------------------
# solve_sssp


def test_degenerate_single_region_equals_bf():
    g = random_no_cycle_graph(3, n_max=30)
    cfg = PipelineConfig(r_override=g.n)
    diff_against_bf(g, 0, cfg)


def test_three_vertex_multi_region():
    got = solve_sssp(three_vertex(), 0, PipelineConfig(r_override=2))
    assert got.dist.tolist() == [0, 2, -3]


def test_small_random_corpus_equals_bf():
    for seed in range(40):
        g = random_no_cycle_graph(seed, n_max=60)
        diff_against_bf(g, seed % g.n)


def test_grid_corpus_equals_bf():
    for seed, (rows, cols) in enumerate([(8, 8), (10, 13), (17, 6)]):
        g = gen_grid(rows, cols, "negperturb=7,4", seed=seed)
        diff_against_bf(g, (seed * 13) % g.n)


def test_sparse_corpus_equals_bf():
    for seed in range(6):
        g = gen_sparse(400, "negperturb=9,5", seed=seed)
        diff_against_bf(g, (seed * 97) % g.n)


def test_engines_swap_by_configuration():
    g = gen_grid(7, 9, "negperturb=6,3", seed=1)
    base = solve_sssp(g, 5, PipelineConfig(engine="scaling"))
    alt = solve_sssp(g, 5, PipelineConfig(engine="bf"))
    assert np.array_equal(base.dist, alt.dist)


def test_unreachable_vertices_reported_inf():
    g = DiGraph.from_edges(5, [(0, 1, -2), (1, 2, 3)])  # 3, 4 isolated
    res = solve_sssp(g, 0)
    assert int(res.dist[3]) >= INF and int(res.dist[4]) >= INF
    assert int(res.dist[2]) == 1
    with pytest.raises(UnreachableError):
        res.path_to(4)


def test_deterministic_outputs():
    g = gen_sparse(200, "negperturb=8,4", seed=11)
    a = solve_sssp(g, 3, PipelineConfig(seed=1))
    b = solve_sssp(g, 3, PipelineConfig(seed=1))
    assert np.array_equal(a.dist, b.dist)
    assert a.path_to(g.n - 1) == b.path_to(g.n - 1)


# ---------------------------------------------------------------------------
# path extraction


def test_extract_path_source_is_empty():
    res = solve_sssp(three_vertex(), 0)
    assert extract_path(three_vertex(), res, 0) == []


def test_extract_path_hand_example():
    g = three_vertex()
    res = solve_sssp(g, 0, PipelineConfig(r_override=2))
    path = extract_path(g, res, 2)
    assert [int(g.tails[e]) for e in path] == [0, 1]
    assert sum(int(g.weights[e]) for e in path) == -3


def test_extract_path_random_property():
    for seed in range(12):
        g = random_no_cycle_graph(seed + 500, n_max=50)
        s = seed % g.n
        res = solve_sssp(g, s)
        for v in range(g.n):
            if not res.reachable(v) or v == s:
                continue
            path = extract_path(g, res, v)
            assert_valid_path(g, path, s, v)
            assert sum(int(g.weights[e]) for e in path) == int(res.dist[v])


# ---------------------------------------------------------------------------
# negative cycles


def test_planted_cycles_detected_with_verified_witness():
    for seed in range(15):
        g0 = random_no_cycle_graph(seed + 60, n_max=40)
        g = plant_negative_cycle(g0, seed)
        with pytest.raises(NegativeCycleError):
            bellman_ford(g, 0)
        with pytest.raises(NegativeCycleError) as ei:
            solve_sssp(g, 0)
        err = ei.value
        assert err.weight < 0
        assert sum(int(g.weights[e]) for e in err.edges) == err.weight
        cur = int(g.tails[err.edges[0]])
        for e in err.edges:
            assert int(g.tails[e]) == cur
            cur = int(g.heads[e])
        assert cur == int(g.tails[err.edges[0]])
        assert len(set(err.vertices)) == len(err.vertices)


def test_cross_region_cycle_detected():
    # a long negative cycle that no single small region can contain
    g0 = gen_grid(1, 30, "const=1")
    edges = list(zip(g0.tails.tolist(), g0.heads.tolist(),
                     g0.weights.tolist()))
    edges.append((29, 0, -100))
    g = DiGraph.from_edges(30, edges)
    with pytest.raises(NegativeCycleError) as ei:
        solve_sssp(g, 0, PipelineConfig(r_override=6))
    assert ei.value.weight < 0


# ---------------------------------------------------------------------------
# multi-source


def test_multi_source_matches_single_and_counts_builds():
    g = gen_grid(20, 20, "negperturb=6,3", seed=3)
    sources = [0, 57, 199, 398]
    pipe = Pipeline(g, PipelineConfig())
    results = pipe.solve_multi(sources)
    assert pipe.stats.division_builds == 1
    assert pipe.stats.skeleton_builds == 1
    for s, res in zip(sources, results):
        fresh = solve_sssp(g, s)
        assert np.array_equal(res.dist, fresh.dist), f"source {s}"


def test_multi_single_source_equals_solve():
    g = gen_sparse(150, "negperturb=7,3", seed=9)
    multi = solve_multi(g, [4])
    single = solve_sssp(g, 4)
    assert np.array_equal(multi[0].dist, single.dist)


# ---------------------------------------------------------------------------
# stage-level invariants


def test_boundary_stage_distances_exact():
    # after stage 3, replaced-graph distances at boundary vertices already
    # equal the true distances in g
    g = gen_grid(12, 12, "negperturb=6,3", seed=4)
    pipe = Pipeline(g, PipelineConfig())
    res = pipe.solve(7)
    want = bellman_ford(g, 7)
    rg_dist = res._res3.dist
    for i, v in enumerate(pipe.rg.verts.tolist()):
        assert int(rg_dist[i]) == int(want.dist[v])


def test_stage_times_cover_the_run():
    g = gen_grid(15, 15, "negperturb=6,3", seed=2)
    import time
    t0 = time.perf_counter()
    pipe = Pipeline(g, PipelineConfig())
    pipe.solve(0)
    total = time.perf_counter() - t0
    assert sum(pipe.stats.times.values()) <= total
    assert sum(pipe.stats.times.values()) >= 0.5 * total
