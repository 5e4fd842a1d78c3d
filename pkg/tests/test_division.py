import numpy as np
import pytest

from sepshort.division import (
    build_division,
    load_division_jsonl,
    save_division_jsonl,
    verify_division,
)
from sepshort.graph import DiGraph, gen_grid, gen_sparse


def test_r_at_least_n_single_region():
    g = gen_grid(4, 4)
    d = build_division(g, r=16, gamma=0.5)
    assert len(d.regions) == 1
    assert d.regions[0].boundary == frozenset()
    assert verify_division(g, d).ok


def test_path_p100_r10():
    g = gen_grid(1, 100)
    d = build_division(g, r=10, gamma=0.5)
    rep = verify_division(g, d)
    assert rep.ok, rep.failures
    total_edges = sum(len(reg.edge_ids) for reg in d.regions)
    assert total_edges == g.m
    for reg in d.regions:
        assert len(reg.vertices) <= 10
        assert len(reg.boundary) <= 2


def test_grid_16x16_r64():
    g = gen_grid(16, 16)
    d = build_division(g, r=64, gamma=0.5)
    rep = verify_division(g, d)
    assert rep.ok, rep.failures
    assert len(d.regions) <= d.region_count_bound(g.n)


def test_internal_vertices_have_all_edges_in_one_region():
    g = gen_grid(12, 12)
    d = build_division(g, r=36, gamma=0.5)
    boundary_union = set()
    for reg in d.regions:
        boundary_union |= reg.boundary
    owner = {}
    for reg in d.regions:
        for e in reg.edge_ids:
            owner[int(e)] = reg.id
    for v in range(g.n):
        if v in boundary_union:
            continue
        incident = [i for i in range(g.m)
                    if int(g.tails[i]) == v or int(g.heads[i]) == v]
        assert len({owner[e] for e in incident}) == 1


def test_isolated_vertices_get_synthetic_regions():
    g = DiGraph.from_edges(4, [(0, 1, 1), (1, 0, 1)])  # 2 and 3 isolated
    d = build_division(g, r=4, gamma=0.5)
    synth = [reg for reg in d.regions if reg.synthetic]
    assert {next(iter(reg.vertices)) for reg in synth} == {2, 3}
    assert verify_division(g, d).ok


def test_monotonicity_in_r():
    g = gen_grid(10, 10)
    counts = [len(build_division(g, r=r, gamma=0.5).regions)
              for r in (10, 20, 40, 100)]
    assert counts == sorted(counts, reverse=True)


def test_sparse_random_divisions_verify():
    for seed in range(6):
        g = gen_sparse(300 + 50 * seed, seed=seed)
        d = build_division(g, r=40, gamma=0.4, seed=seed)
        rep = verify_division(g, d)
        assert rep.ok, rep.failures


def test_verifier_catches_duplicated_edge():
    from dataclasses import replace
    g = gen_grid(1, 20)
    d = build_division(g, r=5, gamma=0.5)
    r0 = d.regions[0]
    r1 = d.regions[1]
    tampered = replace(d, regions=(
        replace(r0, edge_ids=np.concatenate([r0.edge_ids, r1.edge_ids[:1]])),
    ) + d.regions[1:])
    rep = verify_division(g, tampered)
    assert not rep.ok
    assert any("edge partition" in f for f in rep.failures)


def test_verifier_catches_dropped_boundary_vertex():
    from dataclasses import replace
    g = gen_grid(1, 20)
    d = build_division(g, r=5, gamma=0.5)
    victim = None
    for i, reg in enumerate(d.regions):
        if reg.boundary:
            victim = i
            break
    dropped = set(d.regions[victim].boundary)
    dropped.pop()
    tampered = replace(d, regions=d.regions[:victim] + (
        replace(d.regions[victim], boundary=frozenset(dropped)),
    ) + d.regions[victim + 1:])
    rep = verify_division(g, tampered)
    assert not rep.ok
    assert any("boundary membership" in f for f in rep.failures)


def test_forced_boundary_slack():
    g = gen_grid(6, 6)
    d = build_division(g, r=12, gamma=0.5)
    target = next(reg for reg in d.regions if reg.vertices)
    v = min(target.vertices - target.boundary) \
        if target.vertices - target.boundary else min(target.vertices)
    d2 = d.with_forced_boundary(target.id, v)
    rep = verify_division(g, d2)
    assert rep.ok, rep.failures


def test_jsonl_roundtrip():
    g = gen_grid(5, 8)
    d = build_division(g, r=10, gamma=0.45)
    text = save_division_jsonl(d, g.n, g.m)
    d2 = load_division_jsonl(text)
    assert d2.r == d.r and d2.gamma == d.gamma
    assert len(d2.regions) == len(d.regions)
    for a, b in zip(d.regions, d2.regions):
        assert np.array_equal(a.edge_ids, b.edge_ids)
        assert a.boundary == b.boundary and a.vertices == b.vertices
    assert verify_division(g, d2).ok


def test_bad_parameters_rejected():
    g = gen_grid(3, 3)
    with pytest.raises(ValueError):
        build_division(g, r=0, gamma=0.5)
    with pytest.raises(ValueError):
        build_division(g, r=4, gamma=0.9)
