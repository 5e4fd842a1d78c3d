"""(r, s)-divisions: partition the edge set into regions of bounded size
and boundary by recursive application of the separator engine.

A region is the vertex set induced by its edge share; a vertex is boundary
iff it lies in more than one region (or was force-added, e.g. a source).
The recursion splits oversized regions on uniform vertex weights, then
boundary-heavy regions on boundary-indicator weights; separator vertices
are duplicated into both sides, edges never are.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetUnmet
from .graph import DiGraph, Subgraph, VertexWeighting, edge_subgraph
from .separators import SeparatorBudget, separate

_EPS = 1e-9


@dataclass(frozen=True)
class Region:
    id: int
    edge_ids: np.ndarray            # sorted global edge ids
    vertices: frozenset
    boundary: frozenset
    forced: frozenset = frozenset()
    synthetic: bool = False         # isolated-vertex singleton

    def local(self, g: DiGraph) -> Subgraph:
        extra = self.vertices if self.synthetic else ()
        return edge_subgraph(g, self.edge_ids, extra_vertices=extra)

    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Division:
    regions: tuple
    r: int
    gamma: float
    c_div: float = 8.0
    c_cnt: float = 16.0

    @property
    def e_sep(self) -> float:
        return (2.0 - self.gamma) / 3.0

    def boundary_bound(self) -> float:
        return self.c_div * self.r ** self.e_sep

    def region_count_bound(self, n: int) -> float:
        return self.c_cnt * max(1.0, n / self.r)

    def with_forced_boundary(self, region_id: int, vertex: int) -> "Division":
        """Force a vertex (the source) into one region's boundary."""
        out = []
        for reg in self.regions:
            if reg.id == region_id:
                if vertex not in reg.vertices:
                    raise ValueError(f"vertex {vertex} not in region {region_id}")
                out.append(replace(reg,
                                   boundary=reg.boundary | {vertex},
                                   forced=reg.forced | {vertex}))
            else:
                out.append(reg)
        return replace(self, regions=tuple(out))


@dataclass
class DivisionReport:
    ok: bool
    failures: list = field(default_factory=list)


class _Work:
    __slots__ = ("eids", "tracked", "depth")

    def __init__(self, eids, tracked, depth=0):
        self.eids = eids
        self.tracked = tracked  # conservative boundary superset (global ids)
        self.depth = depth


def _split_work(g, work, weights_kind, budget, strategy, seed):
    """Split one work region; returns two children.

    weights_kind: "uniform" or "boundary".  Raises BudgetUnmet when the
    separator engine fails its budget.  A separation that cannot make
    progress (one side holds every edge: degenerate one-sided cuts on
    clique-like scraps) falls back to halving the edge list, which is a
    legal division step and strictly shrinks both children.
    """
    sub = edge_subgraph(g, work.eids)
    lg = sub.graph
    if weights_kind == "uniform":
        w = VertexWeighting.uniform(lg.n)
    else:
        w = VertexWeighting.indicator(
            lg.n, sub.to_local(sorted(work.tracked & set(sub.verts.tolist()))))
    sep = separate(lg, w, budget, strategy, seed)
    mark = np.zeros(lg.n, dtype=np.int8)
    for v in sep.a - sep.b:
        mark[v] = 1
    for v in sep.b - sep.a:
        mark[v] = 2
    # edges touching a side-exclusive vertex must follow that side;
    # separator-separator edges are free and go to the lighter side
    side = np.maximum(mark[lg.tails], mark[lg.heads])
    free = side == 0
    n_a = int((side == 1).sum())
    n_b = int((side == 2).sum())
    if free.any() and (n_a == 0 or n_b == 0):
        side[free] = 1 if n_a == 0 else 2
    elif free.any():
        side[free] = 1 if n_a <= n_b else 2
    eids_a = work.eids[side == 1]
    eids_b = work.eids[side == 2]
    sep_global = {int(x) for x in sub.to_global(sorted(sep.separator))}
    if len(eids_a) == 0 or len(eids_b) == 0:
        half = len(work.eids) // 2
        eids_a, eids_b = work.eids[:half], work.eids[half:]
        va = set(map(int, np.unique(np.concatenate(
            [g.tails[eids_a], g.heads[eids_a]])).tolist()))
        vb = set(map(int, np.unique(np.concatenate(
            [g.tails[eids_b], g.heads[eids_b]])).tolist()))
        sep_global = va & vb
    children = []
    for eids in (eids_a, eids_b):
        vs = set(map(int, np.unique(np.concatenate(
            [g.tails[eids], g.heads[eids]])).tolist()))
        tracked = (work.tracked & vs) | (sep_global & vs)
        children.append(_Work(eids, tracked, work.depth + 1))
    return children


def build_division(g: DiGraph, r: int, gamma: float,
                   strategy: str = "bfs-level", seed: int = 0,
                   c_sep: float = 4.0, c_div: float = 8.0,
                   c_cnt: float = 16.0, alpha: float = 2 / 3,
                   max_depth: int = 64) -> Division:
    """Build an (r, c_div * r^((2-gamma)/3))-division of g.

    Size splits run to completion before boundary splits so that a larger
    r always yields a coarsening of the recursion (monotone region count).
    A region that is a single edge is terminal: r=1 is unattainable for
    edge-induced regions, so the effective size target is max(r, 2).
    """
    if not (1 <= r <= max(1, g.n)):
        raise ValueError("r must be in [1, n]")
    if not (0 < gamma <= 0.5):
        raise ValueError("gamma must be in (0, 1/2]")
    e_sep = (2.0 - gamma) / 3.0
    budget = SeparatorBudget(c_sep=c_sep, e_sep=e_sep, alpha=alpha)
    size_target = max(r, 2)
    bb = c_div * r ** e_sep

    def vcount(eids):
        return len(np.unique(np.concatenate([g.tails[eids], g.heads[eids]])))

    done = []
    if g.m:
        stack = [_Work(np.arange(g.m, dtype=np.int64), set())]
        while stack:
            work = stack.pop()
            if work.depth > max_depth:
                raise BudgetUnmet("division recursion exceeded depth cap",
                                  context=f"{len(work.eids)} edges")
            if vcount(work.eids) > size_target:
                stack.extend(_split_work(g, work, "uniform", budget,
                                         strategy, seed))
            else:
                done.append(work)
        stack, done = done, []
        while stack:
            work = stack.pop()
            if work.depth > max_depth:
                raise BudgetUnmet("division recursion exceeded depth cap",
                                  context=f"{len(work.eids)} edges")
            if len(work.tracked) > bb + _EPS:
                stack.extend(_split_work(g, work, "boundary", budget,
                                         strategy, seed))
            else:
                done.append(work)

    # assemble regions with exact boundary membership (vertex in >= 2 regions)
    done.sort(key=lambda wk: int(wk.eids[0]))
    vert_sets = []
    for work in done:
        vs = np.unique(np.concatenate([g.tails[work.eids],
                                       g.heads[work.eids]]))
        vert_sets.append(vs)
    count = np.zeros(g.n, dtype=np.int64)
    for vs in vert_sets:
        count[vs] += 1
    shared = count >= 2
    regions = []
    for i, (work, vs) in enumerate(zip(done, vert_sets)):
        bnd = frozenset(int(v) for v in vs[shared[vs]])
        regions.append(Region(i, np.sort(work.eids),
                              frozenset(int(v) for v in vs), bnd))
    # isolated vertices get synthetic singleton regions
    nid = len(regions)
    for v in np.flatnonzero(count == 0).tolist():
        regions.append(Region(nid, np.empty(0, np.int64),
                              frozenset({int(v)}), frozenset(),
                              synthetic=True))
        nid += 1
    return Division(tuple(regions), r=r, gamma=gamma, c_div=c_div,
                    c_cnt=c_cnt)


def verify_division(g: DiGraph, d: Division) -> DivisionReport:
    """Recheck every division invariant from scratch."""
    failures = []
    all_eids = np.concatenate([reg.edge_ids for reg in d.regions]) \
        if d.regions else np.empty(0, np.int64)
    if len(all_eids) != g.m or \
            not np.array_equal(np.sort(all_eids), np.arange(g.m)):
        failures.append("edge partition: region edge sets do not partition E")
    count = np.zeros(g.n, dtype=np.int64)
    for reg in d.regions:
        for v in reg.vertices:
            count[v] += 1
    if (count == 0).any():
        failures.append("cover: some vertex lies in no region")
    shared = {int(v) for v in np.flatnonzero(count >= 2)}
    bb = d.boundary_bound()
    for reg in d.regions:
        if reg.synthetic:
            if len(reg.vertices) != 1 or len(reg.edge_ids) != 0:
                failures.append(f"region {reg.id}: malformed synthetic region")
            continue
        if len(reg.edge_ids) == 0:
            failures.append(f"region {reg.id}: empty edge set")
            continue
        vs = set(map(int, np.unique(np.concatenate(
            [g.tails[reg.edge_ids], g.heads[reg.edge_ids]])).tolist()))
        if vs != set(reg.vertices):
            failures.append(f"region {reg.id}: vertices != edge endpoints")
        recomputed = (shared & set(reg.vertices)) | set(reg.forced)
        if recomputed != set(reg.boundary):
            failures.append(f"region {reg.id}: boundary membership mismatch")
        if len(reg.vertices) > max(d.r, 2):
            failures.append(f"region {reg.id}: {len(reg.vertices)} vertices "
                            f"exceed r={d.r}")
        if len(reg.boundary - reg.forced) > bb + _EPS:
            failures.append(f"region {reg.id}: boundary "
                            f"{len(reg.boundary - reg.forced)} exceeds "
                            f"bound {bb:.2f}")
    if len(d.regions) > d.region_count_bound(g.n) + _EPS:
        failures.append(f"{len(d.regions)} regions exceed the count bound "
                        f"{d.region_count_bound(g.n):.1f}")
    return DivisionReport(ok=not failures, failures=failures)


# ---------------------------------------------------------------------------
# JSON-lines serialization (CLI `divide` output)


def save_division_jsonl(d: Division, n: int, m: int) -> str:
    lines = [json.dumps({"meta": True, "n": n, "m": m, "r": d.r,
                         "gamma": d.gamma, "c_div": d.c_div,
                         "c_cnt": d.c_cnt})]
    for reg in d.regions:
        lines.append(json.dumps({
            "id": reg.id,
            "edges": [int(e) for e in reg.edge_ids],
            "boundary": sorted(int(v) for v in reg.boundary),
            "forced": sorted(int(v) for v in reg.forced),
            "synthetic": reg.synthetic,
            "vertices": sorted(int(v) for v in reg.vertices),
        }))
    return "\n".join(lines) + "\n"


def load_division_jsonl(text: str) -> Division:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = json.loads(lines[0])
    if not meta.get("meta"):
        raise ValueError("division file is missing its meta line")
    regions = []
    for ln in lines[1:]:
        obj = json.loads(ln)
        regions.append(Region(
            id=int(obj["id"]),
            edge_ids=np.asarray(obj["edges"], dtype=np.int64),
            vertices=frozenset(obj["vertices"]),
            boundary=frozenset(obj["boundary"]),
            forced=frozenset(obj.get("forced", [])),
            synthetic=bool(obj.get("synthetic", False)),
        ))
    return Division(tuple(regions), r=int(meta["r"]),
                    gamma=float(meta["gamma"]), c_div=float(meta["c_div"]),
                    c_cnt=float(meta["c_cnt"]))
