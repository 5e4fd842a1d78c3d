"""End-to-end negative-weight SSSP via separators.

Four stages: (1) build an (r, s)-division; (2) per region, build the
boundary clique H and augmentation G_aug, forcing each source into its
region's boundary; (3) solve SSSP on the replaced graph (the union of all
H cliques over the boundary vertices) with the configured engine; (4) per
region, wire an auxiliary source to the boundary with the stage-3
distances and run hop-limited Bellman-Ford on G_aug, which finishes the
internal vertices.

Stages 1-2 depend only on the source *set*, so multi-source solves share
them; stages 3-4 repeat per source.  A final tense-edge audit over the
input graph guards the whole composition.
"""

import math
import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .division import Division, build_division
from .engines import SSSPResult, bellman_ford, bellman_ford_bounded, \
    dijkstra, first_tense_edge, scaling_sssp, simplify_negative_walk
from .errors import NegativeCycleError, UnreachableError
from .graph import INF, DiGraph
from .skeleton import SkeletonPair, build_skeleton, hop_budget

GAMMA_STAR = math.sqrt(11.5) - 3  # just below 0.392

ENGINES = ("scaling", "bf", "dijkstra")

_ENGINE_FN = {"scaling": scaling_sssp, "bf": bellman_ford,
              "dijkstra": dijkstra}


@dataclass(frozen=True)
class PipelineConfig:
    gamma: float = GAMMA_STAR
    r_override: int | None = None
    division_strategy: str = "bfs-level"
    skeleton_strategy: str = "bfs-level"
    engine: str = "scaling"
    c_sep: float = 4.0
    c_div: float = 8.0
    c_cnt: float = 16.0
    c_aug: float = 16.0
    hop_a: int = 2
    hop_b: int = 2
    base_cap: int = 32
    alpha: float = 2 / 3
    exact_cap: int = 16
    seed: int | None = None

    def __post_init__(self):
        if not (0 < self.gamma <= 0.5):
            raise ValueError("gamma must be in (0, 1/2]")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")

    def effective_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        return int(os.environ.get("SEPSHORT_SEED", "0"))

    def with_overrides(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)


def config_from_text(text: str,
                     base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse key=value lines (blank lines and #-comments ignored)."""
    cfg = base if base is not None else PipelineConfig()
    types = {f.name: f.type for f in fields(PipelineConfig)}
    overrides = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if not sep or key not in types:
            raise ValueError(f"bad config line {raw!r}")
        if key in ("r_override", "seed"):
            overrides[key] = None if val in ("", "none") else int(val)
        elif key in ("hop_a", "hop_b", "base_cap", "exact_cap"):
            overrides[key] = int(val)
        elif key in ("division_strategy", "skeleton_strategy", "engine"):
            overrides[key] = val
        else:
            overrides[key] = float(val)
    return cfg.with_overrides(**overrides)


def choose_params(n: int, cfg: PipelineConfig | None = None):
    """(gamma, r): r = ceil(n^(3/(4+gamma))) clamped to [1, n]."""
    cfg = cfg if cfg is not None else PipelineConfig()
    if cfg.r_override is not None:
        r = cfg.r_override
    else:
        r = math.ceil(n ** (3.0 / (4.0 + cfg.gamma))) if n > 0 else 1
    r = max(1, min(r, max(1, n)))
    return cfg.gamma, r


@dataclass
class ReplacedGraph:
    """Union of the per-region boundary cliques, multiplicities collapsed
    to the per-pair minimum (distance-safe)."""

    graph: DiGraph
    verts: np.ndarray        # local id -> global vertex id (sorted)
    arc_region: np.ndarray   # per arc: the region whose H provides it

    def position(self, v: int) -> int:
        i = int(np.searchsorted(self.verts, v))
        if i >= len(self.verts) or self.verts[i] != v:
            raise KeyError(f"vertex {v} is not a boundary vertex")
        return i


@dataclass
class PipelineStats:
    division_builds: int = 0
    skeleton_builds: int = 0
    times: dict = field(default_factory=dict)
    merge_ops: int = 0
    engine_phases: int = 0
    relaxations: int = 0
    replaced_vertices: int = 0
    replaced_edges: int = 0
    r: int = 0
    gamma: float = 0.0


class PipelineResult(SSSPResult):
    """SSSP answer plus the expansion structures for real paths."""

    def __init__(self, source, dist, stats, pipeline, res3, region_runs):
        super().__init__(source=source, dist=dist, pred=[],
                         stats=res3.stats)
        self.pipeline_stats = stats
        self._pipeline = pipeline
        self._res3 = res3
        self._region_runs = region_runs  # rid -> (result4, n_aug_arcs, fin_b)

    def path_to(self, v: int) -> list:
        return self._pipeline._extract_path(self, v)


class Pipeline:
    """Holds the shared stages for one graph + config; reusable across
    sources (stages 1-2 are built once per source set)."""

    def __init__(self, g: DiGraph, cfg: PipelineConfig | None = None):
        self.g = g
        self.cfg = cfg if cfg is not None else PipelineConfig()
        self.stats = PipelineStats()
        self.division: Division | None = None
        self.skeletons: dict = {}
        self.rg: ReplacedGraph | None = None
        self._vertex_region = None
        self._prepared_for = None

    # -- stages 1 and 2 ------------------------------------------------------

    def prepare(self, sources) -> None:
        sources = tuple(sorted(set(int(s) for s in sources)))
        for s in sources:
            if not (0 <= s < self.g.n):
                raise ValueError(f"source {s} out of range")
        if self._prepared_for == sources:
            return
        cfg = self.cfg
        seed = cfg.effective_seed()
        gamma, r = choose_params(self.g.n, cfg)
        self.stats.r, self.stats.gamma = r, gamma
        t0 = time.perf_counter()
        division = build_division(
            self.g, r, gamma, strategy=cfg.division_strategy, seed=seed,
            c_sep=cfg.c_sep, c_div=cfg.c_div, c_cnt=cfg.c_cnt,
            alpha=cfg.alpha)
        self.stats.division_builds += 1
        for s in sources:
            division = self._force_source(division, s)
        self.division = division
        self.stats.times["divide"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        self.skeletons = {}
        self.stats.merge_ops = 0
        for reg in division.regions:
            sp = build_skeleton(
                self.g, reg, gamma=gamma, base_cap=cfg.base_cap,
                c_sep=cfg.c_sep, alpha=cfg.alpha,
                strategy=cfg.skeleton_strategy, seed=seed,
                hop_a=cfg.hop_a, hop_b=cfg.hop_b)
            self.skeletons[reg.id] = sp
            self.stats.merge_ops += sp.stats.merge_ops
        self.stats.skeleton_builds += 1
        self.stats.times["skeleton"] = time.perf_counter() - t0

        self._build_replaced_graph()
        self._prepared_for = sources

    def _force_source(self, division: Division, s: int) -> Division:
        containing = [reg for reg in division.regions if s in reg.vertices]
        if any(s in reg.boundary for reg in containing):
            return division  # already a boundary vertex somewhere
        target = min(containing, key=lambda reg: reg.id)
        return division.with_forced_boundary(target.id, s)

    def _build_replaced_graph(self) -> None:
        t0 = time.perf_counter()
        all_b = set()
        for reg in self.division.regions:
            all_b |= reg.boundary
        bverts = np.array(sorted(all_b), dtype=np.int64)
        tails, heads, weights, regions = [], [], [], []
        for reg in self.division.regions:
            h = self.skeletons[reg.id].h
            k = h.n
            if k == 0:
                continue
            d = h.dist
            ii, jj = np.nonzero((d < INF) & ~np.eye(k, dtype=bool))
            tails.append(np.searchsorted(bverts, h.verts[ii]))
            heads.append(np.searchsorted(bverts, h.verts[jj]))
            weights.append(d[ii, jj])
            regions.append(np.full(len(ii), reg.id, dtype=np.int64))
        if tails:
            t = np.concatenate(tails)
            h_ = np.concatenate(heads)
            w = np.concatenate(weights)
            rr = np.concatenate(regions)
            key = t * max(1, len(bverts)) + h_
            order = np.lexsort((rr, w, key))
            first = np.flatnonzero(np.diff(key[order], prepend=-1))
            keep = order[first]
            t, h_, w, rr = t[keep], h_[keep], w[keep], rr[keep]
        else:
            t = h_ = w = rr = np.empty(0, np.int64)
        self.rg = ReplacedGraph(DiGraph(len(bverts), t, h_, w), bverts, rr)
        self.stats.replaced_vertices = len(bverts)
        self.stats.replaced_edges = len(t)
        vertex_region = np.full(self.g.n, -1, dtype=np.int64)
        bset = all_b
        for reg in self.division.regions:
            for v in reg.vertices:
                if v not in bset:
                    vertex_region[v] = reg.id
        self._vertex_region = vertex_region
        self.stats.times["replace"] = time.perf_counter() - t0

    # -- stages 3 and 4 ------------------------------------------------------

    def solve(self, s: int) -> PipelineResult:
        if self._prepared_for is None or int(s) not in \
                set(self._prepared_for) | set(self.rg.verts.tolist()):
            self.prepare([s])
        s = int(s)
        cfg = self.cfg
        t0 = time.perf_counter()
        engine = _ENGINE_FN[cfg.engine]
        try:
            res3 = engine(self.rg.graph, self.rg.position(s))
        except NegativeCycleError as err:
            raise self._lift_cycle(err) from None
        self.stats.engine_phases = res3.stats.phases
        self.stats.times["boundary"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        dist = np.full(self.g.n, INF, dtype=np.int64)
        dist[self.rg.verts] = res3.dist
        region_runs = {}
        relax = res3.stats.relaxations
        for reg in self.division.regions:
            sp = self.skeletons[reg.id]
            run = self._finish_region(reg, sp, dist)
            if run is None:
                continue
            res4, fin_b = run
            region_runs[reg.id] = (res4, sp.aug_edge_count(), fin_b)
            relax += res4.stats.relaxations
            lv = sp.sub.verts
            internal = self._vertex_region[lv] == reg.id
            dist[lv[internal]] = res4.dist[:len(lv)][internal]
        self.stats.relaxations = relax
        self.stats.times["regions"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        tense = first_tense_edge(self.g, dist)
        if tense is not None:
            raise AssertionError(
                f"internal error: tense edge {tense} after successful solve")
        self.stats.times["audit"] = time.perf_counter() - t0
        return PipelineResult(s, dist, self.stats, self, res3, region_runs)

    def _finish_region(self, reg, sp: SkeletonPair, dist_global):
        """Hop-limited relaxation from an auxiliary source wired to the
        region boundary at its stage-3 distances."""
        lg = sp.sub.graph
        k = lg.n
        if k == 0:
            return None
        bl = np.sort(sp.sub.to_local(sorted(reg.boundary))) \
            if reg.boundary else np.empty(0, np.int64)
        bg = sp.sub.verts[bl]
        fin = dist_global[bg] < INF
        bl, bg = bl[fin], bg[fin]
        tails = np.concatenate([sp.aug_tails, np.full(len(bl), k, np.int64)])
        heads = np.concatenate([sp.aug_heads, bl])
        weights = np.concatenate([sp.aug_weights, dist_global[bg]])
        aux = DiGraph(k + 1, tails, heads, weights)
        budget = hop_budget(sp.depth, sp.hop_a, sp.hop_b)
        res4 = bellman_ford_bounded(aux, k, budget)
        return res4, bl

    def solve_multi(self, sources) -> list:
        self.prepare(sources)
        return [self.solve(int(s)) for s in sources]

    # -- path machinery ------------------------------------------------------

    def _lift_cycle(self, err: NegativeCycleError) -> NegativeCycleError:
        """Expand a replaced-graph cycle into original edges."""
        if err.edges is None:
            return err
        walk = []
        for rg_e in err.edges:
            rid = int(self.rg.arc_region[rg_e])
            u = int(self.rg.verts[self.rg.graph.tails[rg_e]])
            v = int(self.rg.verts[self.rg.graph.heads[rg_e]])
            walk.extend(self.skeletons[rid].expand_h_arc(u, v))
        verts, edges, weight = simplify_negative_walk(self.g, walk)
        return NegativeCycleError(
            f"negative cycle of weight {weight}", vertices=verts,
            edges=edges, weight=weight)

    def _expand_rg_chain(self, res3: SSSPResult, v_local: int) -> list:
        out = []
        for rg_e in res3.path_to(v_local):
            rid = int(self.rg.arc_region[rg_e])
            u = int(self.rg.verts[self.rg.graph.tails[rg_e]])
            w = int(self.rg.verts[self.rg.graph.heads[rg_e]])
            out.extend(self.skeletons[rid].expand_h_arc(u, w))
        return out

    def _extract_path(self, result: PipelineResult, v: int) -> list:
        s = result.source
        if not (0 <= v < self.g.n):
            raise ValueError("vertex out of range")
        if int(result.dist[v]) >= INF:
            raise UnreachableError(f"vertex {v} is unreachable from {s}")
        if v == s:
            return []
        try:
            vb = self.rg.position(v)
        except KeyError:
            vb = None
        if vb is not None:
            return self._expand_rg_chain(result._res3, vb)
        rid = int(self._vertex_region[v])
        sp = self.skeletons[rid]
        res4, n_aug, _ = result._region_runs[rid]
        lv = int(sp.sub.to_local([v])[0])
        prefix_b = None
        local_edges = []
        cur = lv
        k = sp.sub.graph.n
        while cur != k:
            step = res4.pred[cur]
            assert step is not None, "broken stage-4 predecessor chain"
            pu, pe = step
            if pe >= n_aug:
                prefix_b = cur  # the auxiliary source arc lands here
                break
            local_edges.extend(reversed(sp.expand_aug_edge(pe)))
            cur = pu
        local_edges.reverse()
        path = [int(sp.sub.edge_ids[e]) for e in local_edges]
        assert prefix_b is not None, "stage-4 chain missed the source arc"
        b_global = int(sp.sub.verts[prefix_b])
        prefix = self._expand_rg_chain(result._res3,
                                       self.rg.position(b_global))
        return prefix + path


# ---------------------------------------------------------------------------
# module-level entry points (mirrored by the CLI)


def solve_sssp(g: DiGraph, s: int,
               cfg: PipelineConfig | None = None) -> PipelineResult:
    """Exact distances from s, negative weights allowed; NegativeCycle
    carries a verified witness in g."""
    return Pipeline(g, cfg).solve(s)


def solve_multi(g: DiGraph, sources,
                cfg: PipelineConfig | None = None) -> list:
    """Per-source results; the division and skeletons are built once."""
    return Pipeline(g, cfg).solve_multi(sources)


def extract_path(g: DiGraph, result: PipelineResult, v: int) -> list:
    """Edge ids of a shortest s -> v path in g realizing result.dist[v]."""
    path = result.path_to(v)
    total = sum(int(g.weights[e]) for e in path)
    assert total == int(result.dist[v]), "internal error: path length drift"
    return path
