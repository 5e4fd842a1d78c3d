"""Vertex separations: budgeted separator strategies and the two-phase
doubly-balanced split.

A separation (A, B) covers V with no edge joining A-B to B-A; A∩B is the
separator.  Strategies are pure functions of (graph, weighting, budget,
seed): `exact` enumerates subsets by size (small graphs only), `bfs-level`
cuts breadth-first levels from several roots, `local-search` greedily
shrinks the best level cut.  All of them return separations that satisfy
the invariants by construction; `separate` additionally enforces the size
and balance budget and raises BudgetUnmet (carrying the best separation
found) when it cannot be met.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetUnmet
from .graph import DiGraph, VertexWeighting, induced_subgraph

STRATEGIES = ("exact", "bfs-level", "local-search")

_EPS = 1e-9


def _fits(side_weight: float, alpha: float, total: float) -> bool:
    return side_weight <= alpha * total + _EPS * max(1.0, total)


@dataclass(frozen=True)
class SeparatorBudget:
    """Size bound c_sep * n^e_sep and balance target alpha."""

    c_sep: float = 4.0
    e_sep: float = 0.5
    alpha: float = 2 / 3

    def __post_init__(self):
        if not (0 < self.alpha < 1):
            raise ValueError("alpha must be in (0, 1)")
        if self.c_sep <= 0:
            raise ValueError("c_sep must be positive")
        if not (0 < self.e_sep <= 1):
            raise ValueError("e_sep must be in (0, 1]")

    def f_bound(self, n: int) -> float:
        return self.c_sep * n ** self.e_sep


@dataclass(frozen=True)
class Separation:
    """Cover (a, b) of the vertex set; separator == a & b."""

    a: frozenset
    b: frozenset
    separator: frozenset
    balance_alpha: float

    @property
    def size(self) -> int:
        return len(self.separator)


@dataclass
class SeparationReport:
    ok: bool
    failures: list = field(default_factory=list)


def parse_strategy_spec(text: str):
    """Parse "strategy=bfs-level,c=4,e=0.5,alpha=0.667" into
    (strategy_id, SeparatorBudget)."""
    strategy = "bfs-level"
    kw = {}
    for item in text.split(","):
        if not item:
            continue
        key, _, val = item.partition("=")
        key = key.strip()
        if key == "strategy":
            strategy = val.strip()
        elif key == "c":
            kw["c_sep"] = float(val)
        elif key == "e":
            kw["e_sep"] = float(val)
        elif key == "alpha":
            kw["alpha"] = float(val)
        else:
            raise ValueError(f"unknown budget key {key!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    return strategy, SeparatorBudget(**kw)


def verify_separation(g: DiGraph, w: VertexWeighting,
                      s: Separation) -> SeparationReport:
    """Pure check of the three separation invariants."""
    failures = []
    if s.a | s.b != frozenset(range(g.n)):
        failures.append("cover: A union B != V")
    if s.a & s.b != s.separator:
        failures.append("separator != A intersect B")
    a_only = s.a - s.b
    b_only = s.b - s.a
    for u, v in zip(g.tails.tolist(), g.heads.tolist()):
        if (u in a_only and v in b_only) or (u in b_only and v in a_only):
            failures.append(f"crossing edge ({u}, {v})")
            break
    total = w.total
    wa = w.of(a_only)
    wb = w.of(b_only)
    if not _fits(wa, s.balance_alpha, total):
        failures.append(f"w(A-B)={wa} exceeds alpha*w(G)={s.balance_alpha * total}")
    if not _fits(wb, s.balance_alpha, total):
        failures.append(f"w(B-A)={wb} exceeds alpha*w(G)={s.balance_alpha * total}")
    return SeparationReport(ok=not failures, failures=failures)


# ---------------------------------------------------------------------------
# shared machinery


def _gather(indptr, nbrs, frontier):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, np.int64)
    idx = np.repeat(starts - (np.cumsum(counts) - counts), counts) \
        + np.arange(total)
    return nbrs[idx]


def bfs_levels(g: DiGraph, root: int) -> np.ndarray:
    """Undirected BFS level per vertex; -1 for unreached."""
    indptr, nbrs = g.undirected_csr()
    levels = np.full(g.n, -1, dtype=np.int64)
    levels[root] = 0
    frontier = np.array([root], dtype=np.int64)
    d = 0
    while len(frontier):
        d += 1
        nxt = _gather(indptr, nbrs, frontier)
        nxt = np.unique(nxt[levels[nxt] < 0])
        levels[nxt] = d
        frontier = nxt
    return levels


def connected_components(g: DiGraph, excluded=None) -> list:
    """Components of the underlying undirected graph minus `excluded`.

    Deterministic: components ordered by their smallest vertex id.
    """
    indptr, nbrs = g.undirected_csr()
    seen = np.zeros(g.n, dtype=bool)
    if excluded is not None:
        for v in excluded:
            seen[v] = True
    comps = []
    for v0 in range(g.n):
        if seen[v0]:
            continue
        seen[v0] = True
        comp = [np.array([v0], dtype=np.int64)]
        frontier = comp[0]
        while len(frontier):
            nxt = _gather(indptr, nbrs, frontier)
            nxt = np.unique(nxt[~seen[nxt]])
            seen[nxt] = True
            comp.append(nxt)
            frontier = nxt
        comps.append(np.concatenate(comp))
    return comps


def _pack_two_sides(blocks, weights, alpha, total):
    """Assign blocks to two sides, each side <= alpha*total if possible.

    Greedy largest-first, then an exact subset-sum pass when the greedy
    misses and the weights are integral.  Returns (side0, side1, max_w)
    with blocks as index lists, or None.
    """
    order = sorted(range(len(blocks)), key=lambda i: (-weights[i], i))
    s0, s1 = [], []
    w0 = w1 = 0.0
    for i in order:
        if w0 <= w1:
            s0.append(i)
            w0 += weights[i]
        else:
            s1.append(i)
            w1 += weights[i]
    if _fits(w0, alpha, total) and _fits(w1, alpha, total):
        return s0, s1, max(w0, w1)
    if all(float(x).is_integer() for x in weights):
        iw = [int(x) for x in weights]
        tw = sum(iw)
        reachable = [1]
        for x in iw:
            reachable.append(reachable[-1] | (reachable[-1] << x))
        mask = reachable[-1]
        best_s = None
        half = tw // 2
        for delta in range(half + 1):
            for cand in (half - delta, half + delta):
                if 0 <= cand <= tw and (mask >> cand) & 1:
                    best_s = cand
                    break
            if best_s is not None:
                break
        if best_s is None:
            return None
        if not (_fits(best_s, alpha, total)
                and _fits(tw - best_s, alpha, total)):
            return None
        s0, s1 = [], []
        need = best_s
        for i in range(len(iw) - 1, -1, -1):
            if need >= iw[i] and (reachable[i] >> (need - iw[i])) & 1:
                s0.append(i)
                need -= iw[i]
            else:
                s1.append(i)
        return s0, s1, float(max(best_s, tw - best_s))
    return None


def _separation_from_separator(g, w, sep_vertices, alpha,
                               precomputed_comps=None):
    """Best separation with the given separator set, or None if no packing
    of the remaining components meets the balance target."""
    sep = frozenset(int(v) for v in sep_vertices)
    comps = precomputed_comps
    if comps is None:
        comps = connected_components(g, excluded=sep)
    cw = [w.of(c) for c in comps]
    total = w.total
    for x in cw:
        if not _fits(x, alpha, total):
            return None
    packed = _pack_two_sides(comps, cw, alpha, total)
    if packed is None:
        return None
    s0, s1, max_w = packed
    a = set(sep)
    b = set(sep)
    for i in s0:
        a.update(int(v) for v in comps[i])
    for i in s1:
        b.update(int(v) for v in comps[i])
    achieved = (max_w / total) if total > 0 else 0.0
    return Separation(frozenset(a), frozenset(b), sep, achieved)


# ---------------------------------------------------------------------------
# strategies


def _strategy_exact(g, w, budget, seed, exact_cap):
    n = g.n
    if n > exact_cap:
        raise ValueError(
            f"exact strategy is capped at {exact_cap} vertices, got {n}")
    alpha = budget.alpha
    for k in range(n + 1):
        best = None
        for sub in itertools.combinations(range(n), k):
            sep = _separation_from_separator(g, w, sub, alpha)
            if sep is None:
                continue
            key = (sep.balance_alpha, tuple(sorted(sep.separator)))
            if best is None or key < best[0]:
                best = (key, sep)
        if best is not None:
            return best[1]
    return None  # unreachable: k = n always packs (empty sides)


def _candidate_roots(g, rng, extra=0):
    n = g.n
    roots = [0, n // 2, n - 1]
    for _ in range(1 + extra):
        roots.append(int(rng.integers(0, n)))
    seen, out = set(), []
    for r in roots:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def _level_cut_separation(g, w, levels, lev, comps, comp_of, root, alpha):
    """Separation for one BFS level cut without recomputing components:
    side A takes the levels below the cut, side B the levels above, and
    whole unreached components go to whichever side is lighter."""
    sep_idx = np.flatnonzero(levels == lev)
    below = np.flatnonzero((levels >= 0) & (levels < lev))
    above = np.flatnonzero(levels > lev)
    wa = float(w.values[below].sum())
    wb = float(w.values[above].sum())
    a = set(int(v) for v in below)
    b = set(int(v) for v in above)
    root_comp = int(comp_of[root])
    extras = sorted((float(w.values[c].sum()), i) for i, c in enumerate(comps)
                    if i != root_comp)
    for cw, i in reversed(extras):
        if wa <= wb:
            a.update(int(v) for v in comps[i])
            wa += cw
        else:
            b.update(int(v) for v in comps[i])
            wb += cw
    sep = frozenset(int(v) for v in sep_idx)
    total = w.total
    achieved = (max(wa, wb) / total) if total > 0 else 0.0
    return Separation(frozenset(a) | sep, frozenset(b) | sep, sep, achieved)


def _strategy_bfs_level(g, w, budget, seed, full_evals=12, extra_roots=0):
    """Best BFS level cut over several roots.

    Candidates are scored from per-level prefix weights; the winner's
    separation is materialized directly from the level structure.  When no
    cut balances, the smallest cuts are retried with full component
    repacking before giving up.
    """
    n = g.n
    alpha = budget.alpha
    fb = budget.f_bound(n)
    wv = w.values
    total = w.total
    rng = np.random.default_rng(seed)

    comps = connected_components(g)
    comp_of = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(comps):
        comp_of[c] = i
    if len(comps) > 1:
        empty = _separation_from_separator(g, w, frozenset(), alpha,
                                           precomputed_comps=comps)
        if empty is not None:
            return empty

    roots = _candidate_roots(g, rng, extra_roots)
    levels_by_root = [bfs_levels(g, r) for r in roots]
    candidates = []  # (infeasible, size, est_alpha, ridx, level)
    for ridx, levels in enumerate(levels_by_root):
        maxlev = int(levels.max())
        if maxlev < 1:
            continue
        level_w = np.zeros(maxlev + 2)
        reached = levels >= 0
        np.add.at(level_w, levels[reached], wv[reached])
        level_sz = np.bincount(levels[reached], minlength=maxlev + 2)
        w_unreached = float(wv[~reached].sum())
        prefix = np.cumsum(level_w)
        w_reached = float(prefix[maxlev])
        for lev in range(1, maxlev + 1):
            size = int(level_sz[lev])
            below = float(prefix[lev - 1])
            above = w_reached - float(prefix[lev])
            lo, hi = sorted((below, above))
            est = max(hi, lo + w_unreached)
            est_alpha = est / total if total > 0 else 0.0
            feasible = size <= fb + _EPS and est_alpha <= alpha + _EPS
            candidates.append((0 if feasible else 1, size, est_alpha,
                               ridx, lev))

    candidates.sort()
    best_any = None
    for cand in candidates[:full_evals]:
        infeasible, size, est, ridx, lev = cand
        sep = _level_cut_separation(g, w, levels_by_root[ridx], lev, comps,
                                    comp_of, roots[ridx], alpha)
        if sep.size <= fb + _EPS and sep.balance_alpha <= alpha + _EPS:
            return sep
        if best_any is None or (sep.size, sep.balance_alpha) \
                < (best_any.size, best_any.balance_alpha):
            best_any = sep
    # salvage: full component repacking of the smallest cuts
    for cand in sorted(candidates, key=lambda c: (c[1], c[2]))[:4]:
        _, size, _, ridx, lev = cand
        if size > fb + _EPS:
            continue
        sep_set = frozenset(
            int(v) for v in np.flatnonzero(levels_by_root[ridx] == lev))
        sep = _separation_from_separator(g, w, sep_set, alpha)
        if sep is not None and sep.size <= fb + _EPS:
            return sep
    return best_any


def _strategy_local_search(g, w, budget, seed):
    """Greedy refinement of the best BFS cut: pull separator vertices into
    a side whenever no neighbor lies on the opposite side."""
    start = _strategy_bfs_level(g, w, budget, seed)
    if start is None:
        return None
    alpha = budget.alpha
    total = w.total
    indptr, nbrs = g.undirected_csr()
    SIDE_A, SIDE_B, SEP = 0, 1, 2
    side = np.full(g.n, SEP, dtype=np.int8)
    for v in start.a - start.b:
        side[v] = SIDE_A
    for v in start.b - start.a:
        side[v] = SIDE_B
    wa = w.of(start.a - start.b)
    wb = w.of(start.b - start.a)
    for _ in range(30):
        moved = False
        for v in sorted(np.flatnonzero(side == SEP).tolist()):
            nb = nbrs[indptr[v]:indptr[v + 1]]
            has_a = bool((side[nb] == SIDE_A).any())
            has_b = bool((side[nb] == SIDE_B).any())
            wv = float(w.values[v])
            if not has_b and _fits(wa + wv, alpha, total):
                side[v] = SIDE_A
                wa += wv
                moved = True
            elif not has_a and _fits(wb + wv, alpha, total):
                side[v] = SIDE_B
                wb += wv
                moved = True
        if not moved:
            break
    sep = frozenset(np.flatnonzero(side == SEP).tolist())
    a = sep | frozenset(np.flatnonzero(side == SIDE_A).tolist())
    b = sep | frozenset(np.flatnonzero(side == SIDE_B).tolist())
    achieved = (max(wa, wb) / total) if total > 0 else 0.0
    refined = Separation(a, b, sep, achieved)
    if (refined.size, refined.balance_alpha) \
            <= (start.size, start.balance_alpha):
        return refined
    return start


def separate(g: DiGraph, w: VertexWeighting, budget: SeparatorBudget,
             strategy: str = "bfs-level", seed: int = 0,
             exact_cap: int = 16, bound_override: float | None = None,
             ) -> Separation:
    """Produce a separation within the budget.

    Raises BudgetUnmet (carrying the best separation found, possibly None)
    when the strategy cannot meet the size or balance target; for honest
    heuristics on dense inputs this is the stand-in for "the graph is not
    in the promised class".
    """
    if g.n < 2:
        raise ValueError("separate requires n >= 2")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "exact":
        sep = _strategy_exact(g, w, budget, seed, exact_cap)
    elif strategy == "bfs-level":
        sep = _strategy_bfs_level(g, w, budget, seed)
        if sep is None or sep.size > budget.f_bound(g.n):
            retry = _strategy_bfs_level(g, w, budget, seed, full_evals=40,
                                        extra_roots=8)
            if retry is not None and (sep is None or retry.size < sep.size):
                sep = retry
    else:
        sep = _strategy_local_search(g, w, budget, seed)

    fb = budget.f_bound(g.n) if bound_override is None else bound_override
    if sep is None:
        raise BudgetUnmet("no separation found", best=None,
                          context=f"n={g.n} strategy={strategy}")
    if sep.size > fb + _EPS or sep.balance_alpha > budget.alpha + _EPS:
        raise BudgetUnmet(
            f"best separation has size {sep.size} (bound {fb:.2f}) "
            f"balance {sep.balance_alpha:.3f} (target {budget.alpha:.3f})",
            best=sep, context=f"n={g.n} strategy={strategy}")
    return sep


# ---------------------------------------------------------------------------
# two-phase doubly balanced split


@dataclass(frozen=True)
class SplitResult:
    x: frozenset
    t1: frozenset
    t2: frozenset
    t3: frozenset

    def pieces(self):
        return (self.t1, self.t2, self.t3)


def double_balanced_split(g: DiGraph, region_vertices, boundary,
                          budget: SeparatorBudget, strategy: str = "bfs-level",
                          seed: int = 0) -> SplitResult:
    """Split a region into X and three pieces, balanced both by vertex
    count and by boundary count.

    Phase 1 cuts on uniform weights; phase 2 re-cuts the piece holding
    more than half of the boundary, on boundary-indicator weights.  |X| is
    at most twice the budget evaluated at |region_vertices|.
    """
    region = frozenset(int(v) for v in region_vertices)
    bset = frozenset(int(v) for v in boundary) & region
    sub = induced_subgraph(g, region)
    lg = sub.graph
    nloc = lg.n
    phase_bound = budget.f_bound(nloc)

    uni = VertexWeighting.uniform(nloc)
    s1 = separate(lg, uni, budget, strategy, seed)
    sep1 = set(s1.separator)
    p1 = s1.a - s1.b
    p2 = s1.b - s1.a

    bl = frozenset(int(x) for x in sub.to_local(sorted(bset))) if bset else \
        frozenset()
    heavy = None
    if bset:
        c1 = len(p1 & bl)
        c2 = len(p2 & bl)
        if c1 * 2 > len(bl):
            heavy = p1
        elif c2 * 2 > len(bl):
            heavy = p2

    if heavy is None:
        x_loc = set(sep1)
        t1_loc, t2_loc, t3_loc = set(p1), set(p2), set()
    elif len(heavy) == 1:
        # cannot cut a singleton; absorbing it into X keeps every bound
        x_loc = set(sep1) | set(heavy)
        light = p2 if heavy is p1 else p1
        t1_loc, t2_loc, t3_loc = set(light), set(), set()
    else:
        hsub = induced_subgraph(lg, heavy)
        ind = VertexWeighting.indicator(hsub.graph.n,
                                        hsub.to_local(sorted(bl & heavy)))
        s2 = separate(hsub.graph, ind, budget, strategy, seed,
                      bound_override=phase_bound)
        sep2 = {int(x) for x in hsub.to_global(sorted(s2.separator))}
        t2_loc = {int(x) for x in hsub.to_global(sorted(s2.a - s2.b))}
        t3_loc = {int(x) for x in hsub.to_global(sorted(s2.b - s2.a))}
        x_loc = set(sep1) | sep2
        t1_loc = set(p2 if heavy is p1 else p1)

    to_g = lambda s: frozenset(int(x) for x in sub.to_global(sorted(s))) \
        if s else frozenset()
    return SplitResult(to_g(x_loc), to_g(t1_loc), to_g(t2_loc), to_g(t3_loc))


def verify_split(g: DiGraph, region_vertices, boundary, budget,
                 split: SplitResult) -> SeparationReport:
    """Independent recheck of all six cardinality fractions and the edge
    condition for a double_balanced_split output."""
    failures = []
    region = frozenset(int(v) for v in region_vertices)
    bset = frozenset(int(v) for v in boundary) & region
    parts = [split.t1, split.t2, split.t3]
    union = split.x | split.t1 | split.t2 | split.t3
    if union != region:
        failures.append("X,T1,T2,T3 do not cover the region")
    seen = set()
    for p in parts + [split.x]:
        if p & seen:
            failures.append("pieces are not pairwise disjoint")
            break
        seen |= p
    for i, p in enumerate(parts):
        if len(p) * 3 > 2 * len(region) + 1e-9:
            failures.append(f"|T{i + 1}| exceeds 2/3 of the region")
        if bset and len(p & bset) * 3 > 2 * len(bset) + 1e-9:
            failures.append(f"|T{i + 1} ∩ boundary| exceeds 2/3 of boundary")
    if len(split.x) > 2 * budget.f_bound(len(region)) + _EPS:
        failures.append("|X| exceeds twice the separator budget")
    vert_part = {}
    for i, p in enumerate(parts):
        for v in p:
            vert_part[v] = i
    for u, v in zip(g.tails.tolist(), g.heads.tolist()):
        if u in vert_part and v in vert_part and u != v \
                and vert_part[u] != vert_part[v]:
            failures.append(f"edge ({u}, {v}) joins distinct pieces")
            break
    return SeparationReport(ok=not failures, failures=failures)
