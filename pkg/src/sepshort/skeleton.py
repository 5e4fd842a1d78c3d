"""Per-region skeletons: the boundary distance clique H and the hop-bounded
distance-preserving augmentation G_aug.

Recursion: a region small enough is solved by direct Floyd-Warshall (its
matrix covers *all* its vertices).  Otherwise a doubly balanced split
yields a separator X and up to three pieces; the children are T_i ∪ X with
boundary X ∪ (B ∩ T_i), their boundary matrices form a delta system with
core X, and the merge gives exact distances over X ∪ B.  H is the merged
matrix restricted to the region boundary.

G_aug collects the clique arcs of every node matrix (the full X ∪ B domain,
not only B: the X arcs are what caps shortest paths at O(depth) hops) plus
the original edges inside base nodes.  Every distance is then realized
within hop_budget(depth) = 2*depth + 2 edges; the proof sketch is: to reach
a matrix vertex takes depth+1 hops (one clique arc after entering the
matrix domain of a child), and an arbitrary pair routes entry -> one X arc
-> exit.
"""

from dataclasses import dataclass

import numpy as np

from .deltasys import DeltaSystem, DistMatrix, MergeOps, floyd_warshall, \
    merge_apsp, min_arc_matrices
from .division import Region
from .engines import bellman_ford, bellman_ford_bounded
from .errors import NegativeCycleError, UnreachableError
from .graph import INF, DiGraph, Subgraph, induced_subgraph
from .separators import SeparatorBudget, double_balanced_split


def hop_budget(depth: int, a: int = 2, b: int = 2) -> int:
    """Rounds of hop-limited Bellman-Ford that recover exact distances on a
    depth-`depth` augmentation (and leave one hop spare for a source arc)."""
    return a * depth + b


class RecursionNode:
    """One node of the skeleton recursion over region-local vertex ids."""

    __slots__ = ("verts", "boundary", "children", "core", "base", "depth",
                 "mat", "base_eids")

    def __init__(self, verts, boundary):
        self.verts = verts              # region-local, sorted
        self.boundary = boundary        # region-local, sorted
        self.children = []
        self.core = None                # separator X (region-local)
        self.base = False
        self.depth = 0
        self.mat = None                 # DistMatrix over X ∪ boundary | all
        self.base_eids = None           # base: min-arc edge ids (region-local)


@dataclass
class SkeletonStats:
    nodes: int = 0
    base_nodes: int = 0
    merge_ops: int = 0


class SkeletonPair:
    """H (exact boundary clique) plus the augmentation and its expansion
    tables for one region."""

    def __init__(self, region_id, sub, root, nodes, depth, hop_a, hop_b,
                 gamma, stats):
        self.region_id = region_id
        self.sub = sub                  # region local view of the parent graph
        self.root = root
        self.nodes = nodes              # preorder list
        self.depth = depth
        self.hop_a = hop_a
        self.hop_b = hop_b
        self.gamma = gamma
        self.stats = stats
        self.h = self._restrict_root()
        (self.aug_tails, self.aug_heads, self.aug_weights,
         self.aug_prov) = self._assemble_gaug()

    # -- construction ------------------------------------------------------

    def _restrict_root(self) -> DistMatrix:
        bnd = self.root.boundary
        if len(bnd) == 0:
            return DistMatrix(np.empty(0, np.int64),
                              np.empty((0, 0), np.int64))
        local = self.root.mat.restrict(bnd)
        return DistMatrix(self.sub.to_global(bnd), local.dist)

    def _assemble_gaug(self):
        tails, heads, weights = [], [], []
        prov = []  # (kind, a, b): kind 0 = region edge a; kind 1 = node a arc (i->b%): packed below
        for idx, node in enumerate(self.nodes):
            d = node.mat.dist
            k = node.mat.n
            if k:
                ii, jj = np.nonzero((d < INF) & ~np.eye(k, dtype=bool))
                tails.append(node.mat.verts[ii])
                heads.append(node.mat.verts[jj])
                weights.append(d[ii, jj])
                prov.append(np.stack([np.ones(len(ii), np.int64),
                                      np.full(len(ii), idx, np.int64),
                                      ii.astype(np.int64),
                                      jj.astype(np.int64)], axis=1))
            if node.base and node.base_eids is not None:
                eids = node.base_eids[node.base_eids >= 0]
                if len(eids):
                    lg = self.sub.graph
                    tails.append(lg.tails[eids])
                    heads.append(lg.heads[eids])
                    weights.append(lg.weights[eids])
                    prov.append(np.stack([np.zeros(len(eids), np.int64),
                                          eids, np.zeros(len(eids), np.int64),
                                          np.zeros(len(eids), np.int64)],
                                         axis=1))
        if not tails:
            e = np.empty(0, np.int64)
            return e, e, e, np.empty((0, 4), np.int64)
        t = np.concatenate(tails)
        h = np.concatenate(heads)
        w = np.concatenate(weights)
        p = np.concatenate(prov)
        # per-pair minimum: ties prefer original edges, then first node
        n = self.sub.graph.n
        key = t * n + h
        order = np.lexsort((np.arange(len(t)), p[:, 0], w, key))
        first = np.flatnonzero(np.diff(key[order], prepend=-1))
        keep = order[first]
        return t[keep], h[keep], w[keep], p[keep]

    # -- views -------------------------------------------------------------

    def gaug_graph(self) -> DiGraph:
        return DiGraph(self.sub.graph.n, self.aug_tails, self.aug_heads,
                       self.aug_weights)

    def aug_edge_count(self) -> int:
        return len(self.aug_tails)

    def edge_budget_bound(self, c_aug: float) -> float:
        r = max(2, self.sub.graph.n)
        return c_aug * r ** ((4 - 2 * self.gamma) / 3) * max(1.0, np.log(r))

    # -- expansion ---------------------------------------------------------

    def _expand_mat_arc(self, node: RecursionNode, i: int, j: int) -> list:
        """Region-local edge ids realizing node.mat.dist[i, j]."""
        if i == j:
            return []
        d = node.mat.dist
        if d[i, j] >= INF:
            raise UnreachableError("expanding an infinite arc")
        hops = []
        cur = j
        guard = 0
        while cur != i:
            p = int(node.mat.pred[i, cur])
            assert p >= 0, "broken predecessor in skeleton matrix"
            piece = -1 if node.mat.arc_piece is None \
                else int(node.mat.arc_piece[i, cur])
            hops.append((p, cur, piece))
            cur = p
            guard += 1
            assert guard <= node.mat.n, "skeleton predecessor walk cycles"
        hops.reverse()
        out = []
        for p, c, piece in hops:
            if node.base:
                eid = int(node.base_eids[p, c])
                assert eid >= 0, "base hop without a backing edge"
                out.append(eid)
            else:
                assert piece >= 0, "merged hop without a piece tag"
                child = node.children[piece]
                gu = int(node.mat.verts[p])
                gv = int(node.mat.verts[c])
                ci, cj = child.mat.positions([gu, gv])
                out.extend(self._expand_mat_arc(child, int(ci), int(cj)))
        return out

    def expand_h_arc(self, u_global: int, v_global: int) -> list:
        """Global edge ids realizing the H arc (u, v); exact length."""
        lu, lv = self.sub.to_local([u_global, v_global])
        i, j = self.root.mat.positions([int(lu), int(lv)])
        local = self._expand_mat_arc(self.root, int(i), int(j))
        return [int(self.sub.edge_ids[e]) for e in local]

    def expand_aug_edge(self, aug_idx: int) -> list:
        """Region-local edge ids realizing one augmentation arc."""
        kind, a, i, j = (int(x) for x in self.aug_prov[aug_idx])
        if kind == 0:
            return [a]
        return self._expand_mat_arc(self.nodes[a], i, j)


def _base_node(node, lg, verts, stats):
    node.base = True
    stats.base_nodes += 1
    sub = induced_subgraph(lg, verts)
    mat = floyd_warshall(sub.graph)  # NegativeCycle propagates
    _, emat = min_arc_matrices(sub.graph)
    region_eids = np.full(emat.shape, -1, np.int64)
    backed = emat >= 0
    if backed.any():
        region_eids[backed] = sub.edge_ids[emat[backed]]
    node.mat = DistMatrix(sub.verts, mat.dist, mat.pred)
    node.base_eids = region_eids
    node.depth = 0
    return node


def _build_node(lg: DiGraph, verts, boundary, base_cap, budget, strategy,
                seed, stats: SkeletonStats) -> RecursionNode:
    node = RecursionNode(verts, boundary)
    stats.nodes += 1
    nv = len(verts)
    if nv <= base_cap:
        return _base_node(node, lg, verts, stats)

    split = double_balanced_split(lg, verts, boundary, budget, strategy, seed)
    bset = set(int(v) for v in boundary)
    x = sorted(split.x)
    pieces_v = [p for p in split.pieces() if p]
    child_vert_sets = [sorted(set(map(int, t)) | set(x)) for t in pieces_v]
    if not pieces_v or any(len(cv) >= nv for cv in child_vert_sets):
        # a legal separation that cannot shrink the node (e.g. a clique);
        # solve the node directly instead of failing
        return _base_node(node, lg, verts, stats)
    children = []
    for t_i, cv in zip(pieces_v, child_vert_sets):
        child_verts = np.array(cv, np.int64)
        child_boundary = np.array(
            sorted(set(x) | (bset & set(map(int, t_i)))), np.int64)
        children.append(_build_node(lg, child_verts, child_boundary,
                                    base_cap, budget, strategy, seed, stats))
    node.children = children
    node.core = np.array(x, np.int64)
    pieces = []
    for child in children:
        piece = child.mat.restrict(child.boundary)
        pieces.append(piece)
    ops = MergeOps()
    node.mat = merge_apsp(DeltaSystem(pieces, node.core), ops=ops)
    stats.merge_ops += ops.inner_ops
    node.depth = 1 + max(c.depth for c in children)
    return node


def build_skeleton(g: DiGraph, region: Region, gamma: float = 0.5,
                   base_cap: int = 32, c_sep: float = 4.0,
                   alpha: float = 2 / 3, strategy: str = "bfs-level",
                   seed: int = 0, hop_a: int = 2, hop_b: int = 2,
                   ) -> SkeletonPair:
    """Build the (H, G_aug) pair for one region of a division.

    The split budget exponent is fixed at 1/2 (the small-separator regime);
    gamma only enters the reported edge-budget bound.  NegativeCycle is
    re-derived on the region's own edges so the witness is real.
    """
    if base_cap < 2:
        raise ValueError("base_cap must be >= 2")
    sub = region.local(g)
    lg = sub.graph
    boundary_global = sorted(region.boundary | region.forced)
    boundary_local = np.sort(sub.to_local(boundary_global)) \
        if boundary_global else np.empty(0, np.int64)
    budget = SeparatorBudget(c_sep=c_sep, e_sep=0.5, alpha=alpha)
    stats = SkeletonStats()
    try:
        root = _build_node(lg, np.arange(lg.n, dtype=np.int64),
                           boundary_local, base_cap, budget, strategy, seed,
                           stats)
    except NegativeCycleError:
        _raise_regional_cycle(g, sub)
        raise
    nodes = []
    stack = [root]
    while stack:
        nd = stack.pop()
        nodes.append(nd)
        stack.extend(reversed(nd.children))
    return SkeletonPair(region.id, sub, root, nodes, root.depth, hop_a,
                        hop_b, gamma, stats)


def _raise_regional_cycle(g: DiGraph, sub: Subgraph):
    """Convert an in-region negative cycle into a global-edge witness."""
    lg = sub.graph
    n = lg.n
    tails = np.concatenate([lg.tails, np.full(n, n, np.int64)])
    heads = np.concatenate([lg.heads, np.arange(n, dtype=np.int64)])
    weights = np.concatenate([lg.weights, np.zeros(n, np.int64)])
    try:
        bellman_ford(DiGraph(n + 1, tails, heads, weights), n)
    except NegativeCycleError as err:
        raise NegativeCycleError(
            "negative cycle inside a region",
            vertices=[int(sub.verts[v]) for v in err.vertices],
            edges=[int(sub.edge_ids[e]) for e in err.edges],
            weight=err.weight) from None
    raise AssertionError("skeleton saw a negative cycle Bellman-Ford denies")


def dump_tree(sp: SkeletonPair) -> str:
    """Indented text rendering of the recursion tree (debugging aid)."""
    lines = []

    def walk(node, depth):
        kind = "base" if node.base else f"split |X|={len(node.core)}"
        lines.append("  " * depth +
                     f"{kind}: {len(node.verts)} vertices, "
                     f"{len(node.boundary)} boundary, depth {node.depth}")
        for child in node.children:
            walk(child, depth + 1)

    walk(sp.root, 0)
    return "\n".join(lines) + "\n"


def expand_path(sp: SkeletonPair, u_global: int, v_global: int) -> list:
    """Global edge ids of a shortest in-region u -> v path.

    Works for any pair of region vertices: pairs inside the root matrix
    expand directly; others run hop-limited Bellman-Ford over G_aug and
    expand each augmentation arc.  Raises Unreachable when the distance is
    infinite.
    """
    lu, lv = (int(x) for x in sp.sub.to_local([u_global, v_global]))
    root_verts = set(sp.root.mat.verts.tolist())
    if lu in root_verts and lv in root_verts:
        i, j = sp.root.mat.positions([lu, lv])
        local = sp._expand_mat_arc(sp.root, int(i), int(j))
    else:
        res = bellman_ford_bounded(sp.gaug_graph(), lu,
                                   hop_budget(sp.depth, sp.hop_a, sp.hop_b))
        if not res.reachable(lv):
            raise UnreachableError(
                f"no path from {u_global} to {v_global} inside the region")
        local = []
        for aug_e in res.path_to(lv):
            local.extend(sp.expand_aug_edge(aug_e))
    return [int(sp.sub.edge_ids[e]) for e in local]
