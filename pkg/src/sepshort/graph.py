"""Directed multigraph with integer weights, DIMACS I/O, and corpus generators.

Vertex ids are dense 0..n-1.  Parallel edges and self-loops are allowed.
Distances use int64 with the sentinel INF for "unreachable"; construction
rejects inputs whose worst-case distance magnitude could not be carried
safely in int64.
"""

import re

import numpy as np

from .errors import DimacsError, GenerationError, OverflowGuardError

# +infinity sentinel.  INF + INF = 2^62 still fits int64, so masked adds
# (see wadd / madd) can never wrap.
INF: int = 1 << 61

# Largest admissible |edge weight|; documents the "integer edge lengths"
# encoding this artifact supports.
WEIGHT_CAP: int = 2**31 - 1

# Finite distances must stay strictly below this so INF remains larger
# than any real value even after one stray addition.
_SAFE_DIST: int = 1 << 59


def is_inf(x: int) -> bool:
    return x >= INF


def wadd(a: int, b: int) -> int:
    """Saturating addition: the sentinel absorbs."""
    if a >= INF or b >= INF:
        return INF
    return a + b


def wmin(a: int, b: int) -> int:
    return a if a <= b else b


def madd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise wadd for int64 arrays (broadcasting allowed)."""
    out = a + b
    np.copyto(out, INF, where=(a >= INF) | (b >= INF))
    return out


class DiGraph:
    """Immutable directed multigraph with integer edge weights.

    Edge arrays (`tails`, `heads`, `weights`) are read-only int64 numpy
    arrays indexed by edge id; adjacency indexes are built lazily and
    cached.  Safe for concurrent reads.
    """

    __slots__ = ("n", "tails", "heads", "weights", "_out", "_in", "_und")

    def __init__(self, n: int, tails, heads, weights):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        self.n = int(n)
        self.tails = np.ascontiguousarray(tails, dtype=np.int64)
        self.heads = np.ascontiguousarray(heads, dtype=np.int64)
        self.weights = np.ascontiguousarray(weights, dtype=np.int64)
        if not (len(self.tails) == len(self.heads) == len(self.weights)):
            raise ValueError("edge arrays must have equal length")
        if self.m:
            lo = min(self.tails.min(), self.heads.min())
            hi = max(self.tails.max(), self.heads.max())
            if lo < 0 or hi >= n:
                raise ValueError(f"edge endpoint out of range [0, {n})")
            wmax = int(np.abs(self.weights).max())
            if wmax > WEIGHT_CAP:
                raise OverflowGuardError(
                    f"|weight| {wmax} exceeds the supported cap {WEIGHT_CAP}")
            if n * (wmax + 1) >= _SAFE_DIST:
                raise OverflowGuardError(
                    "worst-case distance n*max|w| would not fit safely in int64")
        for a in (self.tails, self.heads, self.weights):
            a.flags.writeable = False
        self._out = None
        self._in = None
        self._und = None

    @classmethod
    def from_edges(cls, n: int, edges) -> "DiGraph":
        """Build from an iterable of (tail, head, weight) triples."""
        es = list(edges)
        if not es:
            return cls(n, np.empty(0, np.int64), np.empty(0, np.int64),
                       np.empty(0, np.int64))
        t, h, w = zip(*es)
        return cls(n, np.array(t), np.array(h), np.array(w))

    @property
    def m(self) -> int:
        return len(self.tails)

    @property
    def neg_magnitude(self) -> int:
        """|most negative weight|, 0 if all weights are nonnegative."""
        if self.m == 0:
            return 0
        lo = int(self.weights.min())
        return -lo if lo < 0 else 0

    @property
    def max_abs_weight(self) -> int:
        return int(np.abs(self.weights).max()) if self.m else 0

    def edge(self, i: int) -> tuple[int, int, int]:
        return int(self.tails[i]), int(self.heads[i]), int(self.weights[i])

    def edges(self):
        for i in range(self.m):
            yield self.edge(i)

    def out_csr(self):
        """(indptr, edge_order): edge ids grouped by tail, ascending."""
        if self._out is None:
            order = np.argsort(self.tails, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.tails, minlength=self.n), out=indptr[1:])
            self._out = (indptr, order)
        return self._out

    def in_csr(self):
        if self._in is None:
            order = np.argsort(self.heads, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.heads, minlength=self.n), out=indptr[1:])
            self._in = (indptr, order)
        return self._in

    def undirected_csr(self):
        """(indptr, neighbors): collapsed symmetric adjacency, no self-loops."""
        if self._und is None:
            mask = self.tails != self.heads
            a = np.concatenate([self.tails[mask], self.heads[mask]])
            b = np.concatenate([self.heads[mask], self.tails[mask]])
            if len(a):
                keys = a * self.n + b
                keys = np.unique(keys)
                a = keys // self.n
                b = keys % self.n
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(a.astype(np.int64), minlength=self.n),
                      out=indptr[1:])
            self._und = (indptr, b.astype(np.int64))
        return self._und

    def undirected_degree(self, v: int) -> int:
        indptr, _ = self.undirected_csr()
        return int(indptr[v + 1] - indptr[v])

    def __repr__(self):
        return f"DiGraph(n={self.n}, m={self.m})"


class VertexWeighting:
    """Nonnegative vertex weights with a cached total."""

    __slots__ = ("values", "total")

    def __init__(self, values):
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if self.values.size and self.values.min() < 0:
            raise ValueError("vertex weights must be nonnegative")
        self.total = float(self.values.sum())
        self.values.flags.writeable = False

    @classmethod
    def uniform(cls, n: int) -> "VertexWeighting":
        return cls(np.ones(n))

    @classmethod
    def indicator(cls, n: int, members) -> "VertexWeighting":
        v = np.zeros(n)
        idx = np.fromiter(members, dtype=np.int64, count=-1)
        if idx.size:
            v[idx] = 1.0
        return cls(v)

    def of(self, vertices) -> float:
        idx = np.fromiter(vertices, dtype=np.int64, count=-1)
        return float(self.values[idx].sum()) if idx.size else 0.0


# ---------------------------------------------------------------------------
# subgraph views


class Subgraph:
    """A local re-indexed subgraph plus maps back to the parent graph."""

    __slots__ = ("graph", "verts", "edge_ids")

    def __init__(self, graph: DiGraph, verts: np.ndarray, edge_ids: np.ndarray):
        self.graph = graph          # local ids 0..k-1
        self.verts = verts          # local vertex id -> parent vertex id (sorted)
        self.edge_ids = edge_ids    # local edge id -> parent edge id

    def to_local(self, parent_ids) -> np.ndarray:
        arr = np.asarray(parent_ids, dtype=np.int64)
        return np.searchsorted(self.verts, arr)

    def to_global(self, local_ids) -> np.ndarray:
        return self.verts[np.asarray(local_ids, dtype=np.int64)]


def edge_subgraph(g: DiGraph, edge_ids, extra_vertices=()) -> Subgraph:
    """Subgraph induced by a set of edges (plus optional isolated vertices)."""
    eids = np.asarray(edge_ids, dtype=np.int64)
    t, h, w = g.tails[eids], g.heads[eids], g.weights[eids]
    pool = [t, h]
    extra = np.fromiter(extra_vertices, dtype=np.int64, count=-1)
    if extra.size:
        pool.append(extra)
    verts = np.unique(np.concatenate(pool)) if (len(t) or extra.size) \
        else np.empty(0, np.int64)
    lt = np.searchsorted(verts, t)
    lh = np.searchsorted(verts, h)
    return Subgraph(DiGraph(len(verts), lt, lh, w), verts, eids)


def induced_subgraph(g: DiGraph, vertices) -> Subgraph:
    """Subgraph on a vertex set, keeping edges with both endpoints inside."""
    verts = np.unique(np.fromiter(vertices, dtype=np.int64, count=-1))
    keep = np.isin(g.tails, verts) & np.isin(g.heads, verts)
    eids = np.flatnonzero(keep)
    lt = np.searchsorted(verts, g.tails[eids])
    lh = np.searchsorted(verts, g.heads[eids])
    return Subgraph(DiGraph(len(verts), lt, lh, g.weights[eids]), verts, eids)


# ---------------------------------------------------------------------------
# DIMACS .gr I/O

_P_LINE = re.compile(r"^p\s+sp\s+(\d+)\s+(\d+)\s*$")
_A_LINE = re.compile(r"^a\s+(\d+)\s+(\d+)\s+(-?\d+)\s*$")


def load_dimacs(src) -> DiGraph:
    """Parse DIMACS shortest-path format (`p sp n m`, `a u v w`, `c ...`).

    Vertex ids are 1-based in the file and shifted to 0-based here.
    """
    if isinstance(src, bytes):
        src = src.decode("ascii")
    n = m = None
    tails, heads, weights = [], [], []
    for lineno, raw in enumerate(src.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n is not None:
                raise DimacsError("duplicate problem line", lineno)
            mo = _P_LINE.match(line)
            if not mo:
                raise DimacsError(f"malformed problem line {line!r}", lineno)
            n, m = int(mo.group(1)), int(mo.group(2))
        elif line.startswith("a"):
            if n is None:
                raise DimacsError("arc line before problem line", lineno)
            mo = _A_LINE.match(line)
            if not mo:
                raise DimacsError(f"malformed arc line {line!r}", lineno)
            u, v, w = int(mo.group(1)), int(mo.group(2)), int(mo.group(3))
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"endpoint out of range in {line!r}", lineno)
            if abs(w) > WEIGHT_CAP:
                raise DimacsError(f"weight magnitude over cap in {line!r}", lineno)
            tails.append(u - 1)
            heads.append(v - 1)
            weights.append(w)
        else:
            raise DimacsError(f"unrecognized line {line!r}", lineno)
    if n is None:
        raise DimacsError("missing problem line")
    if m != len(tails):
        raise DimacsError(f"problem line promised {m} arcs, found {len(tails)}")
    return DiGraph(n, np.array(tails, np.int64), np.array(heads, np.int64),
                   np.array(weights, np.int64))


def save_dimacs(g: DiGraph) -> str:
    """Serialize to DIMACS; load_dimacs(save_dimacs(g)) preserves everything."""
    out = [f"p sp {g.n} {g.m}"]
    for i in range(g.m):
        out.append(f"a {int(g.tails[i]) + 1} {int(g.heads[i]) + 1} "
                   f"{int(g.weights[i])}")
    return "\n".join(out) + "\n"


def underlying_undirected(g: DiGraph) -> DiGraph:
    """Symmetric closure with duplicates collapsed and self-loops dropped.

    Weights are structural (all 1): separator code only reads adjacency.
    """
    mask = g.tails != g.heads
    a = np.concatenate([g.tails[mask], g.heads[mask]])
    b = np.concatenate([g.heads[mask], g.tails[mask]])
    if len(a):
        keys = np.unique(a * g.n + b)
        a, b = keys // g.n, keys % g.n
    return DiGraph(g.n, a.astype(np.int64), b.astype(np.int64),
                   np.ones(len(a), np.int64))


# ---------------------------------------------------------------------------
# generators

_SPARSITY_CAP = 8.0  # every shipped generator keeps m/n below this


def _quick_negative_cycle_check(n, tails, heads, weights) -> bool:
    """True iff a negative cycle exists anywhere (super-source relaxation)."""
    dist = np.zeros(n, dtype=np.int64)  # super source wired to all with 0
    t = np.asarray(tails)
    h = np.asarray(heads)
    w = np.asarray(weights, dtype=np.int64)
    order = np.argsort(h, kind="stable")
    hs = h[order]
    starts = np.flatnonzero(np.diff(hs, prepend=-1))
    group_heads = hs[starts]
    for _ in range(n):
        cand = (dist[t] + w)[order]
        mins = np.minimum.reduceat(cand, starts)
        improved = mins < dist[group_heads]
        if not improved.any():
            return False
        dist[group_heads[improved]] = mins[improved]
    return True


class WeightRule:
    """Edge-weight rule: unit | const=K | uniform=LO..HI | negperturb=B,P.

    `negperturb` draws a base weight in [0, B] and shifts it by a vertex
    potential difference phi(u) - phi(v) with phi in [0, P]; cycle sums
    telescope to the base sums, so no negative cycle can arise.
    """

    def __init__(self, kind: str, lo: int = 0, hi: int = 0):
        self.kind = kind
        self.lo = lo
        self.hi = hi

    @classmethod
    def parse(cls, text: str) -> "WeightRule":
        if text == "unit":
            return cls("unit")
        if text.startswith("const="):
            return cls("const", lo=int(text[6:]))
        if text.startswith("uniform="):
            lo, _, hi = text[8:].partition("..")
            return cls("uniform", lo=int(lo), hi=int(hi))
        if text.startswith("negperturb="):
            body = text[11:]
            b, _, p = body.partition(",")
            base = int(b)
            pot = int(p) if p else max(1, base // 4)
            return cls("negperturb", lo=base, hi=pot)
        raise GenerationError(f"unknown weight rule {text!r}")

    def spec_string(self) -> str:
        if self.kind == "unit":
            return "unit"
        if self.kind == "const":
            return f"const={self.lo}"
        if self.kind == "uniform":
            return f"uniform={self.lo}..{self.hi}"
        return f"negperturb={self.lo},{self.hi}"

    def may_be_negative(self) -> bool:
        return (self.kind == "uniform" and self.lo < 0) or \
            (self.kind == "const" and self.lo < 0) or \
            (self.kind == "negperturb" and self.hi > 0)


def _apply_rule(rule: WeightRule, tails, heads, n, rng) -> np.ndarray:
    m = len(tails)
    if rule.kind == "unit":
        return np.ones(m, dtype=np.int64)
    if rule.kind == "const":
        return np.full(m, rule.lo, dtype=np.int64)
    if rule.kind == "uniform":
        return rng.integers(rule.lo, rule.hi + 1, size=m).astype(np.int64)
    # negperturb
    base = rng.integers(0, rule.lo + 1, size=m).astype(np.int64)
    phi = rng.integers(0, rule.hi + 1, size=n).astype(np.int64)
    return base + phi[np.asarray(tails)] - phi[np.asarray(heads)]


def _finish_graph(n, tails, heads, rule, rng, forbid_negative_cycles):
    tails = np.asarray(tails, dtype=np.int64)
    heads = np.asarray(heads, dtype=np.int64)
    weights = _apply_rule(rule, tails, heads, n, rng)
    if forbid_negative_cycles and rule.may_be_negative() and \
            rule.kind != "negperturb":
        if _quick_negative_cycle_check(n, tails, heads, weights):
            raise GenerationError(
                f"rule {rule.spec_string()} produced a negative cycle")
    g = DiGraph(n, tails, heads, weights)
    if n > 0 and g.m / max(1, n) > _SPARSITY_CAP:
        raise GenerationError("generated graph is denser than the shipped cap")
    return g


def gen_grid(rows: int, cols: int, rule="unit", seed: int = 0,
             forbid_negative_cycles: bool = False) -> DiGraph:
    """Bidirected rows x cols grid; each direction gets its own weight."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    if isinstance(rule, str):
        rule = WeightRule.parse(rule)
    rng = np.random.default_rng(seed)
    vid = np.arange(rows * cols).reshape(rows, cols)
    t, h = [], []
    right_a, right_b = vid[:, :-1].ravel(), vid[:, 1:].ravel()
    down_a, down_b = vid[:-1, :].ravel(), vid[1:, :].ravel()
    for a, b in ((right_a, right_b), (down_a, down_b)):
        t.append(a), h.append(b)
        t.append(b), h.append(a)
    tails = np.concatenate(t) if t else np.empty(0, np.int64)
    heads = np.concatenate(h) if h else np.empty(0, np.int64)
    return _finish_graph(rows * cols, tails, heads, rule, rng,
                         forbid_negative_cycles)


def gen_sparse(n: int, rule="unit", seed: int = 0, extra_per_vertex: float = 1.0,
               bandwidth: int = 8,
               forbid_negative_cycles: bool = False) -> DiGraph:
    """Random bandwidth-limited tree plus local chords, bidirected.

    All links join vertices at index distance <= bandwidth, so balanced
    separators of size <= bandwidth always exist.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(rule, str):
        rule = WeightRule.parse(rule)
    rng = np.random.default_rng(seed)
    und = set()
    for v in range(1, n):
        parent = int(rng.integers(max(0, v - bandwidth), v))
        und.add((parent, v))
    for _ in range(int(extra_per_vertex * n)):
        u = int(rng.integers(0, n))
        v = int(rng.integers(max(0, u - bandwidth), min(n, u + bandwidth + 1)))
        if u != v:
            und.add((min(u, v), max(u, v)))
    pairs = sorted(und)
    tails = [u for u, v in pairs] + [v for u, v in pairs]
    heads = [v for u, v in pairs] + [u for u, v in pairs]
    return _finish_graph(n, tails, heads, rule, rng, forbid_negative_cycles)


def parse_generator_spec(spec: str, seed: int = 0) -> DiGraph:
    """Build a corpus graph from a CLI-style string.

    Grammar: "grid:ROWSxCOLS:rule" or "sparse:N:rule" with rules
    unit | const=K | uniform=LO..HI | negperturb=B,P.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise GenerationError(f"bad generator spec {spec!r}")
    kind, size, rule = parts
    if kind == "grid":
        mo = re.fullmatch(r"(\d+)x(\d+)", size)
        if not mo:
            raise GenerationError(f"bad grid size {size!r}")
        return gen_grid(int(mo.group(1)), int(mo.group(2)), rule, seed=seed)
    if kind == "sparse":
        return gen_sparse(int(size), rule, seed=seed)
    raise GenerationError(f"unknown generator {kind!r}")
