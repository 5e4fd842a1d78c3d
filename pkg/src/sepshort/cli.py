"""Command-line surface: solve, divide, verify, gen, and bench.

Exit codes are part of the contract: 0 success, 1 I/O or usage error,
2 negative cycle (witness printed), 3 separator budget unmet,
4 verification failure.  Vertex ids on the wire are 1-based (DIMACS);
SEPSHORT_SEED fixes all randomness unless --seed is given.
"""

import argparse
import csv
import io
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from .deltasys import DeltaSystem, floyd_warshall, validate_delta
from .division import build_division, load_division_jsonl, save_division_jsonl, \
    verify_division
from .engines import bellman_ford
from .errors import BudgetUnmet, NegativeCycleError, SepshortError
from .graph import INF, DiGraph, load_dimacs, parse_generator_spec, save_dimacs
from .pipeline import Pipeline, PipelineConfig, choose_params, config_from_text
from .separators import parse_strategy_spec

EXIT_OK = 0
EXIT_IO = 1
EXIT_NEGCYCLE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4

CSV_SCHEMA_VERSION = "1"

CSV_FIELDS = ["version", "instance", "n", "m", "L", "gamma", "r", "engine",
              "t_total", "t_divide", "t_skeleton", "t_replace", "t_boundary",
              "t_regions", "t_audit", "relaxations", "merge_ops", "verdict"]


@dataclass
class BenchRecord:
    instance: str
    n: int
    m: int
    L: int
    gamma: float
    r: int
    engine: str
    t_total: float
    times: dict
    relaxations: int
    merge_ops: int
    verdict: str

    def row(self) -> list:
        return [CSV_SCHEMA_VERSION, self.instance, self.n, self.m, self.L,
                f"{self.gamma:.6f}", self.r, self.engine,
                f"{self.t_total:.6f}",
                f"{self.times.get('divide', 0.0):.6f}",
                f"{self.times.get('skeleton', 0.0):.6f}",
                f"{self.times.get('replace', 0.0):.6f}",
                f"{self.times.get('boundary', 0.0):.6f}",
                f"{self.times.get('regions', 0.0):.6f}",
                f"{self.times.get('audit', 0.0):.6f}",
                self.relaxations, self.merge_ops, self.verdict]


def _read_graph(path: str) -> DiGraph:
    with open(path, "r", encoding="ascii") as fh:
        return load_dimacs(fh.read())


def _config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = config_from_text(fh.read(), base=cfg)
    overrides = {}
    if getattr(args, "separator", None):
        strategy, budget = parse_strategy_spec(args.separator)
        overrides["division_strategy"] = strategy
        overrides["skeleton_strategy"] = strategy
        overrides["c_sep"] = budget.c_sep
        overrides["alpha"] = budget.alpha
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = args.gamma
    if getattr(args, "r", None) is not None:
        overrides["r_override"] = args.r
    if getattr(args, "engine", None) is not None:
        overrides["engine"] = args.engine
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return cfg.with_overrides(**overrides) if overrides else cfg


def _print_negative_cycle(err: NegativeCycleError, out):
    ids = " ".join(str(v + 1) for v in (err.vertices or []))
    weight = err.weight if err.weight is not None else "?"
    print(f"negative cycle (weight {weight}): {ids}", file=out)


def cmd_solve(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    g = _read_graph(args.input)
    source = args.source - 1
    if not (0 <= source < g.n):
        print(f"source {args.source} out of range", file=sys.stderr)
        return EXIT_IO
    cfg = _config_from_args(args)
    try:
        res = Pipeline(g, cfg).solve(source)
    except NegativeCycleError as err:
        _print_negative_cycle(err, out)
        return EXIT_NEGCYCLE
    except BudgetUnmet as err:
        print(f"separator budget unmet: {err}", file=sys.stderr)
        return EXIT_BUDGET
    for v in range(g.n):
        d = int(res.dist[v])
        print(f"v {v + 1} {'UNREACHABLE' if d >= INF else d}", file=out)
    if args.path is not None:
        target = args.path - 1
        if not res.reachable(target):
            print(f"p {args.path} UNREACHABLE", file=out)
        else:
            edges = res.path_to(target)
            verts = [source] + [int(g.heads[e]) for e in edges]
            print(f"p {args.path} " + " ".join(str(v + 1) for v in verts),
                  file=out)
    if args.oracle:
        want = bellman_ford(g, source)
        verdict = "exact-match" if np.array_equal(res.dist, want.dist) \
            else "mismatch"
        print(f"oracle {verdict}", file=out)
        if verdict != "exact-match":
            return EXIT_VERIFY
    return EXIT_OK


def cmd_divide(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    g = _read_graph(args.input)
    gamma = args.gamma if args.gamma is not None else PipelineConfig().gamma
    r = args.r if args.r is not None else choose_params(g.n)[1]
    seed = args.seed if args.seed is not None \
        else int(os.environ.get("SEPSHORT_SEED", "0"))
    try:
        d = build_division(g, r, gamma, seed=seed)
    except BudgetUnmet as err:
        print(f"separator budget unmet: {err}", file=sys.stderr)
        return EXIT_BUDGET
    text = save_division_jsonl(d, g.n, g.m)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    rep = verify_division(g, d)
    print(f"division: {len(d.regions)} regions, r={d.r}, "
          f"{'valid' if rep.ok else 'INVALID'}", file=out)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_verify(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    g = _read_graph(args.input)
    ok = True
    if args.division:
        with open(args.division, "r", encoding="utf-8") as fh:
            d = load_division_jsonl(fh.read())
        rep = verify_division(g, d)
        for f in rep.failures:
            print(f"division: {f}", file=out)
        print(f"division check: {'pass' if rep.ok else 'fail'}", file=out)
        ok &= rep.ok
    if args.full:
        if g.n > 2000:
            print("--full is limited to n <= 2000", file=sys.stderr)
            return EXIT_IO
        source = (args.source - 1) if args.source else 0
        cfg = _config_from_args(args)
        pipe = Pipeline(g, cfg)
        try:
            res = pipe.solve(source)
        except NegativeCycleError as err:
            _print_negative_cycle(err, out)
            return EXIT_NEGCYCLE
        oracle = floyd_warshall(g)
        exact = bool(np.array_equal(res.dist, oracle.dist[source]))
        print(f"distance oracle: {'pass' if exact else 'fail'}", file=out)
        ok &= exact
        delta_ok = True
        for sp in pipe.skeletons.values():
            for node in sp.nodes:
                if node.base:
                    continue
                pieces = [c.mat.restrict(c.boundary) for c in node.children]
                rep = validate_delta(DeltaSystem(pieces, node.core))
                delta_ok &= rep.ok
        print(f"delta systems: {'pass' if delta_ok else 'fail'}", file=out)
        ok &= delta_ok
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_gen(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    seed = args.seed if args.seed is not None \
        else int(os.environ.get("SEPSHORT_SEED", "0"))
    g = parse_generator_spec(args.spec, seed=seed)
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write(save_dimacs(g))
    print(f"wrote {args.out}: n={g.n} m={g.m} L={g.neg_magnitude}", file=out)
    return EXIT_OK


def run_bench_instance(spec: str, engine: str, seed: int,
                       source: int = 0) -> BenchRecord:
    g = parse_generator_spec(spec, seed=seed)
    cfg = PipelineConfig(engine=engine, seed=seed)
    gamma, r = choose_params(g.n, cfg)
    t0 = time.perf_counter()
    try:
        pipe = Pipeline(g, cfg)
        res = pipe.solve(source)
        t_total = time.perf_counter() - t0
        want = bellman_ford(g, source)
        verdict = "exact-match" if np.array_equal(res.dist, want.dist) \
            else "mismatch"
        times = dict(pipe.stats.times)
        relax = pipe.stats.relaxations
        merge_ops = pipe.stats.merge_ops
    except SepshortError:
        t_total = time.perf_counter() - t0
        verdict = "error"
        times, relax, merge_ops = {}, 0, 0
    return BenchRecord(instance=spec, n=g.n, m=g.m, L=g.neg_magnitude,
                       gamma=gamma, r=r, engine=engine, t_total=t_total,
                       times=times, relaxations=relax, merge_ops=merge_ops,
                       verdict=verdict)


def cmd_bench(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    if not os.path.exists(args.corpus):
        print(f"corpus file {args.corpus} not found", file=sys.stderr)
        return EXIT_IO
    with open(args.corpus, "r", encoding="utf-8") as fh:
        specs = [ln.strip() for ln in fh
                 if ln.strip() and not ln.strip().startswith("#")]
    engines = args.engines.split(",")
    seed = args.seed if args.seed is not None \
        else int(os.environ.get("SEPSHORT_SEED", "0"))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_FIELDS)
    all_exact = True
    for spec in specs:
        for engine in engines:
            rec = run_bench_instance(spec, engine, seed)
            writer.writerow(rec.row())
            all_exact &= rec.verdict == "exact-match"
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    if not all_exact:
        print("bench: some record is not exact-match", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sepshort",
        description="separator-based shortest paths with negative weights")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="single-source shortest paths")
    sp.add_argument("--input", required=True)
    sp.add_argument("--source", type=int, required=True,
                    help="source vertex (1-based)")
    sp.add_argument("--engine", choices=["bf", "scaling", "dijkstra"])
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--r", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config")
    sp.add_argument("--separator",
                    help='e.g. "strategy=bfs-level,c=4,alpha=0.667"')
    sp.add_argument("--oracle", action="store_true",
                    help="cross-check against Bellman-Ford")
    sp.add_argument("--path", type=int, help="also print a path (1-based)")
    sp.set_defaults(fn=cmd_solve)

    dp = sub.add_parser("divide", help="build and save an (r, s)-division")
    dp.add_argument("--input", required=True)
    dp.add_argument("--r", type=int)
    dp.add_argument("--gamma", type=float)
    dp.add_argument("--seed", type=int)
    dp.add_argument("--out", required=True)
    dp.set_defaults(fn=cmd_divide)

    vp = sub.add_parser("verify", help="run invariant checkers")
    vp.add_argument("--input", required=True)
    vp.add_argument("--division", help="division JSONL to check")
    vp.add_argument("--full", action="store_true",
                    help="small-instance end-to-end oracle check")
    vp.add_argument("--source", type=int)
    vp.add_argument("--engine", choices=["bf", "scaling", "dijkstra"])
    vp.add_argument("--seed", type=int)
    vp.add_argument("--config")
    vp.set_defaults(fn=cmd_verify)

    gp = sub.add_parser("gen", help="generate a corpus graph")
    gp.add_argument("spec", help="e.g. grid:40x40:negperturb=8,4")
    gp.add_argument("--out", required=True)
    gp.add_argument("--seed", type=int)
    gp.set_defaults(fn=cmd_gen)

    bp = sub.add_parser("bench", help="corpus sweep, CSV output")
    bp.add_argument("--corpus", required=True)
    bp.add_argument("--out")
    bp.add_argument("--engines", default="scaling")
    bp.add_argument("--seed", type=int)
    bp.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except SepshortError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
