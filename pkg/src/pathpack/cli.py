"""``pathpack`` command line: generate, solve, bench, validate, export-pcd.

Exit status is 0 on success, 1 for bad input (unreadable or malformed files,
bad parameters, an infeasible solution file) and 2 when an internal
consistency check fails.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import ah, dense
from .baselines import EXACT_MAX_NODES
from .errors import InputError, InvariantError
from .feasibility import format_paths, parse_paths, path_value, validate_path_collection
from .graph import generate_random, load_snap, read_roots, write_roots, write_snap
from .harness import ALGORITHMS, ExperimentSpec, bench, solve
from .params import InstanceParams
from .pcd import export_pcd

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _load_graph(args):
    text = _read_text(args.edges)
    if args.roots is not None:
        try:
            roots = read_roots(_read_text(args.roots))
        except InputError as exc:
            raise InputError(f"{args.roots}: {exc}") from None
        return load_snap(text, roots=roots)
    if args.root_fraction is not None:
        return load_snap(text, root_fraction=args.root_fraction, seed=args.seed)
    raise InputError("give --roots FILE or --root-fraction F")


def _add_instance(p):
    p.add_argument("--edges", required=True, help="SNAP edge list (src dst per line)")
    p.add_argument("--roots", help="root ids, one per line (original ids)")
    p.add_argument("--root-fraction", type=float, help="draw this fraction of ids as roots")


def _add_params(p):
    d = InstanceParams()
    p.add_argument("--K", type=int, default=d.K, help="max path length in nodes")
    p.add_argument("--beta", type=float, default=d.beta)
    p.add_argument("--T", type=int, default=d.T, help="max BP sweeps")
    p.add_argument("--bp-orders", type=int, default=d.bp_orders)
    p.add_argument("--greedy-orders", type=int, default=d.greedy_orders)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--time-limit", type=float, default=None, help="BP wall-clock limit (s)")
    p.add_argument("--normalize", action="store_true",
                   help="shift BP messages after each sweep to keep them bounded")
    p.add_argument("--exact-max-nodes", type=int, default=EXACT_MAX_NODES,
                   help="size guard for the exact solver")


def _params(args) -> InstanceParams:
    return InstanceParams(K=args.K, beta=args.beta, T=args.T, bp_orders=args.bp_orders,
                          greedy_orders=args.greedy_orders, seed=args.seed,
                          time_limit=args.time_limit)


def cmd_generate(args) -> int:
    g = generate_random(args.n, args.root_fraction, args.c, args.seed)
    prefix = Path(args.out)
    edges, roots = prefix.with_suffix(".edges"), prefix.with_suffix(".roots")
    buf = io.StringIO()
    write_snap(g, buf, header=f"random instance n={args.n} root_fraction={args.root_fraction} "
                              f"c={args.c} seed={args.seed}\nkept {g.n} nodes, {g.num_edges} edges")
    _write_text(edges, buf.getvalue())
    buf = io.StringIO()
    write_roots(g, buf)
    _write_text(roots, buf.getvalue())
    print(f"wrote {edges} and {roots}: {g.n} nodes, {len(g.roots)} roots, {g.num_edges} edges")
    return EXIT_OK


def _check_dense(g, params: InstanceParams):
    """Compare compact and dense messages sweep by sweep (debugging aid)."""
    st = ah.init_ah(g, params.K, dtype=np.longdouble)
    tbl = ah.ah_to_dense(st)
    worst = 0.0
    for _ in range(min(params.T, 10)):
        st = ah.iterate_ah(st, params.beta)
        tbl = dense.iterate_dense(tbl, params.beta)
        worst = max(worst, dense.table_discrepancy(ah.ah_to_dense(st), tbl))
    if worst > 1e-9:
        raise InvariantError(f"compact and dense messages differ by {worst:g}")
    print(f"dense check passed (max discrepancy {worst:.3g})", file=sys.stderr)


def cmd_solve(args) -> int:
    g = _load_graph(args)
    params = _params(args)
    if args.check_dense:
        _check_dense(g, params)
    paths, rec = solve(g, args.algorithm, params, normalized=args.normalize,
                      exact_max_nodes=args.exact_max_nodes)
    text = format_paths(paths, g.labels)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    record = {"graph": {"n": g.n, "roots": len(g.roots), "edges": g.num_edges},
              "params": params.to_dict(), **rec.to_dict()}
    record_text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.record:
        _write_text(args.record, record_text)
    print(f"{args.algorithm}: value {rec.value} in {rec.wall_time:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = ExperimentSpec(n=args.n, root_fraction=args.root_fraction, c=args.c, K=args.K,
                          samples=args.samples, algorithms=tuple(args.algorithms.split(",")),
                          seed=args.seed, beta=args.beta, T=args.T, bp_orders=args.bp_orders,
                          greedy_orders=args.greedy_orders, time_limit=args.time_limit,
                          normalized=args.normalize, exact_max_nodes=args.exact_max_nodes)

    def progress(sample, rows):
        vals = ", ".join(f"{r['algorithm']}={r['value']}" for r, _ in rows)
        print(f"sample {sample}: {vals}", file=sys.stderr)

    res = bench(spec, jobs=args.jobs, progress=None if args.quiet else progress)
    written = res.write(args.out)
    times = res.timing_summary()
    for alg, s in res.summary().items():
        mean = "n/a" if s["mean_value"] is None else f"{s['mean_value']:.2f}"
        t = "n/a" if times[alg] is None else f"{times[alg]:.3f}s"
        print(f"{alg:7s} mean value {mean}  mean time {t}  ({s['samples']} ok, {s['failed']} failed)")
    print(f"wrote {', '.join(str(p) for p in written.values())}")
    return EXIT_OK


def cmd_validate(args) -> int:
    g = _load_graph(args)
    raw = parse_paths(_read_text(args.solution))
    paths = [tuple(g.index_of(v) for v in p) for p in raw]
    bad = validate_path_collection(paths, g, args.K)
    if bad is not None:
        print(f"infeasible: {bad}")
        return EXIT_INPUT
    print(f"ok: {len(paths)} paths, value {path_value(paths)}")
    return EXIT_OK


def cmd_export_pcd(args) -> int:
    g = _load_graph(args)
    text = export_pcd(g, args.K)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; argparse's own status 2 is reserved here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pathpack", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--root-fraction", type=float, default=0.2)
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.edges, PREFIX.roots")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve one instance")
    _add_instance(p)
    _add_params(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="bp")
    p.add_argument("--out", help="solution file (default: stdout)")
    p.add_argument("--record", help="write a JSON run record here")
    p.add_argument("--check-dense", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a seeded grid of random samples")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--root-fraction", type=float, default=0.2)
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=30)
    p.add_argument("--algorithms", default="bp,greedy", help="comma-separated subset of "
                   + ",".join(ALGORITHMS))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    _add_params(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check a solution file")
    _add_instance(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--K", type=int, default=InstanceParams().K)
    p.add_argument("--seed", type=int, default=0, help="seed for --root-fraction")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export-pcd", help="write the integer program in LP format")
    _add_instance(p)
    p.add_argument("--K", type=int, default=InstanceParams().K)
    p.add_argument("--seed", type=int, default=0, help="seed for --root-fraction")
    p.add_argument("--out", help="LP file (default: stdout)")
    p.set_defaults(func=cmd_export_pcd)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
