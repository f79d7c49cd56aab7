"""``polyflow`` command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 invariant failure,
3 capability error.  ``POLYFLOW_TOL`` overrides the default tolerance.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ..exceptions import CapabilityError, InputError, InvariantError
from ..offline import lp_opt_fractional, oswm_opt
from ..online import SapInstance, solve_fractional, solve_small_bids
from ..online.fractional import TRACE_FIELDS
from ..ranking import OswmInstance, monte_carlo_ratio
from ..submodular import from_spec, verify_submodular
from ..waterlevels import (
    thresholded_levels,
    verify_sua_kkt,
    water_levels_alg1,
    water_levels_alg2,
    water_levels_brute,
)
from . import bench as bench_mod
from .generators import FAMILIES, generate, parse_graph
from .io import dumps, read_instance, read_json, write_csv, write_json

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_CAPABILITY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(doc, out: str | None) -> None:
    if out:
        write_json(out, doc)
    else:
        sys.stdout.write(dumps(doc))


def _parse_vector(text: str) -> np.ndarray:
    path = Path(text)
    if path.exists():
        doc = read_json(path)
        if isinstance(doc, dict):
            doc = doc.get("loads", doc.get("x"))
    else:
        try:
            doc = [float(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise InputError(f"cannot parse vector {text!r}") from None
    try:
        return np.asarray(doc, dtype=float)
    except (TypeError, ValueError):
        raise InputError("vector must be a list of numbers") from None


def _load_oracle_doc(path: str):
    """An instance file or a bare oracle spec; returns (oracle, SapInstance or None)."""
    doc = read_json(path)
    if isinstance(doc, dict) and "kind" in doc:
        return from_spec(doc), None
    inst = read_instance(path)
    if not isinstance(inst, SapInstance):
        raise InputError("water levels need a SAP instance or an oracle spec")
    return inst.oracle, inst


def cmd_gen(args) -> int:
    params = {k: v for k, v in vars(args).items()
              if k in ("n", "depth", "bidders", "seed", "delta", "agents", "items", "weighted", "budget_unit")
              and v is not None}
    if args.family == "matroid-coloring":
        if args.graph is None:
            raise InputError("matroid-coloring needs --graph, e.g. 0-1,1-2,0-2")
        V, edges = parse_graph(args.graph)
        params["graph"] = [list(e) for e in edges]
        params["vertices"] = args.vertices or V
    inst = generate(args.family, **params)
    _emit(inst.to_dict(), args.out)
    return EXIT_OK


def cmd_waterlevels(args) -> int:
    f, inst = _load_oracle_doc(args.instance)
    x = _parse_vector(args.loads)
    if x.shape != (f.n,):
        raise InputError(f"loads must have length {f.n}")
    if args.thresholded:
        if inst is None:
            raise InputError("--thresholded needs a SAP instance with values and costs")
        tl = thresholded_levels(f, x, inst.costs, inst.values)
        _emit({"thresholds": [float(t) for t in tl.thresholds],
               "levels": [[float(v) for v in row] for row in tl.levels]}, args.out)
        return EXIT_OK
    load = x if inst is None else inst.costs * x
    methods = ["alg1", "alg2", "brute"] if args.method == "all" else [args.method]
    out, ws = {}, {}
    for m in methods:
        if m == "brute":
            ws[m] = water_levels_brute(f, load)
            out[m] = {"w": [float(v) for v in ws[m]]}
            continue
        dec = (water_levels_alg1 if m == "alg1" else water_levels_alg2)(f, load)
        ws[m] = dec.w
        out[m] = dec.to_dict()
        out[m]["kkt"] = verify_sua_kkt(f, load, dec).to_dict()
    gap = max((float(np.max(np.abs(ws[a] - ws[b]), initial=0.0)) for a in ws for b in ws), default=0.0)
    doc = out[methods[0]] if len(methods) == 1 else {"methods": out, "max_gap": gap}
    _emit(doc, args.out)
    failed_kkt = [m for m in out if "kkt" in out[m] and not out[m]["kkt"]["passed"]]
    if gap > 1e-7 or failed_kkt:
        raise InvariantError(f"water-level check failed (gap {gap:.3g}, kkt failures {failed_kkt})")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    if not isinstance(inst, SapInstance):
        raise InputError("solve needs a SAP instance; use 'ranking' for OSWM instances")
    if args.mode == "small-bids":
        alloc, cert, rep = solve_small_bids(inst, args.eps)
    else:
        alloc, cert, rep = solve_fractional(inst, step=args.step, mode=args.mode, trace=bool(args.trace))
    if args.trace:
        write_csv(args.trace, rep.trace, list(TRACE_FIELDS) + ["alt"])
    _emit({"allocation": alloc.to_dict(), "certificate": cert.to_dict(), "report": rep.to_dict()}, args.out)
    return EXIT_OK


def cmd_ranking(args) -> int:
    inst = read_instance(args.instance)
    if not isinstance(inst, OswmInstance):
        raise InputError("ranking needs an OSWM instance")
    mc = monte_carlo_ratio(inst, args.trials, seed=args.seed, opt=args.opt)
    if args.dump_runs:
        write_csv(args.dump_runs, mc.rows, ["trial", "seed_hash", "welfare", "opt", "ratio"])
    _emit({"mean_ratio": mc.mean, "stderr": mc.stderr, "opt": mc.opt, "trials": args.trials,
           "seed": args.seed}, args.out)
    return EXIT_OK


def cmd_offline(args) -> int:
    inst = read_instance(args.instance)
    if isinstance(inst, OswmInstance):
        best = oswm_opt(inst)
        doc = {"opt": best.welfare, "assignment": best.assignment, "backend": "search"}
    else:
        doc = lp_opt_fractional(inst, backend=args.backend).to_dict()
    _emit(doc, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    suite = bench_mod.load_suite(args.suite)
    solvers = [s for s in args.solvers.split(",") if s] if args.solvers else None
    rows = bench_mod.run_suite(suite, solvers, jobs=args.jobs)
    failures = bench_mod.check_thresholds(rows, suite.get("thresholds", []))
    out = Path(args.out)
    json_path = out.with_suffix(".json") if out.suffix == ".csv" else out
    csv_path = out.with_suffix(".csv")
    write_json(json_path, {"rows": rows, "failures": failures})
    write_csv(csv_path, bench_mod.csv_rows(rows), bench_mod.COLUMNS)
    for row in rows:
        print(f"{row['instance']:<24} {row['solver']:<11} ratio={row['ratio']:.6f}")
    if failures:
        for fail in failures:
            print(f"threshold failed: {fail}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_verify(args) -> int:
    from ..audit import run_audit

    ok = True
    if args.instance:
        inst = read_instance(args.instance)
        oracles = [inst.oracle] if isinstance(inst, SapInstance) else list(inst.oracles)
        for k, o in enumerate(oracles):
            mode = "exhaustive" if o.n <= 14 else "sampled"
            rep = verify_submodular(o, mode)
            print(f"oracle {k}: submodular {'PASS' if rep.passed else 'FAIL'} ({rep.mode}, {rep.checked} checks)")
            ok &= rep.passed
    if not args.skip_audit:
        only = [s.strip().upper() for s in args.only.split(",")] if args.only else None
        results = run_audit("full" if args.full else "quick", only=only,
                            progress=lambda r: print(r.line(), flush=True))
        ok &= all(r.passed for r in results)
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyflow", description="Online submodular assignment toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--n", type=int)
    g.add_argument("--depth", type=int)
    g.add_argument("--bidders", type=int)
    g.add_argument("--budget-unit", dest="budget_unit", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--graph", help="edge list such as 0-1,1-2,0-2")
    g.add_argument("--vertices", type=int)
    g.add_argument("--delta", type=int)
    g.add_argument("--agents", type=int)
    g.add_argument("--items", type=int)
    g.add_argument("--weighted", action="store_true", default=None)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    w = sub.add_parser("waterlevels", help="water levels of a load vector")
    w.add_argument("--instance", required=True, help="SAP instance or oracle spec JSON")
    w.add_argument("--loads", required=True, help="comma list or JSON file")
    w.add_argument("--method", choices=["alg1", "alg2", "brute", "all"], default="alg1")
    w.add_argument("--thresholded", action="store_true")
    w.add_argument("--out")
    w.set_defaults(func=cmd_waterlevels)

    s = sub.add_parser("solve", help="run an online solver")
    s.add_argument("--instance", required=True)
    s.add_argument("--mode", choices=["frac", "mi", "small-bids"], default="frac")
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--trace", help="CSV path for the per-step trace")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("ranking", help="Monte Carlo ratio of matroidal ranking")
    r.add_argument("--instance", required=True)
    r.add_argument("--trials", type=int, default=2000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--opt", type=float)
    r.add_argument("--dump-runs", dest="dump_runs")
    r.add_argument("--out")
    r.set_defaults(func=cmd_ranking)

    o = sub.add_parser("offline", help="offline optimum")
    o.add_argument("--instance", required=True)
    o.add_argument("--backend", choices=["auto", "exhaustive", "cutting-plane"], default="auto")
    o.add_argument("--out")
    o.set_defaults(func=cmd_offline)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True)
    b.add_argument("--solvers", help="comma list overriding the manifest")
    b.add_argument("--out", required=True, help="report path; JSON and CSV are both written")
    b.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--full", action="store_true", help="acceptance-sized runs instead of the quick profile")
    v.add_argument("--only", help="comma list of criteria, e.g. A2,A4")
    v.add_argument("--instance", help="also check the oracle(s) of this instance")
    v.add_argument("--skip-audit", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (None, 0) else EXIT_USAGE
    raw = os.environ.get("POLYFLOW_TOL")
    if raw is not None:
        try:
            ok = float(raw) > 0
        except ValueError:
            ok = False
        if not ok:
            print(f"polyflow: POLYFLOW_TOL must be a positive number, got {raw!r}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except InputError as exc:
        print(f"polyflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"polyflow: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CapabilityError as exc:
        print(f"polyflow: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY


if __name__ == "__main__":
    sys.exit(main())
