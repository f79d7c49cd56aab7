"""Benchmark suites: run solvers over instances and collect report rows.

Suite manifest::

    {"instances": [{"id": "ut-5", "gen": {"family": "upper-triangular", "n": 5}},
                   {"id": "mine", "file": "inst.json"}],
     "solvers": ["frac"],
     "params": {"step": 0.001, "eps": 0.05, "trials": 2000, "seed": 0},
     "thresholds": [{"solver": "frac", "metric": "ratio", "min": 0.6221, "primary": true}]}

``file`` paths are resolved relative to the manifest.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..exceptions import InputError
from ..offline import lp_opt_fractional, oswm_opt
from ..online import SapInstance, solve_fractional, solve_small_bids
from ..ranking import OswmInstance, monte_carlo_ratio
from .generators import generate
from .io import read_instance

SAP_SOLVERS = ("frac", "mi", "small-bids")
OSWM_SOLVERS = ("ranking",)
COLUMNS = ["instance", "solver", "params", "primal", "opt", "ratio", "certified_ratio", "wall_time"]


def load_suite(path) -> dict:
    from .io import read_json

    doc = read_json(path)
    if not isinstance(doc, dict):
        raise InputError("suite manifest must be a JSON object")
    doc.setdefault("instances", [])
    doc["_root"] = str(Path(path).resolve().parent)
    return doc


def _materialize(entry: dict, root: str):
    if "gen" in entry:
        params = dict(entry["gen"])
        family = params.pop("family", None)
        if family is None:
            raise InputError(f"instance {entry.get('id')!r}: gen block needs a family")
        return generate(family, **params)
    if "file" in entry:
        path = Path(entry["file"])
        return read_instance(path if path.is_absolute() else Path(root) / path)
    raise InputError(f"instance {entry.get('id')!r} needs 'gen' or 'file'")


def _run_one(inst, solver: str, params: dict) -> dict:
    start = time.perf_counter()
    if isinstance(inst, OswmInstance):
        if solver not in OSWM_SOLVERS:
            raise InputError(f"solver {solver!r} does not apply to OSWM instances")
        trials = int(params.get("trials", 2000))
        seed = int(params.get("seed", 0))
        opt = oswm_opt(inst).welfare
        mc = monte_carlo_ratio(inst, trials, seed=seed, opt=opt)
        primal = mc.mean * opt
        used = {"trials": trials, "seed": seed}
        certified = None
    else:
        if solver not in SAP_SOLVERS:
            raise InputError(f"solver {solver!r} does not apply to SAP instances")
        opt = lp_opt_fractional(inst).objective
        if solver == "small-bids":
            eps = float(params.get("eps", 0.05))
            _, _, rep = solve_small_bids(inst, eps)
            used = {"eps": eps}
        else:
            step = float(params.get("step", 1e-3))
            _, _, rep = solve_fractional(inst, step=step, mode=solver)
            used = {"step": step}
        primal = rep.primal
        certified = rep.certified_ratio
    ratio = primal / opt if opt > 0 else 1.0
    return {"solver": solver, "params": used, "primal": primal, "opt": opt, "ratio": ratio,
            "certified_ratio": certified, "wall_time": time.perf_counter() - start}


def _applicable(inst, solvers):
    kinds = OSWM_SOLVERS if isinstance(inst, OswmInstance) else SAP_SOLVERS
    return [s for s in solvers if s in kinds]


def run_suite(suite: dict, solvers=None, jobs: int = 1) -> list[dict]:
    """Rows sorted by (instance id, solver) regardless of completion order."""
    solvers = list(solvers or suite.get("solvers") or ["frac", "ranking"])
    for s in solvers:
        if s not in SAP_SOLVERS + OSWM_SOLVERS:
            raise InputError(f"unknown solver {s!r}")
    params = suite.get("params", {})
    root = suite.get("_root", ".")
    tasks = []
    seen = set()
    for k, entry in enumerate(suite["instances"]):
        iid = str(entry.get("id", f"instance-{k}"))
        if iid in seen:
            raise InputError(f"duplicate instance id {iid!r}")
        seen.add(iid)
        inst = _materialize(entry, root)
        if not isinstance(inst, (SapInstance, OswmInstance)):
            raise InputError(f"instance {iid!r} is not a SAP or OSWM instance")
        local = {**params, **entry.get("params", {})}
        for s in _applicable(inst, entry.get("solvers", solvers)):
            tasks.append((iid, inst, s, local))

    def work(task):
        iid, inst, s, local = task
        return {"instance": iid, **_run_one(inst, s, local)}

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, tasks))
    else:
        rows = [work(t) for t in tasks]
    rows.sort(key=lambda r: (r["instance"], r["solver"]))
    return rows


def check_thresholds(rows: list[dict], thresholds: list[dict]) -> list[dict]:
    """Failed primary thresholds, one dict per offending row."""
    failures = []
    for th in thresholds or []:
        if not th.get("primary", True):
            continue
        metric = th.get("metric", "ratio")
        for row in rows:
            if th.get("solver") not in (None, row["solver"]):
                continue
            if th.get("instance") not in (None, row["instance"]):
                continue
            val = row.get(metric)
            if val is None:
                continue
            if ("min" in th and val < th["min"]) or ("max" in th and val > th["max"]):
                failures.append({"instance": row["instance"], "solver": row["solver"], "metric": metric,
                                 "value": val, "threshold": {k: th[k] for k in ("min", "max") if k in th}})
    return failures


def csv_rows(rows: list[dict]) -> list[dict]:
    out = []
    for r in rows:
        flat = dict(r)
        flat["params"] = ";".join(f"{k}={v}" for k, v in sorted(r["params"].items()))
        flat["certified_ratio"] = "" if r["certified_ratio"] is None else r["certified_ratio"]
        out.append(flat)
    return out
