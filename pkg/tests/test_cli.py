import csv
import json
import math
import subprocess
import sys

import pytest

from polyflow.cli.generators import generate
from polyflow.cli.io import dumps, instance_from_dict, loads
from polyflow.cli.main import main
from polyflow.exceptions import InputError
from polyflow.online import SapInstance
from polyflow.submodular import verify_submodular

E_RATIO = 1 - math.exp(-1)

GEN_CASES = [
    ("upper-triangular", {"n": 4}),
    ("adwords-laminar", {"n": 6, "seed": 1}),
    ("matroid-coloring", {"graph": "0-1,1-2,0-2", "delta": 2}),
    ("random-polymatroid", {"n": 6, "seed": 3}),
    ("random-oswm", {"agents": 3, "items": 4, "seed": 2, "weighted": True}),
]


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _gen(tmp_path, family, capsys, **params):
    path = tmp_path / f"{family}.json"
    argv = ["gen", family, "--out", path]
    for k, v in params.items():
        flag = "--" + k.replace("_", "-")
        argv += [flag] if v is True else [flag, v]
    code, _, err = _run(argv, capsys)
    assert code == 0, err
    return path


@pytest.mark.parametrize("family,params", GEN_CASES, ids=[c[0] for c in GEN_CASES])
def test_round_trip_is_byte_identical(family, params):
    text = dumps(generate(family, **params).to_dict())
    again = dumps(instance_from_dict(loads(text)).to_dict())
    assert again == text
    assert text.endswith("\n") and ", " not in text


@pytest.mark.parametrize("family,params", GEN_CASES, ids=[c[0] for c in GEN_CASES])
def test_generated_oracles_are_submodular(family, params):
    inst = generate(family, **params)
    oracles = [inst.oracle] if isinstance(inst, SapInstance) else inst.oracles
    for o in oracles:
        assert verify_submodular(o, "exhaustive").passed


def test_canonical_floats_and_nonfinite():
    assert dumps({"b": 0.1, "a": [1, 2.5]}) == '{"a":[1,2.5],"b":0.10000000000000001}\n'
    with pytest.raises(InputError):
        dumps({"x": float("nan")})


def test_gen_cli_matches_library(tmp_path, capsys):
    path = _gen(tmp_path, "upper-triangular", capsys, n=3)
    assert path.read_text() == dumps(generate("upper-triangular", n=3).to_dict())


@pytest.mark.parametrize("delta,opt", [(1, 2.0), (2, 3.0)])
def test_matroid_coloring_triangle(tmp_path, capsys, delta, opt):
    path = _gen(tmp_path, "matroid-coloring", capsys, graph="0-1,1-2,0-2", delta=delta)
    code, out, _ = _run(["offline", "--instance", path], capsys)
    assert code == 0
    assert json.loads(out)["opt"] == pytest.approx(opt)


def test_solve_with_trace(tmp_path, capsys):
    inst = _gen(tmp_path, "upper-triangular", capsys, n=2)
    trace = tmp_path / "trace.csv"
    code, out, _ = _run(["solve", "--instance", inst, "--step", "0.01", "--trace", trace], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["primal"] / 2 == pytest.approx(0.75, abs=0.01)
    rows = list(csv.DictReader(trace.open()))
    assert rows and "primal" in rows[0]


def test_waterlevels_all_methods(tmp_path, capsys):
    spec = tmp_path / "f.json"
    spec.write_text(json.dumps({"kind": "uniform", "n": 2, "rank": 1}))
    code, out, _ = _run(["waterlevels", "--instance", spec, "--loads", "0.3,0.7", "--method", "all"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["max_gap"] < 1e-9
    assert doc["methods"]["alg1"]["w"] == [1.0, 1.0]


def test_ranking_dump_runs(tmp_path, capsys):
    inst = _gen(tmp_path, "random-oswm", capsys, agents=2, items=3, seed=4)
    runs = tmp_path / "runs.csv"
    code, out, _ = _run(["ranking", "--instance", inst, "--trials", 50, "--dump-runs", runs], capsys)
    assert code == 0
    assert 0 < json.loads(out)["mean_ratio"] <= 1
    with runs.open() as fh:
        assert next(csv.reader(fh)) == ["trial", "seed_hash", "welfare", "opt", "ratio"]


def _suite(tmp_path, doc):
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(doc))
    return path


def test_bench_upper_triangular_sizes(tmp_path, capsys):
    suite = _suite(tmp_path, {
        "instances": [{"id": f"ut{n}", "gen": {"family": "upper-triangular", "n": n}} for n in (2, 3, 4, 5, 6)],
        "solvers": ["frac"],
        "params": {"step": 0.01},
        "thresholds": [{"solver": "frac", "metric": "ratio", "min": E_RATIO - 0.01, "primary": True}],
    })
    out = tmp_path / "report.json"
    code, _, err = _run(["bench", "--suite", suite, "--out", out, "--jobs", 2], capsys)
    assert code == 0, err
    rows = json.loads(out.read_text())["rows"]
    assert [r["instance"] for r in rows] == ["ut2", "ut3", "ut4", "ut5", "ut6"]
    with out.with_suffix(".csv").open() as fh:
        reader = csv.reader(fh)
        assert next(reader) == ["instance", "solver", "params", "primal", "opt", "ratio",
                                "certified_ratio", "wall_time"]
        assert len(list(reader)) == 5


def test_bench_ranking_suite(tmp_path, capsys):
    suite = _suite(tmp_path, {
        "instances": [{"id": f"o{s}", "gen": {"family": "random-oswm", "agents": 3, "items": 5, "seed": s}}
                      for s in range(3)],
        "solvers": ["ranking"],
        "params": {"trials": 2000, "seed": 1},
        "thresholds": [{"solver": "ranking", "metric": "ratio", "min": 0.62}],
    })
    assert _run(["bench", "--suite", suite, "--out", tmp_path / "r.json"], capsys)[0] == 0


def test_bench_failed_threshold_exits_2(tmp_path, capsys):
    suite = _suite(tmp_path, {
        "instances": [{"id": "ut3", "gen": {"family": "upper-triangular", "n": 3}}],
        "solvers": ["frac"], "params": {"step": 0.01},
        "thresholds": [{"solver": "frac", "metric": "ratio", "min": 0.99}],
    })
    assert _run(["bench", "--suite", suite, "--out", tmp_path / "r.json"], capsys)[0] == 2


def test_bench_empty_suite(tmp_path, capsys):
    suite = _suite(tmp_path, {"instances": []})
    assert _run(["bench", "--suite", suite, "--out", tmp_path / "r.json"], capsys)[0] == 0


def test_exit_codes(tmp_path, capsys, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(["offline", "--instance", bad], capsys)[0] == 1
    assert _run(["solve"], capsys)[0] == 1
    assert _run(["gen", "no-such-family"], capsys)[0] == 1
    big = _gen(tmp_path, "random-oswm", capsys, agents=8, items=12, seed=0)
    assert _run(["offline", "--instance", big], capsys)[0] == 3
    spec = tmp_path / "f.json"
    spec.write_text(json.dumps({"kind": "uniform", "n": 2, "rank": 1}))
    assert _run(["waterlevels", "--instance", spec, "--loads", "1,2,3"], capsys)[0] == 1
    monkeypatch.setenv("POLYFLOW_TOL", "-1")
    assert _run(["offline", "--instance", big], capsys)[0] == 1


def test_tolerance_env_is_honoured(tmp_path, capsys, monkeypatch):
    # a load just over the rank is rejected by a tight tolerance and accepted by a loose one
    from polyflow.offline import brute_force_feasibility
    from polyflow.submodular import UniformOracle

    monkeypatch.setenv("POLYFLOW_TOL", "1e-3")
    assert brute_force_feasibility(UniformOracle(2, 1), [0.5, 0.5001]).feasible
    monkeypatch.setenv("POLYFLOW_TOL", "1e-9")
    assert not brute_force_feasibility(UniformOracle(2, 1), [0.5, 0.5001]).feasible


def test_verify_instance_only(tmp_path, capsys):
    inst = _gen(tmp_path, "random-polymatroid", capsys, n=5, seed=1)
    code, out, _ = _run(["verify", "--instance", inst, "--skip-audit"], capsys)
    assert code == 0 and "PASS" in out


def test_verify_quick_subset(capsys):
    code, out, _ = _run(["verify", "--only", "A6,A9"], capsys)
    assert code == 0
    assert "A6 PASS" in out and "A9 PASS" in out


def test_console_module_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "polyflow.cli.main", "gen", "upper-triangular", "--n", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert loads(res.stdout)["values"] == [1, 1, 1]
