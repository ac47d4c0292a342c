import json
from pathlib import Path

import numpy as np
import pytest

from berglab.cli import PlanError, emit_plot_data, load_domain, main, run_plan


MINI_PLAN = {
    "domain": {"builtin": "disc"},
    "suites": ["kernel", "operators"],
    "seed": 3,
    "budgets": {"galerkin_degree": 6},
}


def test_load_builtin_domains():
    assert load_domain({"builtin": "disc"}).n == 1
    assert load_domain({"builtin": "ball2"}).n == 2
    assert load_domain({"builtin": "ellipsoid"}).tag == "ellipsoid"


def test_unknown_suite_rejected(tmp_path):
    with pytest.raises(PlanError):
        run_plan({"domain": {"builtin": "disc"}, "suites": ["nope"]}, tmp_path)


def test_empty_suite_list(tmp_path):
    summary = run_plan({"domain": {"builtin": "disc"}, "suites": []}, tmp_path)
    assert summary["passed"]
    assert summary["suites"] == {}


def test_mini_plan_runs(tmp_path):
    summary = run_plan(dict(MINI_PLAN), tmp_path)
    assert summary["passed"]
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "operators_berezin_decay.csv").exists()


def test_determinism_modulo_timestamp(tmp_path):
    s1 = run_plan(dict(MINI_PLAN), tmp_path / "a")
    s2 = run_plan(dict(MINI_PLAN), tmp_path / "b")
    t1 = (tmp_path / "a" / "summary.json").read_text()
    t2 = (tmp_path / "b" / "summary.json").read_text()
    strip = lambda t: "\n".join(l for l in t.splitlines() if "timestamp" not in l)
    assert strip(t1) == strip(t2)
    assert s1["passed"] and s2["passed"]


def test_emit_plot_data(tmp_path):
    run_plan(dict(MINI_PLAN), tmp_path)
    out = emit_plot_data(tmp_path, "berezin-decay")
    text = out.read_text()
    assert "berezin_abs" in text.splitlines()[0]
    assert "depth" in text.splitlines()[0]


def test_emit_missing_series(tmp_path):
    run_plan(dict(MINI_PLAN), tmp_path)
    with pytest.raises(PlanError):
        emit_plot_data(tmp_path, "cover-map")


def test_cli_main_run_and_emit(tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(MINI_PLAN))
    out_dir = tmp_path / "report"
    code = main(["run", "--plan", str(plan_path), "--out", str(out_dir)])
    assert code == 0
    code = main(["emit", "--report", str(out_dir), "--kind", "berezin-decay"])
    assert code == 0


def test_cli_seed_override(tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(json.dumps(MINI_PLAN))
    code = main(["run", "--plan", str(plan_path), "--out", str(tmp_path / "r"), "--seed", "9"])
    assert code == 0
    summary = json.loads((tmp_path / "r" / "summary.json").read_text())
    assert summary["seed"] == 9
