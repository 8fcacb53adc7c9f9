import csv
import json
import math

import numpy as np
import pytest

from nonlocal_lab import GridFunction, TailExpr, TailSpec
from nonlocal_lab.cli import main


def run(tmp_path, *argv):
    return main([a.replace("@", str(tmp_path) + "/") for a in argv])


@pytest.fixture
def files(tmp_path):
    u = GridFunction.from_expr(TailExpr.trig(1.0, 1.0), 10.0, 1 / 64)
    u.to_csv(tmp_path / "cos.csv")
    u.tail_to_json(tmp_path / "cos_tail.json")
    q = GridFunction.polynomial([0, 0, 1], 8.0, 1 / 16)
    q.to_csv(tmp_path / "q.csv")
    q.tail_to_json(tmp_path / "q_tail.json")
    (tmp_path / "flat.json").write_text(json.dumps({"sigma": 1.0}))
    fam = {"family": [{"kernel": {"sigma": 1.0}, "c": 0.0},
                      {"kernel": {"sigma": 1.0, "modulation": {"kind": "constant", "value": 2.0}}, "c": 0.1}],
           "lambda": 1, "Lambda": 3}
    (tmp_path / "fam.json").write_text(json.dumps(fam))
    ext = TailSpec.uniform(1.0, TailExpr.trig(1.0, math.pi)).to_json()
    (tmp_path / "prob.json").write_text(json.dumps({"exterior": ext, "h": 1 / 32, "operator": {"sigma": 1.0}}))
    (tmp_path / "bad.json").write_text(json.dumps({"exterior": ext, "h": 1 / 32, "operator": {"sigma": 2.5}}))
    return tmp_path


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_eval_linear_and_family(files):
    assert run(files, "eval", "--u", "@cos.csv", "--tail", "@cos_tail.json", "--kernel", "@flat.json",
               "--points", "-0.5", "0", "--out", "@e.csv") == 0
    rows = read_csv(files / "e.csv")
    assert float(rows[1]["value"]) == pytest.approx(-math.pi, abs=1e-4)
    assert run(files, "eval", "--u", "@cos.csv", "--tail", "@cos_tail.json", "--kernel", "@fam.json",
               "--points", "0", "--out", "@f.csv") == 0
    assert read_csv(files / "f.csv")[0]["argmin"] == "1"


def test_solve_and_report(files):
    assert run(files, "solve", "--problem", "@prob.json", "--out", "@s.csv", "--report", "@r.json") == 0
    rep = json.loads((files / "r.json").read_text())
    assert rep["passed"] and rep["residual"] < 1e-10
    assert float(read_csv(files / "s.csv")[0]["value"]) == pytest.approx(-1.0)


def test_exit_codes(files):
    assert run(files, "solve", "--problem", "@bad.json", "--out", "@s.csv") == 1
    assert run(files, "seminorm", "--u", "@cos.csv", "--beta", "2.0", "--region", "-1", "1",
               "--out", "@n.json") == 1
    assert not (files / "n.json").exists()
    assert run(files, "counterexample", "--m", "2", "--sigma", "2.5", "--csv", "@c.csv") == 1
    assert run(files, "--threads", "0", "counterexample", "--m", "2") == 1
    assert run(files, "nonsense") == 1


def test_divergent_tail_exit(files):
    lin = GridFunction.from_expr(TailExpr.abs_power(1.2), 4.0, 1 / 16)
    lin.to_csv(files / "g.csv")
    lin.tail_to_json(files / "g_tail.json")
    assert run(files, "eval", "--u", "@g.csv", "--tail", "@g_tail.json", "--kernel", "@flat.json",
               "--points", "0", "--out", "@d.csv") == 4


def test_seminorm_and_liouville(files):
    assert run(files, "seminorm", "--u", "@cos.csv", "--tail", "@cos_tail.json", "--beta", "1.5",
               "--region", "-1", "1", "--out", "@n.json") == 0
    assert json.loads((files / "n.json").read_text())["seminorm"] > 0
    assert run(files, "liouville-check", "--u", "@q.csv", "--tail", "@q_tail.json", "--sigma", "1.5",
               "--alpha", "0.7", "--c1", "2", "--out", "@l.json") == 0
    assert json.loads((files / "l.json").read_text())["passed"] is True


def test_counterexample_smoke_and_determinism(files):
    argv = ["counterexample", "--m", "2", "--sigma", "1.0", "--alpha", "0.1"]
    assert run(files, *argv, "--csv", "@c1.csv", "--out", "@c1.json") == 0
    assert run(files, *argv, "--csv", "@c2.csv", "--out", "@c2.json") == 0
    rows = read_csv(files / "c1.csv")
    assert len(rows) == 1 and rows[0]["m"] == "2"
    assert (files / "c1.csv").read_bytes() == (files / "c2.csv").read_bytes()
    assert (files / "c1.json").read_bytes() == (files / "c2.json").read_bytes()
    assert not [p for p in files.iterdir() if p.name.startswith(".tmp-")]


def test_threads_do_not_change_output(files):
    argv = ["counterexample", "--m", "2", "4", "--no-extras"]
    assert run(files, *argv, "--csv", "@a.csv") == 0
    assert run(files, "--threads", "2", *argv, "--csv", "@b.csv") == 0
    assert (files / "a.csv").read_bytes() == (files / "b.csv").read_bytes()
