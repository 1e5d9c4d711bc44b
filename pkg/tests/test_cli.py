from __future__ import annotations

import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablemp import config
from stablemp.cli import main
from stablemp.config import ScenarioConfig
from stablemp.errors import ConfigError
from stablemp.scenarios import SCENARIOS

ROOT = Path(__file__).resolve().parents[1]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


class TestCommands:
    def test_scaling_identity(self, capsys):
        code, out, _ = run(capsys, "scaling-identity", "--s", "0.5", "--t", "1", "--mass", "1")
        assert code == 0
        header, row = rows(out)
        assert header == ["s", "t", "lhs", "rhs", "rel_gap"]
        assert float(row[2]) == pytest.approx(4.0, rel=1e-10)
        assert float(row[3]) == 4.0

    def test_eval_op_constant(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(
            json.dumps(
                {
                    "operator": {"s": 0.3, "measure": {"kind": "uniform", "dim": 1, "mass": 2.0}},
                    "domain": {"kind": "interval", "a": -1.0, "b": 1.0},
                    "function": {"builtin": "constant", "params": {"c": 1.0}},
                    "points": [[-0.5], [0.0], [0.25]],
                }
            )
        )
        code, out, _ = run(capsys, "eval-op", "--config", str(cfg))
        assert code == 0
        values = [float(r[1]) for r in rows(out)[1:]]
        assert len(values) == 3 and max(map(abs, values)) < 1e-12

    def test_nondegeneracy(self, capsys):
        code, out, _ = run(capsys, "nondegeneracy", "--s", "0.5", "--mass", "2")
        assert code == 0
        assert float(rows(out)[1][1]) == pytest.approx(2.0)

    def test_verify_counterexample_exits_two(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        code, out, err = run(capsys, "verify-mp", "--scenario", "counterexample", "--json", str(report))
        assert code == 2
        data = json.loads(report.read_text())
        assert data["verdicts"]["boundary_functional"] == "fail"
        assert data["verdicts"]["ultrasubharmonic"] == "pass"
        assert "boundary_functional=fail" in err
        assert len(rows(out)) == 5

    def test_verify_negative_constant_exits_zero(self, capsys):
        assert run(capsys, "verify-mp", "--scenario", "negative-constant")[0] == 0

    def test_classical_demo(self, capsys):
        assert run(capsys, "classical-mp", "--scenario", "wedge-appendix-b")[0] == 0
        assert run(capsys, "classical-mp", "--scenario", "classical-laplacian-demo")[0] == 2

    def test_solve_writes_files(self, capsys, tmp_path):
        out_csv, out_json = tmp_path / "phi.csv", tmp_path / "fit.json"
        code, _, _ = run(
            capsys, "solve", "--scenario", "negative-constant", "--n-nodes", "65", "--csv", str(out_csv), "--json", str(out_json)
        )
        assert code == 0
        table = rows(out_csv.read_text())
        assert table[0] == ["x", "phi"] and len(table) == 66
        assert abs(json.loads(out_json.read_text())["decay_fit"]["beta"] - 0.5) < 0.1

    def test_replay(self, capsys):
        assert run(capsys, "replay", "--scenario", "negative-constant")[0] == 0
        assert run(capsys, "replay", "--scenario", "counterexample")[0] == 2

    def test_tail_weight_with_norm(self, capsys, tmp_path):
        cfg = tmp_path / "w.json"
        cfg.write_text(
            json.dumps(
                {
                    "operator": {"s": 0.5, "measure": {"kind": "atomic", "atoms": [{"dir": [1, 0], "w": 1}, {"dir": [0, 1], "w": 1}]}},
                    "domain": {"kind": "polygon", "vertices": [[0, 0], [1, 0.5], [1, 1], [0.6666666666666666, 1]]},
                    "function": {"builtin": "wedge_function"},
                    "points": [[10, 10], [10, 0.75]],
                }
            )
        )
        report = tmp_path / "tw.json"
        code, out, _ = run(capsys, "tail-weight", "--config", str(cfg), "--json", str(report))
        assert code == 0
        assert float(rows(out)[1][2]) == 0.0
        assert json.loads(report.read_text())["tail_norm"]["value"] <= 2.5627

    def test_deterministic_csv(self, capsys):
        a = run(capsys, "eval-op", "--scenario", "counterexample")[1]
        b = run(capsys, "eval-op", "--scenario", "counterexample")[1]
        assert a == b and a.startswith("x,value,error\n")


class TestErrors:
    def test_s_out_of_range(self, capsys):
        code, _, err = run(capsys, "scaling-identity", "--s", "1.0")
        assert code == 1 and "(0, 1)" in err

    def test_usage_error_is_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify-mp", "--no-such-flag"])
        assert exc.value.code == 1

    def test_schema_violation_pointer(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"operator": {"s": 1.5, "measure": {"kind": "uniform", "dim": 1}}}))
        code, _, err = run(capsys, "eval-op", "--config", str(bad))
        assert code == 1
        assert "/operator/s" in err

    def test_missing_grid_file(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            ScenarioConfig.from_dict({"function": {"grid": {"file": "nope.csv"}}}, tmp_path)
        assert exc.value.pointer == "/function/grid/file"

    def test_unknown_scenario_key(self):
        with pytest.raises(ConfigError) as exc:
            ScenarioConfig.from_dict({"domain": {"kind": "interval", "a": 0, "b": 1}, "bogus": 1})
        assert exc.value.pointer == "/"

    def test_help(self):
        for argv in (["--help"], ["verify-mp", "--help"]):
            proc = subprocess.run([sys.executable, "-m", "stablemp.cli", *argv], capture_output=True, text=True)
            assert proc.returncode == 0 and "usage" in proc.stdout


class TestConfig:
    def test_docs_schema_matches_package(self):
        assert json.loads((ROOT / "docs" / "config.schema.json").read_text()) == config.schema()

    @pytest.mark.parametrize("name", sorted(SCENARIOS))
    def test_scenarios_round_trip(self, name):
        cfg = SCENARIOS[name].load()
        again = ScenarioConfig.from_dict(json.loads(cfg.dumps()))
        assert again == cfg
        assert again.dumps() == cfg.dumps()

    @given(
        st.floats(0.01, 0.99),
        st.floats(0.1, 10.0),
        st.lists(st.floats(1e-3, 0.2), min_size=2, max_size=5),
        st.floats(0.0, 0.5),
    )
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, s, mass, ladder, delta):
        raw = {
            "operator": {"s": s, "measure": {"kind": "uniform", "dim": 1, "mass": mass}},
            "domain": {"kind": "interval", "a": -1.0, "b": 1.0},
            "function": {"builtin": "bump", "params": {"center": 0.0, "width": 0.5}},
            "ladder": ladder,
            "delta": delta,
        }
        cfg = ScenarioConfig.from_dict(raw)
        assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg

    def test_grid_function(self, tmp_path):
        (tmp_path / "u.csv").write_text("x,value\n-1,0\n-0.5,0.75\n0,1\n0.5,0.75\n1,0\n")
        cfg = ScenarioConfig.from_dict({"function": {"grid": {"file": "u.csv", "interpolation": "linear"}}}, tmp_path)
        u = config.build_function(cfg)
        assert u(0.25) == pytest.approx(0.875)
        assert u(2.0) == 0.0
