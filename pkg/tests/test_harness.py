import json

import numpy as np
import pytest

from nlsbeat.harness import thresholds as th
from nlsbeat.harness.cli import main
from nlsbeat.harness.config import (
    ExperimentConfig,
    dumps_config,
    parse_config,
    parse_window,
    read_config,
    write_config,
)
from nlsbeat.harness.report import Check, VerificationReport, merge_reports
from nlsbeat.harness.scenarios import CATALOG, horizon, run_scenario, scenario_catalog
from nlsbeat.validation import ConfigurationError

# config ----------------------------------------------------------------------


def test_empty_config_requires_scenario(tmp_path):
    (tmp_path / "c.cfg").write_text("")
    with pytest.raises(ConfigurationError, match="scenario: required"):
        read_config(tmp_path / "c.cfg")
    assert parse_config("", require_scenario=False) == ExperimentConfig()


def test_config_round_trip(tmp_path):
    cfg = parse_config("scenario = freq-shift\nepsilon = 0.1\nrecipe = cos_plus_sin_perturbed\nq = 3\n")
    write_config(cfg, tmp_path / "c.cfg")
    assert read_config(tmp_path / "c.cfg") == cfg
    assert "epsilon = 0.1\n" in dumps_config(cfg)


def test_config_q_constraint_names_key():
    with pytest.raises(ConfigurationError, match=r"^q \(line 3\)"):
        parse_config("scenario = freq-shift\nrecipe = cos_plus_sin_perturbed\nq = 1\n")


@pytest.mark.parametrize("text, pattern", [
    ("scenario = theorem-plus\nfoo = 1\n", r"line 2: unknown key 'foo'"),
    ("scenario = theorem-plus\nepsilon = 0.1\nepsilon = 0.2\n", r"line 3: duplicate key"),
    ("scenario = theorem-plus\nN = 3.5\n", r"line 2: cannot parse N"),
    ("scenario = theorem-plus\nepsilon\n", r"line 2: expected 'key = value'"),
    ("scenario = theorem-plus\nepsilon = 1.5\n", r"epsilon \(line 2\)"),
    ("scenario = nope\n", r"scenario \(line 1\): unknown scenario"),
    ("scenario = theorem-plus\nT_mode = forever\n", r"T_mode \(line 2\)"),
    ("scenario = theorem-plus\nintegrator = euler\n", r"integrator \(line 2\)"),
    ("scenario = theorem-plus\nsign = 2\n", r"sign \(line 2\)"),
])
def test_config_errors(text, pattern):
    with pytest.raises(ConfigurationError, match=pattern):
        parse_config(text)


def test_config_comments_and_none():
    cfg = parse_config("# header\nscenario = theorem-plus  # trailing\nq = none\n\n")
    assert cfg.scenario == "theorem-plus" and cfg.q is None


def test_parse_window():
    assert parse_window("theorem") == ("theorem", None)
    assert parse_window("theorem_window") == ("theorem", None)
    assert parse_window("periods:2") == ("periods", 2.0)
    for bad in ("periods:x", "periods:-1", "always"):
        with pytest.raises(ValueError):
            parse_window(bad)


def test_horizon():
    cfg = ExperimentConfig(epsilon=0.1)
    assert horizon(cfg) == pytest.approx(0.1 ** -2.25)
    assert horizon(cfg.with_overrides(T_mode="periods:2")) == pytest.approx(2 * np.pi / 0.01)


# catalog ---------------------------------------------------------------------

def test_catalog():
    names = [s.name for s in scenario_catalog()]
    assert names == ["theorem-plus", "theorem-minus", "control-constant", "control-cos-datum",
                     "freq-shift", "general-p", "cos4x-null"]
    assert list(CATALOG) == names
    assert CATALOG["general-p"].resolve(ExperimentConfig()).p == 2
    assert CATALOG["general-p"].resolve(ExperimentConfig(p=3), explicit={"p"}).p == 3
    assert CATALOG["freq-shift"].resolve(ExperimentConfig()).q == 3
    assert CATALOG["theorem-minus"].resolve(ExperimentConfig(sign=1)).sign == -1


def test_general_p_frequency():
    rep, _ = run_scenario("general-p", ExperimentConfig(epsilon=0.2))
    c = rep.check("frequency")
    assert c.exploratory and c.passed
    assert rep.metrics["frequency_fitted"] == pytest.approx(2 * 0.2 ** 2, rel=0.03)


def test_cos4x_null_scenario():
    rep, _ = run_scenario("cos4x-null", ExperimentConfig(N=8))
    assert rep.passed and rep.metrics["pm1_square_terms"] == 2
    assert rep.notes


# reports ---------------------------------------------------------------------

def test_check_comparisons():
    assert Check("a", 1.0, 0.5).passed
    assert not Check("a", 1.0, 1.5).passed
    assert Check("a", 2.0, 2.5, ">=").passed
    assert Check("a", [0.5, 2.0], 2.0, "in").passed
    assert not Check("a", [0.5, 2.0], 2.04, "in").passed
    assert Check("a", 0, 0, "==").passed
    assert Check("a", 1.0, np.float64(0.5)).observed.__class__ is float
    with pytest.raises(ValueError):
        Check("a", 1.0, 0.5, "<")


def test_report_pass_semantics():
    rep = VerificationReport("x", {"epsilon": 0.1})
    rep.add("ok", 1.0, 0.5)
    rep.add("loose", 1.0, 5.0, exploratory=True)
    assert rep.passed and rep.exploratory_flags == ["loose"]
    rep.add("bad", 1.0, 2.0)
    assert not rep.passed
    with pytest.raises(ValueError, match="duplicate"):
        rep.add("ok", 1.0, 0.1)
    d = json.loads(rep.to_json())
    assert d["passed"] is False and [c["name"] for c in d["checks"]] == ["ok", "loose", "bad"]
    assert rep.to_json() == rep.to_json()


def test_merge_reports_orders_by_name():
    a = VerificationReport("b-scn", {})
    a.add("x", 1, 0)
    b = VerificationReport("a-scn", {})
    b.add("y", 1, 2)
    b.add("z", 1, 2, exploratory=True)
    m = merge_reports([a.to_dict(), b.to_dict()])
    assert list(m["scenarios"]) == ["a-scn", "b-scn"]
    assert m["scenarios"]["a-scn"]["failed_checks"] == ["y"]
    assert m["scenarios"]["a-scn"]["failed_exploratory"] == ["z"]
    assert m["passed"] is False


def test_non_finite_values_serialize():
    rep = VerificationReport("x", {})
    rep.metrics["m"] = float("nan")
    assert json.loads(rep.to_json())["metrics"]["m"] == "nan"


# command line ------------------------------------------------------------------

def test_cli_normal_form(tmp_path, capsys):
    assert main(["normal-form", "--p", "1", "--bound", "6", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "residual.txt").read_text() == "0/1\n"
    for name in ("chi", "z4", "z41", "z42", "z43", "perturbation"):
        assert (tmp_path / f"{name}.txt").stat().st_size > 0
    assert "homological residual: 0/1" in capsys.readouterr().out


def test_cli_normal_form_general_p(tmp_path):
    assert main(["normal-form", "--p", "2", "--bound", "5", "--a", "1", "--b", "1",
                 "--out", str(tmp_path)]) == 0
    assert not (tmp_path / "z41.txt").exists()


@pytest.mark.parametrize("argv, pattern", [
    (["verify", "nope"], "unknown scenario"),
    (["verify", "theorem-plus", "--sign", "-1"], "sign: fixed"),
    (["frobnicate"], "invalid choice"),
    (["simulate", "--epsilon", "2"], "epsilon"),
    (["normal-form", "--p", "3", "--bound", "2"], "bound"),
    (["report", "/nonexistent/path"], "no such file"),
    (["sweep", "--epsilons", "0.1,x"], "epsilons"),
])
def test_cli_errors(argv, pattern, capsys, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[0] != "report" else [])) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("ERROR: ") and pattern in err[0]


def test_cli_config_file_errors(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("scenario = freq-shift\nq = 1\n")
    assert main(["verify", "freq-shift", "--config", str(cfg)]) == 2
    assert capsys.readouterr().err.startswith("ERROR: q (line 2)")


def test_cli_verify_control_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["verify", "control-constant", "--epsilon", "0.1", "--out", str(out)]) == 0
    for name in ("report.json", "observables.csv", "trajectory.csv"):
        assert (a / "control-constant" / name).read_bytes() == (b / "control-constant" / name).read_bytes()
    rep = json.loads((a / "control-constant" / "report.json").read_text())
    assert rep["metrics"]["beating_amplitude"] <= th.CONTROL_CEILING * 0.01
    assert rep["passed"]


def test_cli_verify_theorem_plus_checks(tmp_path, capsys):
    code = main(["verify", "theorem-plus", "--epsilon", "0.1", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "theorem-plus" / "report.json").read_text())
    names = {c["name"] for c in rep["checks"]}
    assert {"concentration", "beating-sup-error", "mass-drift", "energy-drift"} <= names
    assert code == (0 if rep["passed"] else 1)
    assert rep["metrics"]["normal_form_residual"] == "0/1"


def test_cli_simulate_and_report(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario = control-cos-datum\nepsilon = 0.3\nrecipe = cos_only\nN = 12\n"
                   "T_mode = periods:0.5\n")
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    header = (out / "observables.csv").read_text().splitlines()[0]
    assert header.startswith("t,I_1,I_-1,d,s")
    assert main(["verify", "cos4x-null", "--N", "8", "--out", str(tmp_path / "r")]) == 0
    assert main(["report", str(tmp_path / "r"), "--out", str(tmp_path / "s")]) == 0
    summary = json.loads((tmp_path / "s" / "summary.json").read_text())
    assert summary == {"passed": True, "scenarios": {"cos4x-null": {
        "passed": True, "failed_checks": [], "failed_exploratory": []}}}


def test_cli_sweep_small(tmp_path, capsys):
    code = main(["sweep", "--epsilons", "0.4,0.35,0.3", "--N", "16", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "sweep" / "report.json").read_text())
    assert {"beating-slope", "sum-slope", "reduced-slope"} <= {c["name"] for c in rep["checks"]}
    assert code == (0 if rep["passed"] else 1)
