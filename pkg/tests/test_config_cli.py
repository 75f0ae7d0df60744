import json
import math
import os

import numpy as np
import pytest

from hdicho.cli import main
from hdicho.config import load_config
from hdicho.errors import ConfigError


def write_config(path, payload):
    path.write_text(json.dumps(payload, indent=1))
    return str(path)


def minimal_config(**overrides):
    cfg = {
        "growth_rate": {"name": "identity"},
        "system": {"builtin": "floquet_demo", "params": {"alpha": 1.0}},
        "interval": {"h_lo": 0.01, "h_hi": 100.0},
        "grid": {"points_per_decade": 10},
        "floquet": {"T": 2.0},
        "seed": 0,
    }
    cfg.update(overrides)
    return cfg


# ---------------------------------------------------------------------------
# config loading and validation
# ---------------------------------------------------------------------------


def test_minimal_config_valid(tmp_path):
    cfg = load_config(write_config(tmp_path / "c.json", minimal_config()))
    assert cfg.growth.name == "identity"
    assert cfg.system.dim == 2
    assert cfg.h_lo == 0.01 and cfg.h_hi == 100.0


def test_parse_error_carries_position(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"growth_rate": {\n  "name": "identity",,\n}}')
    with pytest.raises(ConfigError) as info:
        load_config(str(p))
    assert "line 2" in info.value.errors[0]


def test_T_must_exceed_identity(tmp_path):
    cfg = minimal_config()
    cfg["floquet"]["T"] = 0.5
    with pytest.raises(ConfigError) as info:
        load_config(write_config(tmp_path / "c.json", cfg))
    assert any("T must exceed the identity element" in e for e in info.value.errors)


def test_interval_escaping_domain_names_a0(tmp_path):
    cfg = minimal_config()
    cfg["interval"] = {"lo": -1.0, "hi": 5.0}
    with pytest.raises(ConfigError) as info:
        load_config(write_config(tmp_path / "c.json", cfg))
    assert any("a0 = 0.0" in e for e in info.value.errors)


def test_all_errors_collected(tmp_path):
    cfg = minimal_config()
    cfg["floquet"]["T"] = 0.5
    cfg["tolerances"] = {"rel_tol": -1.0}
    cfg["dichotomy"] = {"K": 0.5, "alpha": -2.0, "projector": [[1, 0], [0, 0]]}
    with pytest.raises(ConfigError) as info:
        load_config(write_config(tmp_path / "c.json", cfg))
    assert len(info.value.errors) >= 4


def test_unknown_keys_warn(tmp_path):
    cfg = minimal_config(mystery_section={"x": 1})
    loaded = load_config(write_config(tmp_path / "c.json", cfg))
    assert any("mystery_section" in w for w in loaded.warnings)


def test_expression_system_config(tmp_path):
    cfg = minimal_config()
    cfg["system"] = {
        "expression": [["-1/t", "0"], ["0", "1/t"]],
        "lower_endpoint": 0.0,
    }
    loaded = load_config(write_config(tmp_path / "c.json", cfg))
    np.testing.assert_allclose(loaded.system.coefficient(2.0), np.diag([-0.5, 0.5]))


# ---------------------------------------------------------------------------
# CLI commands end to end
# ---------------------------------------------------------------------------


def run_cli(args):
    return main([str(a) for a in args])


def read_report(out_dir):
    with open(os.path.join(str(out_dir), "report.json")) as fh:
        return json.load(fh)


def test_cli_config_error_exits_2(tmp_path, capsys):
    cfg = minimal_config()
    cfg["floquet"]["T"] = 0.5
    path = write_config(tmp_path / "c.json", cfg)
    assert run_cli(["floquet", "--config", path, "--out", tmp_path / "o"]) == 2
    assert "T must exceed" in capsys.readouterr().err


def test_cli_group_selftest(tmp_path):
    for name in ("exp", "identity", "power:3", "expm1"):
        slug = name.replace(":", "_")
        path = write_config(
            tmp_path / f"{slug}.json", {"growth_rate": {"name": name}, "seed": 1}
        )
        out = tmp_path / f"out_{slug}"
        assert run_cli(["group-selftest", "--config", path, "--out", out]) == 0
        report = read_report(out)
        assert report["results"]["ok"] is True


def test_cli_floquet_worked_example(tmp_path):
    path = write_config(tmp_path / "c.json", minimal_config())
    out = tmp_path / "out"
    assert run_cli(["floquet", "--config", path, "--out", out, "--format", "both"]) == 0
    report = read_report(out)
    moduli = sorted(m["modulus"] for m in report["results"]["monodromy"]["multipliers"])
    assert moduli == pytest.approx([0.5, 2.0], rel=1e-9)
    assert report["results"]["decision"]["verdict"] == "dichotomy"
    assert report["results"]["derived_verification"]["verdict"] == "holds"
    # CSV rows match the configured grid
    with open(os.path.join(str(out), "grid.csv")) as fh:
        lines = fh.read().strip().splitlines()
    assert lines[0].startswith("t,h,")
    assert len(lines) - 1 == report["results"]["derived_verification"]["grid_size"]


def test_cli_floquet_gfs_violation_exits_2(tmp_path):
    cfg = minimal_config(system={"builtin": "counterexample", "params": {"ell": 0.5}})
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["floquet", "--config", path, "--out", out]) == 2
    report = read_report(out)
    assert report["error"]["type"] == "GfsViolationError"


def test_cli_fullline_counterexample(tmp_path):
    cfg = minimal_config(
        system={"builtin": "counterexample", "params": {"ell": 0.5}},
        interval={"h_lo": 0.001, "h_hi": 1000.0},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["fullline", "--config", path, "--out", out]) == 1
    report = read_report(out)
    full = report["results"]["fullline"]
    assert "index" in full["failed_conditions"]
    assert "bounded_solution" in full["failed_conditions"]
    assert full["combination"]["index"] == 1
    # every negative verdict carries a concrete witness
    assert full["witness"]["sup_norm"] > 0


def test_cli_fullline_diag_holds(tmp_path):
    cfg = minimal_config(system={"builtin": "h_diagonal", "params": {"alpha": 1.0}})
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["fullline", "--config", path, "--out", out]) == 0
    report = read_report(out)
    assert report["results"]["fullline"]["verdict"] == "holds"


def test_cli_dichotomy_verify_and_estimate(tmp_path):
    cfg = minimal_config(
        system={"builtin": "h_diagonal", "params": {"alpha": 1.0}},
        dichotomy={"projector": [[1, 0], [0, 0]], "K": 1.0, "alpha": 1.0},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["dichotomy-verify", "--config", path, "--out", out]) == 0
    assert read_report(out)["results"]["dichotomy"]["verdict"] == "holds"
    out2 = tmp_path / "out2"
    assert run_cli(["dichotomy-estimate", "--config", path, "--out", out2]) == 0
    est = read_report(out2)["results"]["estimate"]
    assert 1.0 <= est["K"] <= 1.1 and 0.9 <= est["alpha"] <= 1.0


def test_cli_estimate_failure_is_violation(tmp_path):
    cfg = minimal_config(
        system={"builtin": "counterexample", "params": {"ell": 0.5}},
        dichotomy={"projector": [[1.0]]},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["dichotomy-estimate", "--config", path, "--out", out]) == 1
    assert "failure" in read_report(out)["results"]["estimate"]


def test_cli_missing_required_block(tmp_path):
    cfg = minimal_config()
    path = write_config(tmp_path / "c.json", cfg)
    assert run_cli(["dichotomy-verify", "--config", path, "--out", tmp_path / "o"]) == 2


def test_cli_noncritical_and_expansive(tmp_path):
    cfg = minimal_config(
        growth_rate={"name": "exp"},
        system={"builtin": "h_diagonal", "params": {"alpha": 1.0}},
        noncritical={"T": 2.0, "samples": 9},
        expansive={"L": 2.0, "beta": 1.0},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["noncritical", "--config", path, "--out", out]) == 0
    rep = read_report(out)["results"]["noncritical"]
    assert rep["verdict"] == "noncritical" and rep["theta"] < 1.0
    out2 = tmp_path / "out2"
    assert run_cli(["expansive", "--config", path, "--out", out2]) == 0


def test_cli_noncritical_critical_exits_1(tmp_path):
    cfg = minimal_config(
        system={"builtin": "counterexample", "params": {"ell": 0.5}},
        interval={"h_lo": 0.8, "h_hi": 2.0},
        noncritical={"T": 2.0, "samples": 60},
        grid={"points_per_decade": 120},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    code = run_cli(["noncritical", "--config", path, "--out", out])
    rep = read_report(out)["results"]["noncritical"]
    assert code == 1
    assert rep["verdict"] == "critical"
    assert rep["witness"] is not None  # negative verdict names its witness


def test_cli_transition_oracle(tmp_path):
    cfg = minimal_config(
        growth_rate={"name": "exp"},
        system={"builtin": "h_diagonal", "params": {"alpha": 1.0}},
        interval={"h_lo": 1.0, "h_hi": math.exp(5.0)},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["transition", "--config", path, "--out", out]) == 0
    res = read_report(out)["results"]
    assert res["oracle_worst_relative"] <= 1e-6
    assert res["cocycle_worst_over_bound"] <= 1.0


def test_cli_audit_roundtrip(tmp_path):
    cfg = minimal_config(
        growth_rate={"name": "exp"},
        system={"builtin": "h_diagonal", "params": {"alpha": 1.0}},
        audit={"T": 2.0, "K": 1.0, "alpha": 1.0},
    )
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["audit", "--config", path, "--out", out]) == 0
    audit = read_report(out)["results"]["audit"]
    assert audit["implications"]["consistent"]
    assert audit["theta_predicted"] == pytest.approx(4.0 * math.exp(-2.0))


def test_cli_floquet_no_dichotomy_exits_1(tmp_path):
    cfg = {
        "growth_rate": {"name": "exp"},
        "system": {"expression": [["0"]], "lower_endpoint": "-inf", "name": "zero"},
        "interval": {"h_lo": 0.1, "h_hi": 10.0},
        "grid": {"points_per_decade": 10},
        "floquet": {"T": 1.0},
        "seed": 0,
    }
    path = write_config(tmp_path / "c.json", cfg)
    out = tmp_path / "out"
    assert run_cli(["floquet", "--config", path, "--out", out]) == 1
    report = read_report(out)
    assert report["results"]["decision"]["verdict"] == "no_dichotomy"
    assert report["results"]["decision"]["witness_multiplier"]["modulus"] == pytest.approx(1.0)


def test_cli_seed_override_recorded(tmp_path):
    path = write_config(
        tmp_path / "c.json", {"growth_rate": {"name": "identity"}, "seed": 3}
    )
    out = tmp_path / "out"
    assert run_cli(["group-selftest", "--config", path, "--out", out, "--seed", "9"]) == 0
    assert read_report(out)["seed"] == 9
