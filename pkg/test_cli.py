import json
import math

import pandas as pd
import pytest

from cli import main, parse_config
from errors import (ConfigError, DomainError, InfeasibleOutage, InfeasibleRate, InvalidConfig, NoConvergence,
                    SecrecyOutageError, Unreachable)

FOUR_STATE_CONFIG = {
    "distribution": {"kind": "discrete",
                     "atoms": [[1, 1, 0.1], [1, 10, 0.1], [10, 1, 0.4], [10, 10, 0.4]]},
    "p_avg": 0.5,
    "eps": 0.2,
    "seed": 7,
    "capacity": {"csi": ["full", "main"], "no_power_control": True},
    "simulate": {"rate_multipliers": [1.0], "buffer_grid": [0, 1, 5], "horizon": 2000},
    "sizing": {"eps_primes": [0.25, 0.3], "simulate": False},
}


def write_config(tmp_path, overrides=None, name="run.json"):
    config = json.loads(json.dumps(FOUR_STATE_CONFIG))
    for key, value in (overrides or {}).items():
        config[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return str(path)


def run(command, config_path, out_dir, *extra):
    return main([command, "--config", config_path, "--out", str(out_dir), "--log-level", "WARNING", *extra])


def test_capacity_command(tmp_path):
    out = tmp_path / "out"
    assert run("capacity", write_config(tmp_path), out) == 0
    table = pd.read_csv(out / "capacity.csv")
    assert table["C_full"].iloc[0] == pytest.approx(1.26, abs=0.005)
    assert table["C_main"].iloc[0] == pytest.approx(0.5 * math.log2(7.25 / 1.625), abs=1e-6)
    document = json.loads((out / "capacity_solutions.json").read_text())
    assert document["no_power_control"]["expected_rs"] == pytest.approx(0.8)
    assert document["no_power_control"]["rate"] == pytest.approx(1.0)
    assert (out / "effective_config.json").exists()
    assert "performance_stats" in json.loads((out / "run_metadata.json").read_text())


def test_policy_command(tmp_path):
    out = tmp_path / "out"
    assert run("policy", write_config(tmp_path), out) == 0
    document = json.loads((out / "policy.json").read_text())
    assert [row["region"] for row in document["region_table"]] == ["wf", "wf", "wf", "inv"]
    assert document["expected_power"] == pytest.approx(0.5, abs=1e-6)


def test_continuous_policy_writes_a_power_grid(tmp_path):
    distribution = {"kind": "continuous", "quadrature_order": 24,
                    "marginal_m": {"family": "exponential", "mean": 2.0},
                    "marginal_e": {"family": "exponential", "mean": 1.0}}
    path = write_config(tmp_path, {"distribution": distribution, "eps": 0.05,
                                   "policy": {"csi": "main", "grid_points": 9}})
    out = tmp_path / "out"
    assert run("policy", path, out) == 0
    grid = pd.read_csv(out / "policy_power_grid.csv")
    assert len(grid) == 9
    document = json.loads((out / "policy.json").read_text())
    assert document["threshold_c"] == pytest.approx(2.0 * -math.log(0.95), abs=1e-9)


def test_simulate_command_is_deterministic(tmp_path):
    path = write_config(tmp_path)
    first, second = tmp_path / "a", tmp_path / "b"
    assert run("simulate", path, first) == 0
    assert run("simulate", path, second, "--workers", "2") == 0
    for name in ("traces.csv", "loss_ratio_vs_buffer.csv", "outage_vs_buffer.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    traces = pd.read_csv(first / "traces.csv")
    assert traces["M"].tolist() == [0.0, 1.0, 5.0]
    assert (traces["identity_residual"] <= 1e-6 * 2000).all()
    assert "bound_M" in pd.read_csv(first / "outage_vs_buffer.csv").columns


def test_seed_flag_changes_the_draws(tmp_path):
    path = write_config(tmp_path)
    assert run("simulate", path, tmp_path / "a") == 0
    assert run("simulate", path, tmp_path / "b", "--seed", "8") == 0
    first = pd.read_csv(tmp_path / "a" / "traces.csv")
    second = pd.read_csv(tmp_path / "b" / "traces.csv")
    assert first["seed"].iloc[0] == 7
    assert second["seed"].iloc[0] == 8


def test_sizing_command(tmp_path):
    out = tmp_path / "out"
    assert run("sizing", write_config(tmp_path), out) == 0
    table = pd.read_csv(out / "sizing.csv")
    assert table["eps_prime"].tolist() == pytest.approx([0.25, 0.3])
    assert table["bound_M"].iloc[0] > table["bound_M"].iloc[1] > 0


def test_examples_command(tmp_path):
    out = tmp_path / "out"
    assert main(["examples", "--out", str(out), "--log-level", "WARNING"]) == 0
    document = json.loads((out / "examples.json").read_text())
    assert document["full_csi"]["capacity"] == pytest.approx(1.26, abs=0.005)
    assert document["no_power_control"]["0.2"]["rate"] == pytest.approx(1.0)


def test_effective_config_reloads_to_the_same_run(tmp_path):
    out = tmp_path / "out"
    original = parse_config(json.dumps(FOUR_STATE_CONFIG))
    assert run("sizing", write_config(tmp_path), out) == 0
    reloaded = parse_config((out / "effective_config.json").read_text())
    assert reloaded.to_dict() == original.to_dict()


def test_config_errors_carry_line_numbers():
    text = '{\n  "distribution": {"kind": "discrete", "atoms": [[1, 0, 1]]},\n  "p_avg": 0.5,\n  "eps": 1.5\n}'
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == 4
    assert str(excinfo.value).startswith("line 4:")

    with pytest.raises(ConfigError) as excinfo:
        parse_config('{\n  "p_avg": 0.5,\n  "eps": \n}')
    assert excinfo.value.line == 4

    with pytest.raises(ConfigError):
        parse_config('{"distribution": {"kind": "discrete", "atoms": [[1, 0, 0.5]]}, "p_avg": 1, "eps": 0.1}')


def test_repeated_keys_report_the_line_inside_their_block():
    config = json.loads(json.dumps(FOUR_STATE_CONFIG))
    config["policy"] = {"csi": "full"}
    config["simulate"]["horizon"] = 2000
    config["sizing"]["horizon"] = 0
    text = json.dumps(config, indent=2)
    lines = text.splitlines()
    sizing_line = next(i for i, line in enumerate(lines, 1) if line.strip().startswith('"sizing"'))
    horizon_lines = [i for i, line in enumerate(lines, 1) if '"horizon"' in line]
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert excinfo.value.line == horizon_lines[-1]
    assert excinfo.value.line > sizing_line
    assert "sizing.horizon" in str(excinfo.value)

    config["sizing"]["horizon"] = 1000
    config["policy"]["csi"] = "partial"
    text = json.dumps(config, indent=2)
    lines = text.splitlines()
    csi_lines = [i for i, line in enumerate(lines, 1) if '"csi"' in line]
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert len(csi_lines) == 2
    assert excinfo.value.line == csi_lines[1]


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json", encoding="utf-8")
    assert run("capacity", str(bad), tmp_path / "out") == 2
    infeasible = write_config(tmp_path, {"policy": {"target": 10.0}}, name="infeasible.json")
    assert run("policy", infeasible, tmp_path / "out") == 4
    assert run("capacity", write_config(tmp_path), tmp_path / "out", "--workers", "0") == 2


def test_error_hierarchy_exit_codes():
    assert ConfigError("x").exit_code == 2
    assert InvalidConfig("x").exit_code == 2
    assert NoConvergence("x", diagnostics={"lam": 1.0}).exit_code == 3
    for error in (InfeasibleOutage, InfeasibleRate, DomainError, Unreachable):
        assert error("x").exit_code == 4
    assert SecrecyOutageError("x").exit_code == 1
    assert isinstance(ConfigError("x"), ValueError)
