"""Tests for TOML config parsing and validation."""

from pathlib import Path

import pytest

from gtbo.config import (
    DEFAULT_NOISE_STD,
    OUTPUT_ROOT_ENV,
    ConfigError,
    load_config,
    parse_config,
)


def minimal_raw(**overrides):
    raw = {
        "seeds": [0, 1],
        "output_dir": "results/run",
        "benchmark": {"name": "levy4", "ambient_dim": 16},
    }
    raw.update(overrides)
    return raw


def test_minimal_config_with_defaults():
    cfg = parse_config(minimal_raw())
    assert cfg.method == "gtbo"
    assert cfg.seeds == (0, 1)
    assert cfg.benchmark_name == "levy4"
    assert cfg.noise_std == DEFAULT_NOISE_STD["levy4"]
    assert cfg.default_mode == "center"
    assert cfg.gt.particles == 10_000
    assert cfg.gt.prior_q == 0.05
    assert cfg.bo.budget == 100
    assert cfg.sweep is None


def test_griewank_defaults_to_random_default_point():
    cfg = parse_config(minimal_raw(benchmark={"name": "griewank8", "ambient_dim": 20}))
    assert cfg.default_mode == "random"
    assert cfg.noise_std == DEFAULT_NOISE_STD["griewank8"]


def test_gt_and_bo_blocks_applied():
    raw = minimal_raw(
        gt={"max_tests": 50, "particles": 500, "prior_q": 0.1},
        bo={"budget": 7, "inactive_prior_mu": 5.0, "total_budget": 120},
    )
    cfg = parse_config(raw)
    assert cfg.gt.max_tests == 50
    assert cfg.gt.particles == 500
    assert cfg.gt.prior_q == 0.1
    assert cfg.bo.budget == 7
    assert cfg.bo.priors.inactive_mu == 5.0
    assert cfg.total_budget == 120


@pytest.mark.parametrize(
    "raw",
    [
        minimal_raw(method="annealing"),
        minimal_raw(seeds=[]),
        minimal_raw(seeds=["a"]),
        minimal_raw(output_dir=""),
        minimal_raw(benchmark={"name": "levy4"}),  # missing ambient_dim
        minimal_raw(benchmark={"name": "levy4", "ambient_dim": 2}),  # < base dim
        minimal_raw(benchmark={"name": "nosuch", "ambient_dim": 16}),
        minimal_raw(benchmark={"name": "levy4", "ambient_dim": 16, "noise_std": -1}),
        minimal_raw(
            benchmark={"name": "levy4", "ambient_dim": 16, "default_mode": "corner"}
        ),
        minimal_raw(gt={"prior_q": 2.0}),
        minimal_raw(bo={"budget": -1}),
        minimal_raw(bo={"total_budget": 0}),
        minimal_raw(sweep={"axis": "bogus", "values": [1]}),
        minimal_raw(sweep={"axis": "noise_std", "values": []}),
    ],
)
def test_invalid_configs_rejected(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.toml")


def test_load_config_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("seeds = [0,\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_load_config_round_trip(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(
        "method = \"gtbo\"\n"
        "seeds = [3]\n"
        "output_dir = \"out\"\n"
        "[benchmark]\n"
        "name = \"branin2\"\n"
        "ambient_dim = 12\n"
        "noise_std = 0.0\n"
        "[gt]\n"
        "max_tests = 40\n"
        "[bo]\n"
        "budget = 5\n"
    )
    cfg = load_config(p)
    assert cfg.benchmark_name == "branin2"
    assert cfg.noise_std == 0.0
    assert cfg.gt.max_tests == 40


def test_output_root_env_reroots_relative_paths(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path))
    cfg = parse_config(minimal_raw())
    assert cfg.output_dir == tmp_path / "results/run"
    # absolute paths are untouched
    cfg_abs = parse_config(minimal_raw(output_dir="/data/run"))
    assert cfg_abs.output_dir == Path("/data/run")


def test_with_axis_value_all_axes():
    cfg = parse_config(minimal_raw())
    assert cfg.with_axis_value("noise_std", 1.0).noise_std == 1.0
    assert cfg.with_axis_value("ambient_dim", 50).ambient_dim == 50
    assert cfg.with_axis_value("active_dim", 8).benchmark_name == "levy8"
    assert cfg.with_axis_value("max_batch", 2).gt.max_batch == 2
    assert cfg.with_axis_value("prior_q", 0.2).gt.prior_q == 0.2
    assert cfg.with_axis_value("max_act", 6).gt.max_act == 6
    assert cfg.with_axis_value("particles", 777).gt.particles == 777
    assert cfg.with_axis_value("inactive_prior_mu", 4.0).bo.priors.inactive_mu == 4.0
    with pytest.raises(ConfigError):
        cfg.with_axis_value("bogus", 1)


def test_active_dim_sweep_requires_generic_benchmark():
    cfg = parse_config(minimal_raw(benchmark={"name": "hartmann6", "ambient_dim": 16}))
    with pytest.raises(ConfigError):
        cfg.with_axis_value("active_dim", 8)


def test_sweep_block_parsed():
    cfg = parse_config(
        minimal_raw(sweep={"axis": "noise_std", "values": [0.01, 0.1, 1.0]})
    )
    assert cfg.sweep.axis == "noise_std"
    assert cfg.sweep.values == (0.01, 0.1, 1.0)
