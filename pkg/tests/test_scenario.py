from __future__ import annotations

import json

import pytest

from adastream.errors import ScenarioError
from adastream.scenario import bundled_config_path, load_scenario, parse_scenario


def doc(**overrides):
    base = {
        "schema_version": 1,
        "scenario": "adaptive",
        "runs": 10,
        "run_duration_s": 30.0,
        "seed": 1,
    }
    base.update(overrides)
    return base


def test_bundled_configs_are_valid():
    for name in ("table3-static-lr", "table3-static-hr", "table3-adaptive"):
        config = load_scenario(bundled_config_path(name))
        assert config.runs == 100
        assert config.run_duration_us == 30_000_000
        assert config.reconfig_delay_us == 2_700_000
        assert set(config.space.names) == {"LR", "HR"}


def test_unknown_bundled_config_errors():
    with pytest.raises(ScenarioError):
        bundled_config_path("table9-missing")


def test_minimal_document_fills_defaults():
    config, diags = parse_scenario(doc())
    assert diags == []
    assert config.monitor_interval_us == 1_000_000
    assert config.reconfig_delay_us == 2_700_000
    assert config.trace.mean_mbps == 5.0
    assert config.warmup.duration_s == 10800.0
    assert config.initial_config == "HR"  # highest frame rate boots adaptive runs
    assert config.hysteresis_mbps == 0.0
    assert config.faults.windows == ()


def test_static_scenario_pins_initial_config():
    config, diags = parse_scenario(doc(scenario="static-LR"))
    assert diags == []
    assert config.initial_config == "LR"
    assert config.mode == "static"


def test_runs_must_be_at_least_one():
    config, diags = parse_scenario(doc(runs=0))
    assert config is None
    assert any("runs must be >= 1" in d for d in diags)


def test_static_scenario_must_name_a_config():
    config, diags = parse_scenario(doc(scenario="static-UHD"))
    assert config is None
    assert any("UHD" in d and "not in the adaptation space" in d for d in diags)


def test_override_target_must_resolve():
    config, diags = parse_scenario(doc(user_overrides=[{"at_s": 5.0, "target": "UHD"}]))
    assert config is None
    assert any("user_overrides[0].target" in d for d in diags)


def test_all_violations_reported_together():
    config, diags = parse_scenario(
        doc(
            runs=0,
            run_duration_s=-3,
            scenario="static-XX",
            seed="not-a-seed",
            monitor_interval_s=0,
            bogus_key=True,
        )
    )
    assert config is None
    assert len(diags) >= 6
    joined = "\n".join(diags)
    assert "runs" in joined and "run_duration_s" in joined and "XX" in joined
    assert "seed" in joined and "monitor_interval_s" in joined and "bogus_key" in joined


def test_schema_version_checked():
    config, diags = parse_scenario(doc(schema_version=2))
    assert config is None
    assert any("schema_version" in d for d in diags)


def test_warmup_window_bounds_checked():
    config, diags = parse_scenario(doc(warmup={"duration_s": 100.0, "start_s": 50.0, "end_s": 40.0}))
    assert config is None
    config, diags = parse_scenario(doc(warmup={"duration_s": 100.0, "start_s": 0.0, "end_s": 200.0}))
    assert config is None
    config, diags = parse_scenario(doc(warmup={"duration_s": 100.0, "start_s": 20.0, "end_s": 80.0}))
    assert config is not None and diags == []


def test_fault_windows_validated():
    bad_kind = doc(faults=[{"start_s": 0, "end_s": 10, "kind": "meteor-strike"}])
    config, diags = parse_scenario(bad_kind)
    assert config is None and any("kind" in d for d in diags)
    inverted = doc(faults=[{"start_s": 10, "end_s": 5, "kind": "probe-unavailable"}])
    config, diags = parse_scenario(inverted)
    assert config is None and any("start_s < end_s" in d for d in diags)


def test_custom_space_and_initial_config():
    space = [
        {"name": "tiny", "frame_rate": 10, "scale_w": 160, "scale_h": 120, "quality_score": 1.0},
        {"name": "big", "frame_rate": 50, "scale_w": 1280, "scale_h": 720, "quality_score": 0.1},
    ]
    config, diags = parse_scenario(doc(adaptation_space=space))
    assert diags == []
    assert config.initial_config == "big"
    config, diags = parse_scenario(doc(adaptation_space=space, initial_config="tiny"))
    assert diags == [] and config.initial_config == "tiny"
    config, diags = parse_scenario(doc(adaptation_space=space, initial_config="huge"))
    assert config is None


def test_overrides_rejected_for_static_runs():
    config, diags = parse_scenario(
        doc(scenario="static-LR", user_overrides=[{"at_s": 5.0, "target": "HR"}])
    )
    assert config is None
    assert any("require the adaptive scenario" in d for d in diags)


def test_load_scenario_bad_file(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(broken)
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps(doc(runs=0)))
    with pytest.raises(ScenarioError) as err:
        load_scenario(invalid)
    assert any("runs" in d for d in err.value.diagnostics)


def test_with_seed_replaces_only_the_seed():
    config, _ = parse_scenario(doc())
    reseeded = config.with_seed(99)
    assert reseeded.seed == 99
    assert reseeded.runs == config.runs
    assert reseeded.trace == config.trace


def test_run_duration_must_align_with_monitor_grid():
    config, diags = parse_scenario(doc(run_duration_s=30.0, monitor_interval_s=7.0))
    assert config is None
    assert any("whole multiple" in d for d in diags)
    config, diags = parse_scenario(doc(run_duration_s=31.5, monitor_interval_s=10.5))
    assert config is not None and diags == []


def test_non_finite_numbers_are_diagnosed_not_crashes():
    config, diags = parse_scenario(doc(run_duration_s=float("nan")))
    assert config is None and any("finite" in d for d in diags)
    config, diags = parse_scenario(doc(monitor_interval_s=float("inf")))
    assert config is None
    config, diags = parse_scenario(
        doc(faults=[{"start_s": float("nan"), "end_s": 10, "kind": "probe-unavailable"}])
    )
    assert config is None
    config, diags = parse_scenario(
        doc(adaptation_space=[{
            "name": "X", "frame_rate": float("inf"), "scale_w": 10, "scale_h": 10,
            "quality_score": 0.5,
        }])
    )
    assert config is None


def test_implausibly_large_experiments_are_rejected():
    config, diags = parse_scenario(doc(runs=10_000_000, run_duration_s=30.0))
    assert config is None
    assert any("trace samples" in d for d in diags)
    config, diags = parse_scenario(doc(run_duration_s=1e9))
    assert config is None
