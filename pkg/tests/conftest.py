from __future__ import annotations

import pytest

from adastream.scenario import parse_scenario


def make_scenario(**overrides):
    """Small valid scenario document, patched by keyword."""
    doc = {
        "schema_version": 1,
        "scenario": "adaptive",
        "runs": 4,
        "run_duration_s": 30.0,
        "monitor_interval_s": 1.0,
        "reconfig_delay_s": 2.7,
        "trace": {
            "mean_mbps": 5.0,
            "amplitude_mbps": 2.0,
            "period_s": 61.0,
            "noise_sd_mbps": 0.05,
            "step_s": 1.0,
        },
        "probe_noise_sd_mbps": 0.05,
        "warmup": {"duration_s": 600.0, "start_s": 27.0, "end_s": 65.0},
        "faults": [],
        "seed": 42,
    }
    doc.update(overrides)
    config, diags = parse_scenario(doc)
    assert config is not None, f"fixture scenario invalid: {diags}"
    return config


@pytest.fixture
def scenario_factory():
    return make_scenario
