from __future__ import annotations

import json

from adastream.cli import main
from adastream.scenario import bundled_config_path


def test_run_and_compare_round_trip(tmp_path, capsys):
    config = {
        "schema_version": 1,
        "scenario": "adaptive",
        "runs": 2,
        "run_duration_s": 10.0,
        "seed": 3,
        "warmup": {"duration_s": 60.0, "start_s": 0.0, "end_s": 60.0},
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(config))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "runs.csv").exists()
    captured = capsys.readouterr()
    assert "adaptive" in captured.out


def test_run_seed_override_changes_outputs(tmp_path):
    path = str(bundled_config_path("table3-adaptive"))
    assert main(["run", path, "--out", str(tmp_path / "a"), "--seed", "1"]) == 0
    assert main(["run", path, "--out", str(tmp_path / "b"), "--seed", "2"]) == 0
    assert (tmp_path / "a" / "events.jsonl").read_bytes() != (tmp_path / "b" / "events.jsonl").read_bytes()


def test_validate_good_config(capsys):
    assert main(["validate", str(bundled_config_path("table3-static-lr"))]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_reports_every_diagnostic(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema_version": 1, "scenario": "adaptive", "runs": 0}))
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "runs must be >= 1" in err
    assert "run_duration_s" in err
    assert "seed" in err


def test_validate_unreadable_and_malformed(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "missing.json")]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{oops")
    assert main(["validate", str(broken)]) == 1


def test_run_with_invalid_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema_version": 1, "scenario": "adaptive", "runs": 0}))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1
    assert "config error" in capsys.readouterr().err


def test_compare_full_pipeline(tmp_path, capsys):
    for name, label in (("lr", "table3-static-lr"), ("hr", "table3-static-hr")):
        small = json.loads(bundled_config_path(label).read_text())
        small["runs"] = 2
        small["warmup"] = {"duration_s": 60.0, "start_s": 0.0, "end_s": 60.0}
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(small))
        assert main(["run", str(p), "--out", str(tmp_path / name)]) == 0
    adaptive = json.loads(bundled_config_path("table3-adaptive").read_text())
    adaptive["runs"] = 2
    p = tmp_path / "ad.json"
    p.write_text(json.dumps(adaptive))
    assert main(["run", str(p), "--out", str(tmp_path / "ad")]) == 0
    capsys.readouterr()
    out_file = tmp_path / "comparison.txt"
    code = main([
        "compare", str(tmp_path / "lr"), str(tmp_path / "hr"), str(tmp_path / "ad"),
        "--out", str(out_file),
    ])
    assert code == 0
    table = capsys.readouterr().out
    assert "static-LR" in table and "adaptive" in table
    assert out_file.read_text() == table


def test_compare_with_missing_dir_exits_two(tmp_path, capsys):
    assert main(["compare", str(tmp_path / "x"), str(tmp_path / "y"), str(tmp_path / "z")]) == 2
