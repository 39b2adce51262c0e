"""Experiment runner: drive one scenario end-to-end and write its artifacts.

Per experiment the out directory receives:

    runs.csv     per-run ledger (6-decimal fixed seconds)
    events.jsonl one JSON object per control-loop event
    report.csv   metric x quality-preset grid, 2-decimal cells
    report.txt   the same grid, aligned, plus threshold and selection lines

Every byte of these artifacts is a pure function of (config, seed).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import SimulationError
from .kb import RunRecord
from .mapek import EngineResult, run_loop
from .metrics import (
    QUALITY_PRESETS,
    REPORT_METRICS,
    PerformanceReport,
    aggregate,
    config_quality_score,
    render_report_csv,
    render_report_text,
    selection_fractions,
)
from .scenario import ScenarioConfig
from .units import format_seconds, to_us

logger = logging.getLogger(__name__)

RUNS_CSV_FIXED_COLUMNS = ["run", "scenario", "duration_s", "reconfig_s", "switches"]


def runs_csv_text(records: tuple[RunRecord, ...], config_names: tuple[str, ...]) -> str:
    header = RUNS_CSV_FIXED_COLUMNS + [f"seconds_{name}" for name in config_names]
    lines = [",".join(header)]
    for r in records:
        row = [
            str(r.run_index),
            r.scenario,
            format_seconds(r.duration_us),
            format_seconds(r.reconfig_us),
            str(r.switches),
        ]
        row += [format_seconds(r.streamed_us.get(name, 0)) for name in config_names]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def events_jsonl_text(events: list[dict]) -> str:
    return "".join(json.dumps(e, separators=(",", ":")) + "\n" for e in events)


def parse_runs_csv(path: str | Path) -> tuple[list[RunRecord], tuple[str, ...]]:
    """Rebuild run records (and the config-name column order) from runs.csv."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise SimulationError(f"{path} is empty")
    header = lines[0].split(",")
    if header[: len(RUNS_CSV_FIXED_COLUMNS)] != RUNS_CSV_FIXED_COLUMNS:
        raise SimulationError(f"{path} has unexpected header {header!r}")
    names = tuple(col[len("seconds_"):] for col in header[len(RUNS_CSV_FIXED_COLUMNS):])
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        try:
            # zero columns are padding for configs the run never streamed
            streamed = {
                name: us
                for i, name in enumerate(names)
                if (us := to_us(float(cells[len(RUNS_CSV_FIXED_COLUMNS) + i]))) > 0
            }
            records.append(
                RunRecord(
                    run_index=int(cells[0]),
                    scenario=cells[1],
                    duration_us=to_us(float(cells[2])),
                    reconfig_us=to_us(float(cells[3])),
                    switches=int(cells[4]),
                    streamed_us=streamed,
                )
            )
        except (ValueError, IndexError, OverflowError) as exc:
            raise SimulationError(f"{path}:{lineno}: malformed run row: {exc}") from exc
    return records, names


def _selection_lines(result: EngineResult, report: PerformanceReport) -> list[str]:
    lines = [f"threshold_mbps: {result.threshold_mbps:.6f}"]
    seconds_fractions = {}
    for name in result.space.names:
        run_frac, sec_frac = selection_fractions(result.records, result.space, name)
        seconds_fractions[name] = sec_frac
        lines.append(
            f"selection {name}: {100 * run_frac:.1f}% of runs (dominant), "
            f"{100 * sec_frac:.1f}% of streamed seconds"
        )
    if result.config.mode == "adaptive":
        # closed-form prediction from the aggregate streamed-time mix, next to
        # the measured mean (mean-of-ratios); they agree only approximately
        for preset, qw in QUALITY_PRESETS.items():
            model = sum(
                frac * config_quality_score(result.space.config(name), result.space, qw)
                for name, frac in seconds_fractions.items()
            )
            measured = report.presets[preset].qp_mean
            lines.append(f"qp {preset}: mix-model {model:.4f}, measured {measured:.4f}")
    return lines


def run_experiment(config: ScenarioConfig, out_dir: str | Path) -> PerformanceReport:
    """Run the scenario and write runs.csv, events.jsonl, report.csv, report.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_loop(config)
    report = aggregate(result.records, result.space)

    (out / "runs.csv").write_text(
        runs_csv_text(result.records, result.space.names), encoding="utf-8", newline=""
    )
    (out / "events.jsonl").write_text(
        events_jsonl_text(result.events), encoding="utf-8", newline=""
    )
    (out / "report.csv").write_text(render_report_csv(report), encoding="utf-8", newline="")
    (out / "report.txt").write_text(
        render_report_text(report, extra_lines=_selection_lines(result, report)),
        encoding="utf-8",
        newline="",
    )
    logger.info(
        "scenario %s: %d runs, threshold %.3f Mbps, tp_mean %.4f",
        config.scenario, config.runs, result.threshold_mbps, report.tp_mean,
    )
    return report


def parse_report_csv(path: str | Path) -> dict[str, dict[str, float]]:
    """Read a report grid back as {metric: {preset: value}}."""
    lines = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line]
    if not lines or not lines[0].startswith("metric,"):
        raise SimulationError(f"{path} is not a report grid")
    presets = lines[0].split(",")[1:]
    grid: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        try:
            grid[cells[0]] = {p: float(v) for p, v in zip(presets, cells[1:])}
        except ValueError as exc:
            raise SimulationError(f"{path}:{lineno}: malformed report cell: {exc}") from exc
    missing = [m for m in REPORT_METRICS if m not in grid]
    if missing:
        raise SimulationError(f"{path} is missing metric rows {missing}")
    return grid


@dataclass
class ScenarioArtifacts:
    """One experiment's outputs, as read back from its out directory."""

    label: str
    grid: dict[str, dict[str, float]]
    records: list[RunRecord]
    config_names: tuple[str, ...]

    @classmethod
    def load(cls, out_dir: str | Path) -> "ScenarioArtifacts":
        out = Path(out_dir)
        grid = parse_report_csv(out / "report.csv")
        records, names = parse_runs_csv(out / "runs.csv")
        if not records:
            raise SimulationError(f"{out} holds no run records")
        return cls(label=records[0].scenario, grid=grid, records=records, config_names=names)


@dataclass
class Comparison:
    artifacts: list[ScenarioArtifacts]
    # (p-metric, preset) -> winning scenario label, or "tie"
    verdicts: dict[tuple[str, str], str]
    # adaptive scenario's per-config (run fraction, seconds fraction)
    adaptive_selection: dict[str, tuple[float, float]]


def compare(artifact_dirs: list[str | Path]) -> Comparison:
    """Side-by-side comparison of scenario outputs (canonically LR, HR, adaptive)."""
    artifacts = [ScenarioArtifacts.load(d) for d in artifact_dirs]
    presets = [list(a.grid["tp"].keys()) for a in artifacts]
    if any(p != presets[0] for p in presets):
        raise SimulationError(f"reports use different quality presets: {presets}")
    if len({a.label for a in artifacts}) != len(artifacts):
        raise SimulationError("comparison needs distinct scenarios")

    verdicts: dict[tuple[str, str], str] = {}
    for metric in ("p1", "p2", "p3"):
        for preset in presets[0]:
            best = max(a.grid[metric][preset] for a in artifacts)
            winners = [a.label for a in artifacts if a.grid[metric][preset] == best]
            verdicts[(metric, preset)] = winners[0] if len(winners) == 1 else "tie"

    adaptive_selection: dict[str, tuple[float, float]] = {}
    for art in artifacts:
        if art.label != "adaptive":
            continue
        total_runs = len(art.records)
        streamed_total = sum(r.streamed_total_us for r in art.records)
        for name in art.config_names:
            dominated = sum(
                1
                for r in art.records
                if max(art.config_names, key=lambda n: (r.streamed_us.get(n, 0), -art.config_names.index(n))) == name
            )
            at_name = sum(r.streamed_us.get(name, 0) for r in art.records)
            adaptive_selection[name] = (
                dominated / total_runs,
                at_name / streamed_total if streamed_total else 0.0,
            )
    return Comparison(artifacts=artifacts, verdicts=verdicts, adaptive_selection=adaptive_selection)


def render_comparison(cmp: Comparison) -> str:
    presets = list(cmp.artifacts[0].grid["tp"].keys())
    width = 8
    out = []
    header1 = "metric".ljust(width)
    header2 = " " * width
    for art in cmp.artifacts:
        header1 += art.label.rjust(width * len(presets))
        header2 += "".join(p.rjust(width) for p in presets)
    out.append(header1)
    out.append(header2)
    for metric in REPORT_METRICS:
        row = metric.ljust(width)
        for art in cmp.artifacts:
            row += "".join(f"{art.grid[metric][p]:.2f}".rjust(width) for p in presets)
        out.append(row)
    out.append("")
    out.append("best scenario per combined-performance cell:")
    for metric in ("p1", "p2", "p3"):
        cells = "  ".join(f"{p}={cmp.verdicts[(metric, p)]}" for p in presets)
        out.append(f"  {metric}: {cells}")
    if cmp.adaptive_selection:
        out.append("")
        out.append("adaptive selection:")
        for name, (run_frac, sec_frac) in cmp.adaptive_selection.items():
            out.append(
                f"  {name}: {100 * run_frac:.1f}% of runs (dominant), "
                f"{100 * sec_frac:.1f}% of streamed seconds"
            )
    return "\n".join(out) + "\n"
