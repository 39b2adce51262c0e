"""Deterministic simulated network environment.

Upload bandwidth over time is modeled as a clamped sinusoid plus Gaussian
noise, sampled at a fixed step:

    upload(t) = max(0, mean + amplitude * sin(2*pi*t / period) + N(0, noise_sd))

Everything here is a pure function of (parameters, seed): replays are
bit-identical, and probe noise is keyed on (seed, t) so a probe at a given
instant does not depend on call order.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean

from .errors import EmptyWindowError, InvalidTraceError, OutOfRangeError
from .units import format_seconds, to_us

FAULT_KINDS = ("probe-unavailable", "registry-unavailable")

TRACE_CSV_HEADER = ["t_seconds", "upload_mbps"]


@dataclass(frozen=True)
class BandwidthTrace:
    """Piecewise-constant upload speed: uploads[i] covers [i*step, (i+1)*step)."""

    uploads: tuple[float, ...]
    step_us: int
    seed: int | str | None = None

    def __post_init__(self) -> None:
        if self.step_us <= 0:
            raise InvalidTraceError(f"step must be positive, got {self.step_us} us")
        if not self.uploads:
            raise InvalidTraceError("trace must hold at least one sample")
        if any(u < 0 for u in self.uploads):
            raise InvalidTraceError("trace uploads must be non-negative")

    @property
    def duration_us(self) -> int:
        return len(self.uploads) * self.step_us

    def samples(self):
        """Yield (t_us, upload_mbps) pairs in time order."""
        for i, upload in enumerate(self.uploads):
            yield i * self.step_us, upload


@dataclass(frozen=True)
class FaultWindow:
    start_us: int
    end_us: int
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"fault kind must be one of {FAULT_KINDS}, got {self.kind!r}")
        if self.start_us >= self.end_us:
            raise ValueError(f"fault window start {self.start_us} must precede end {self.end_us}")


@dataclass(frozen=True)
class FaultSchedule:
    """Fault windows, non-overlapping per kind."""

    windows: tuple[FaultWindow, ...] = ()

    def __post_init__(self) -> None:
        for kind in FAULT_KINDS:
            spans = sorted(
                (w.start_us, w.end_us) for w in self.windows if w.kind == kind
            )
            for (_, prev_end), (start, _) in zip(spans, spans[1:]):
                if start < prev_end:
                    raise ValueError(f"overlapping {kind} fault windows")

    def active(self, kind: str, t_us: int) -> bool:
        return any(w.kind == kind and w.start_us <= t_us < w.end_us for w in self.windows)


@dataclass(frozen=True)
class SpeedSample:
    """One probe result; ok=False means the probe itself was unavailable."""

    t_us: int
    upload_mbps: float
    ok: bool

    def __post_init__(self) -> None:
        if self.ok and self.upload_mbps < 0:
            raise ValueError("upload must be non-negative on a healthy probe")


def generate_trace(
    mean: float,
    amplitude: float,
    period: float,
    noise_sd: float,
    duration: float,
    step: float,
    seed: int | str,
) -> BandwidthTrace:
    """Generate a seeded bandwidth trace covering [0, duration) at a fixed step."""
    if mean <= 0:
        raise InvalidTraceError(f"mean must be positive, got {mean}")
    if step <= 0:
        raise InvalidTraceError(f"step must be positive, got {step}")
    if duration < step:
        raise InvalidTraceError(f"duration {duration} must be at least one step {step}")
    if period <= 0:
        raise InvalidTraceError(f"period must be positive, got {period}")
    if noise_sd < 0:
        raise InvalidTraceError(f"noise_sd must be non-negative, got {noise_sd}")

    step_us = to_us(step)
    duration_us = to_us(duration)
    n = -(-duration_us // step_us)  # ceil: every instant below duration is covered
    rng = random.Random(seed)
    two_pi = 2.0 * math.pi
    uploads = []
    for i in range(n):
        t = i * step_us / 1e6
        value = mean + amplitude * math.sin(two_pi * t / period)
        if noise_sd > 0:
            value += rng.gauss(0.0, noise_sd)
        uploads.append(max(0.0, value))
    return BandwidthTrace(uploads=tuple(uploads), step_us=step_us, seed=seed)


def bandwidth_at(trace: BandwidthTrace, t: float) -> float:
    """Upload speed at time t (seconds): the enclosing step's sample, left-closed."""
    t_us = to_us(t)
    if not 0 <= t_us < trace.duration_us:
        raise OutOfRangeError(
            f"t={t}s outside trace [0, {trace.duration_us / 1e6}s)"
        )
    return trace.uploads[t_us // trace.step_us]


def probe(
    trace: BandwidthTrace,
    faults: FaultSchedule,
    t: float,
    probe_noise_sd: float,
    seed: int | str,
) -> SpeedSample:
    """Run the speed-test probe at time t.

    Inside a probe-unavailable fault window the result is ok=False. The
    measurement noise stream is keyed on (seed, t), so the same instant
    always yields the same sample.
    """
    t_us = to_us(t)
    if not 0 <= t_us < trace.duration_us:
        raise OutOfRangeError(f"t={t}s outside trace [0, {trace.duration_us / 1e6}s)")
    if faults.active("probe-unavailable", t_us):
        return SpeedSample(t_us=t_us, upload_mbps=0.0, ok=False)
    upload = trace.uploads[t_us // trace.step_us]
    if probe_noise_sd > 0:
        noise = random.Random(f"{seed}:{t_us}").gauss(0.0, probe_noise_sd)
        upload = max(0.0, upload + noise)
    return SpeedSample(t_us=t_us, upload_mbps=upload, ok=True)


def compute_threshold(trace: BandwidthTrace, warmup_start: float, warmup_end: float) -> float:
    """Mean upload speed over samples with warmup_start <= t < warmup_end."""
    start_us = to_us(warmup_start)
    end_us = to_us(warmup_end)
    if not 0 <= start_us < end_us <= trace.duration_us:
        raise EmptyWindowError(
            f"warmup window [{warmup_start}, {warmup_end}) invalid for trace of "
            f"{trace.duration_us / 1e6}s"
        )
    values = [u for t_us, u in trace.samples() if start_us <= t_us < end_us]
    if not values:
        raise EmptyWindowError(
            f"warmup window [{warmup_start}, {warmup_end}) selects no samples"
        )
    return fmean(values)


def trace_to_csv(trace: BandwidthTrace, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_CSV_HEADER)
        for t_us, upload in trace.samples():
            writer.writerow([format_seconds(t_us), f"{upload:.6f}"])


def trace_from_csv(path: str | Path) -> BandwidthTrace:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != TRACE_CSV_HEADER:
            raise InvalidTraceError(f"unexpected trace CSV header {header!r}")
        times_us: list[int] = []
        uploads: list[float] = []
        for row in reader:
            if not row:
                continue
            times_us.append(to_us(float(row[0])))
            uploads.append(float(row[1]))
    if not uploads:
        raise InvalidTraceError(f"trace CSV {path} holds no samples")
    step_us = times_us[1] - times_us[0] if len(times_us) > 1 else to_us(1.0)
    for i, t_us in enumerate(times_us):
        if t_us != i * step_us:
            raise InvalidTraceError(
                f"trace CSV times must advance by a constant step; row {i} has t={t_us}us"
            )
    return BandwidthTrace(uploads=tuple(uploads), step_us=step_us, seed=None)
