"""The autonomic controller: Monitor, Analyzer, Planner, Executor over a
shared knowledge base, plus the service registry.

The engine drives the components in-process on a discrete clock, one
message hop per pipeline stage per monitoring tick:

    monitor -> analyze -> plan -> register -> execute -> step

Components exchange immutable messages only and never share mutable
state; the knowledge base is touched solely by the engine (the
coordinator). The whole event sequence is a pure function of
(scenario config, seed).

Fail-safe rules: a faulted probe yields an "unknown" condition, which
never triggers adaptation; while the strategy registry is unavailable,
new strategies are dropped and the executor falls back to the last
applied configuration from the knowledge base, leaving the stream
running.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DuplicateServiceError, SimulationError, UnknownServiceError
from .kb import AdaptationSpace, AdaptationStrategy, KnowledgeBase, RunRecord
from .netsim import BandwidthTrace, FaultSchedule, compute_threshold, generate_trace, probe
from .scenario import ScenarioConfig
from .stream import StreamState
from .units import to_seconds

CONDITION_KINDS = ("above-threshold", "below-threshold", "unknown")

SERVICE_KINDS = ("monitor", "analyzer", "planner", "executor", "stream")

MAPE_SERVICE_KINDS = ("monitor", "analyzer", "planner", "executor")


@dataclass(frozen=True)
class MonitoredSample:
    """A speed-test reading as reported into the control loop."""

    t_us: int
    upload_mbps: float
    ok: bool


@dataclass(frozen=True)
class Condition:
    """The analyzer's model of the operating conditions at one instant."""

    kind: str
    at_us: int

    def __post_init__(self) -> None:
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"condition kind must be one of {CONDITION_KINDS}, got {self.kind!r}")


@dataclass
class ServiceRecord:
    name: str
    kind: str
    registered: bool = True
    last_heartbeat_us: int = 0

    def __post_init__(self) -> None:
        if self.kind not in SERVICE_KINDS:
            raise ValueError(f"service kind must be one of {SERVICE_KINDS}, got {self.kind!r}")


class ServiceRegistry:
    """Tracks which service instances are registered and recently alive."""

    def __init__(self) -> None:
        self._records: dict[str, ServiceRecord] = {}

    def register(self, record: ServiceRecord) -> None:
        existing = self._records.get(record.name)
        if existing is not None and existing.registered:
            raise DuplicateServiceError(f"service {record.name!r} already registered")
        record.registered = True
        self._records[record.name] = record

    def deregister(self, name: str) -> None:
        record = self._records.get(name)
        if record is None or not record.registered:
            raise UnknownServiceError(f"cannot deregister unknown service {name!r}")
        record.registered = False

    def heartbeat(self, name: str, t_us: int) -> None:
        record = self._records.get(name)
        if record is None or not record.registered:
            raise UnknownServiceError(f"cannot heartbeat unknown service {name!r}")
        record.last_heartbeat_us = t_us

    def list_available(self, now_us: int, ttl_us: int) -> list[ServiceRecord]:
        """Registered services whose heartbeat is within ttl of now."""
        return [
            r
            for r in self._records.values()
            if r.registered and now_us - r.last_heartbeat_us <= ttl_us
        ]


def analyze(sample: MonitoredSample, threshold: float) -> Condition:
    """Classify a sample against the threshold; faulted samples are unknown.

    Ties go above-threshold (prefer the higher quality of service).
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    if not sample.ok:
        return Condition(kind="unknown", at_us=sample.t_us)
    kind = "above-threshold" if sample.upload_mbps >= threshold else "below-threshold"
    return Condition(kind=kind, at_us=sample.t_us)


class Analyzer:
    """Stateful analysis service: bare threshold plus an optional hysteresis band.

    With band == 0 (the default) this is exactly `analyze`. With a band,
    readings inside [threshold - band, threshold + band) keep the previous
    classification, suppressing flip-flop near the boundary.
    """

    def __init__(self, threshold: float, hysteresis_band: float = 0.0):
        if threshold <= 0:
            raise ValueError(f"threshold must be positive, got {threshold}")
        if hysteresis_band < 0:
            raise ValueError(f"hysteresis band must be non-negative, got {hysteresis_band}")
        self.threshold = threshold
        self.band = hysteresis_band
        self._last_kind: str | None = None

    def evaluate(self, sample: MonitoredSample) -> Condition:
        if not sample.ok:
            return Condition(kind="unknown", at_us=sample.t_us)
        if self.band == 0.0:
            condition = analyze(sample, self.threshold)
        elif sample.upload_mbps >= self.threshold + self.band:
            condition = Condition(kind="above-threshold", at_us=sample.t_us)
        elif sample.upload_mbps < self.threshold - self.band:
            condition = Condition(kind="below-threshold", at_us=sample.t_us)
        elif self._last_kind is not None:
            condition = Condition(kind=self._last_kind, at_us=sample.t_us)
        else:
            condition = analyze(sample, self.threshold)
        self._last_kind = condition.kind
        return condition


def plan(
    condition: Condition, space: AdaptationSpace, current: str, next_id: int
) -> AdaptationStrategy | None:
    """Decide whether a new strategy is needed; None means keep the current config.

    Above-threshold selects the highest-frame-rate config, below-threshold
    the lowest; unknown conditions never trigger adaptation. No strategy is
    issued when the selected target already matches the current config.
    """
    if current not in space:
        raise ValueError(f"current config {current!r} not in adaptation space")
    if condition.kind == "unknown":
        return None
    if condition.kind == "above-threshold":
        target = max(space.configs, key=lambda c: c.frame_rate)
    else:
        target = min(space.configs, key=lambda c: c.frame_rate)
    if target.name == current:
        return None
    return AdaptationStrategy(
        id=next_id, issued_at_us=condition.at_us, target=target.name, reason=condition.kind
    )


class Monitor:
    """Connection speed-test service: wraps the probe on the monitoring grid."""

    def __init__(
        self,
        trace: BandwidthTrace,
        faults: FaultSchedule,
        probe_noise_sd: float,
        probe_seed: int | str,
        interval_us: int,
    ):
        if interval_us <= 0:
            raise ValueError(f"monitor interval must be positive, got {interval_us}")
        self._trace = trace
        self._faults = faults
        self._probe_noise_sd = probe_noise_sd
        self._probe_seed = probe_seed
        self._interval_us = interval_us

    def tick(self, t_us: int) -> MonitoredSample:
        if t_us % self._interval_us != 0:
            raise ValueError(
                f"monitor tick at {t_us}us is off the {self._interval_us}us grid"
            )
        sample = probe(
            self._trace, self._faults, to_seconds(t_us), self._probe_noise_sd, self._probe_seed
        )
        return MonitoredSample(t_us=sample.t_us, upload_mbps=sample.upload_mbps, ok=sample.ok)


@dataclass(frozen=True)
class ExecuteOutcome:
    source: str  # "registry" | "fallback"
    strategy_id: int | None
    target: str | None
    applied: bool


class Executor:
    """Adaptation execution service: turns the latest strategy into a stream command."""

    def __init__(self, space: AdaptationSpace, reconfig_delay_us: int):
        self._space = space
        self._reconfig_delay_us = reconfig_delay_us

    def execute(self, kb: KnowledgeBase, stream: StreamState, registry_available: bool) -> ExecuteOutcome:
        if not registry_available:
            # Degraded mode: hold the last-known configuration; never halt the stream.
            return ExecuteOutcome(
                source="fallback", strategy_id=None, target=kb.last_applied, applied=False
            )
        latest = kb.latest_strategy()
        if latest is None:
            return ExecuteOutcome(source="registry", strategy_id=None, target=None, applied=False)
        if latest.target == stream.effective_config.name:
            return ExecuteOutcome(
                source="registry", strategy_id=latest.id, target=latest.target, applied=False
            )
        stream.apply_config(self._space.config(latest.target), self._reconfig_delay_us)
        kb.last_applied = latest.target
        return ExecuteOutcome(
            source="registry", strategy_id=latest.id, target=latest.target, applied=True
        )


@dataclass
class EngineResult:
    records: tuple[RunRecord, ...]
    events: list[dict]
    kb: KnowledgeBase
    threshold_mbps: float
    space: AdaptationSpace
    config: ScenarioConfig


class Engine:
    """Drives the full loop over a scenario: one deterministic discrete-event clock."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.space = config.space
        total_s = to_seconds(config.total_duration_us)
        shape = config.trace
        self.trace = generate_trace(
            mean=shape.mean_mbps,
            amplitude=shape.amplitude_mbps,
            period=shape.period_s,
            noise_sd=shape.noise_sd_mbps,
            duration=total_s,
            step=shape.step_s,
            seed=f"{config.seed}/trace",
        )
        # Same trace model, disjoint seed stream: the measurement period
        # preceding the experiment.
        warmup_trace = generate_trace(
            mean=shape.mean_mbps,
            amplitude=shape.amplitude_mbps,
            period=shape.period_s,
            noise_sd=shape.noise_sd_mbps,
            duration=config.warmup.duration_s,
            step=shape.step_s,
            seed=f"{config.seed}/warmup",
        )
        self.threshold_mbps = compute_threshold(
            warmup_trace, config.warmup.start_s, config.warmup.end_s
        )
        self.kb = KnowledgeBase(
            threshold_mbps=self.threshold_mbps, last_applied=config.initial_config
        )
        self.stream = StreamState(self.space.config(config.initial_config))
        self.registry = ServiceRegistry()
        for name, kind in (
            ("speed-test", "monitor"),
            ("runtime-analysis", "analyzer"),
            ("video-adaptation", "planner"),
            ("video-streaming-control", "executor"),
            ("video-streaming", "stream"),
        ):
            self.registry.register(ServiceRecord(name=name, kind=kind))
        self.monitor = Monitor(
            trace=self.trace,
            faults=config.faults,
            probe_noise_sd=config.probe_noise_sd_mbps,
            probe_seed=f"{config.seed}/probe",
            interval_us=config.monitor_interval_us,
        )
        self.analyzer = Analyzer(self.threshold_mbps, config.hysteresis_mbps)
        self.executor = Executor(self.space, config.reconfig_delay_us)
        self._ran = False

    def run(self) -> EngineResult:
        if self._ran:
            raise SimulationError("engine already ran; build a fresh Engine to replay")
        self._ran = True
        available_kinds = {
            r.kind for r in self.registry.list_available(now_us=0, ttl_us=self.config.monitor_interval_us)
        }
        missing = [k for k in MAPE_SERVICE_KINDS if k not in available_kinds]
        if missing:
            raise SimulationError(f"cannot start loop; unregistered services: {missing}")

        cfg = self.config
        events: list[dict] = []
        seq = 0

        def emit(run: int, t_us: int, event: str, **fields) -> None:
            nonlocal seq
            events.append({"seq": seq, "run": run, "t_us": t_us, "event": event, **fields})
            seq += 1

        adaptive = cfg.mode == "adaptive"
        overrides = list(cfg.user_overrides)
        next_override = 0
        next_id = 1
        records: list[RunRecord] = []

        for run_index in range(cfg.runs):
            self.stream.start_run()
            offset = 0
            while offset < cfg.run_duration_us:
                t_us = run_index * cfg.run_duration_us + offset
                for service in self.registry.list_available(t_us, ttl_us=cfg.monitor_interval_us * 2):
                    self.registry.heartbeat(service.name, t_us)

                sample = self.monitor.tick(t_us)
                emit(run_index, t_us, "monitor", upload_mbps=sample.upload_mbps, ok=sample.ok)

                condition = self.analyzer.evaluate(sample)
                emit(run_index, t_us, "analyze", condition=condition.kind)

                current = self.stream.effective_config.name
                strategy = None
                forced_target: str | None = None
                while next_override < len(overrides) and overrides[next_override].at_us <= t_us:
                    forced_target = overrides[next_override].target
                    next_override += 1
                if forced_target is not None:
                    if forced_target != current:
                        strategy = AdaptationStrategy(
                            id=next_id, issued_at_us=t_us, target=forced_target, reason="user-config"
                        )
                elif adaptive:
                    strategy = plan(condition, self.space, current, next_id)
                if strategy is None:
                    emit(run_index, t_us, "plan", action="keep")
                else:
                    emit(
                        run_index, t_us, "plan",
                        action="strategy", target=strategy.target, reason=strategy.reason,
                    )

                registry_available = not cfg.faults.active("registry-unavailable", t_us)
                if strategy is not None:
                    if registry_available:
                        self.kb.register_strategy(strategy)
                        next_id += 1
                        emit(
                            run_index, t_us, "register",
                            ok=True, strategy_id=strategy.id, target=strategy.target,
                        )
                    else:
                        # Strategy dropped: the registry cannot store it.
                        emit(
                            run_index, t_us, "register",
                            ok=False, strategy_id=None, target=strategy.target,
                        )

                outcome = self.executor.execute(self.kb, self.stream, registry_available)
                emit(
                    run_index, t_us, "execute",
                    source=outcome.source, strategy_id=outcome.strategy_id,
                    target=outcome.target, applied=outcome.applied,
                )

                dt_us = min(cfg.monitor_interval_us, cfg.run_duration_us - offset)
                step_outcome = self.stream.step(dt_us)
                emit(
                    run_index, t_us, "step",
                    dt_us=dt_us, reconfig_us=step_outcome.reconfig_us,
                    segments=[[name, us] for name, us in step_outcome.segments],
                    active=self.stream.active.name,
                )
                offset += dt_us

            record = self.stream.finalize_run(cfg.scenario, run_index, cfg.run_duration_us)
            records.append(record)
            self.kb.append_run_record(record)

        return EngineResult(
            records=tuple(records),
            events=events,
            kb=self.kb,
            threshold_mbps=self.threshold_mbps,
            space=self.space,
            config=cfg,
        )


def run_loop(config: ScenarioConfig) -> EngineResult:
    """Build an engine for the scenario and run it to completion."""
    return Engine(config).run()
