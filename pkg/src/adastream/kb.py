"""Domain types, the adaptation-strategy registry, and the knowledge base.

The knowledge base is the one mutable store in the system. Everything it
holds (strategies, run records) is an immutable value, appended in order
and never rewritten, so any reader observes only fully-constructed
entries. A single coordinator owns the instance; components reach it
through that coordinator only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidRunError, MalformedStoreError, NonMonotonicIdError

STORE_SCHEMA_VERSION = 1

STRATEGY_REASONS = ("below-threshold", "above-threshold", "user-config")

# Stored model parameters for per-frame quality, one per default config.
# Not derived from resolution; the metrics module consumes them as-is.
LR_QUALITY_SCORE = 0.99
HR_QUALITY_SCORE = 0.20


@dataclass(frozen=True)
class StreamConfig:
    """One point in the adaptation space: a (frame rate, scale, quality) setting."""

    name: str
    frame_rate: int
    scale_w: int
    scale_h: int
    quality_score: float

    def __post_init__(self) -> None:
        if self.frame_rate <= 0:
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.scale_w <= 0 or self.scale_h <= 0:
            raise ValueError(f"scale must be positive, got {self.scale_w}x{self.scale_h}")
        if not 0.0 <= self.quality_score <= 1.0:
            raise ValueError(f"quality_score must be in [0, 1], got {self.quality_score}")


@dataclass(frozen=True)
class AdaptationSpace:
    """The finite, ordered set of configurations the planner may select among."""

    configs: tuple[StreamConfig, ...]

    def __post_init__(self) -> None:
        if not self.configs:
            raise ValueError("adaptation space must not be empty")
        names = [c.name for c in self.configs]
        if len(set(names)) != len(names):
            raise ValueError(f"config names must be unique, got {names}")

    @property
    def max_frame_rate(self) -> int:
        # Recomputed on every access; never stored, so it cannot go stale.
        return max(c.frame_rate for c in self.configs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.configs)

    def config(self, name: str) -> StreamConfig:
        for c in self.configs:
            if c.name == name:
                return c
        raise ValueError(f"unknown config {name!r}; space has {list(self.names)}")

    def __contains__(self, name: object) -> bool:
        return any(c.name == name for c in self.configs)


def default_space() -> AdaptationSpace:
    """The default two-point adaptation space: low rate and high rate."""
    return AdaptationSpace(
        configs=(
            StreamConfig("LR", frame_rate=30, scale_w=320, scale_h=240, quality_score=LR_QUALITY_SCORE),
            StreamConfig("HR", frame_rate=60, scale_w=720, scale_h=480, quality_score=HR_QUALITY_SCORE),
        )
    )


@dataclass(frozen=True)
class AdaptationStrategy:
    """A timestamped decision to move the stream to a target configuration."""

    id: int
    issued_at_us: int
    target: str
    reason: str

    def __post_init__(self) -> None:
        if self.reason not in STRATEGY_REASONS:
            raise ValueError(f"reason must be one of {STRATEGY_REASONS}, got {self.reason!r}")


@dataclass(frozen=True)
class RunRecord:
    """Per-run ledger: how the run's elapsed time was spent.

    All durations are integer microseconds. The constructor enforces the
    accounting identity: streamed seconds (summed over configs) plus
    reconfiguration time must equal the run duration exactly.
    """

    run_index: int
    scenario: str
    duration_us: int
    reconfig_us: int
    switches: int
    streamed_us: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.duration_us <= 0:
            raise InvalidRunError(f"run duration must be positive, got {self.duration_us} us")
        if not 0 <= self.reconfig_us <= self.duration_us:
            raise InvalidRunError(
                f"reconfig time {self.reconfig_us} us outside [0, {self.duration_us}] us"
            )
        streamed = sum(self.streamed_us.values())
        if streamed != self.duration_us - self.reconfig_us:
            raise InvalidRunError(
                f"time accounting broken: streamed {streamed} + reconfig {self.reconfig_us} "
                f"!= duration {self.duration_us}"
            )

    @property
    def streamed_total_us(self) -> int:
        return sum(self.streamed_us.values())


class KnowledgeBase:
    """Append-only store of strategies, run records, and shared loop state."""

    def __init__(self, threshold_mbps: float | None = None, last_applied: str | None = None):
        self._strategies: list[AdaptationStrategy] = []
        self._run_records: list[RunRecord] = []
        self.threshold_mbps = threshold_mbps
        self.last_applied = last_applied

    @property
    def strategies(self) -> tuple[AdaptationStrategy, ...]:
        return tuple(self._strategies)

    @property
    def run_records(self) -> tuple[RunRecord, ...]:
        return tuple(self._run_records)

    def register_strategy(self, strategy: AdaptationStrategy) -> None:
        """Append a strategy. Ids must strictly increase in insertion order."""
        if self._strategies and strategy.id <= self._strategies[-1].id:
            raise NonMonotonicIdError(
                f"strategy id {strategy.id} not greater than last id {self._strategies[-1].id}"
            )
        self._strategies.append(strategy)

    def latest_strategy(self) -> AdaptationStrategy | None:
        """The highest-id strategy, or None when the registry is empty.

        This is the fault-tolerance fallback read path: it never fails once
        the registry holds at least one entry, and absence is a value.
        """
        return self._strategies[-1] if self._strategies else None

    def append_run_record(self, record: RunRecord) -> None:
        if record.duration_us <= 0:
            raise InvalidRunError(f"run duration must be positive, got {record.duration_us}")
        self._run_records.append(record)

    # -- persistence ---------------------------------------------------

    def to_document(self) -> dict:
        return {
            "schema_version": STORE_SCHEMA_VERSION,
            "threshold_mbps": self.threshold_mbps,
            "last_applied": self.last_applied,
            "strategies": [
                {"id": s.id, "issued_at_us": s.issued_at_us, "target": s.target, "reason": s.reason}
                for s in self._strategies
            ],
            "run_records": [
                {
                    "run_index": r.run_index,
                    "scenario": r.scenario,
                    "duration_us": r.duration_us,
                    "reconfig_us": r.reconfig_us,
                    "switches": r.switches,
                    "streamed_us": dict(r.streamed_us),
                }
                for r in self._run_records
            ],
        }

    def persist(self, path: str | Path) -> None:
        """Write the store as a single self-describing JSON document."""
        Path(path).write_text(
            json.dumps(self.to_document(), indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_document(cls, doc: dict) -> "KnowledgeBase":
        try:
            version = doc["schema_version"]
            if version != STORE_SCHEMA_VERSION:
                raise MalformedStoreError(
                    f"unsupported store schema version {version!r}, expected {STORE_SCHEMA_VERSION}"
                )
            kb = cls(threshold_mbps=doc["threshold_mbps"], last_applied=doc["last_applied"])
            for s in doc["strategies"]:
                kb.register_strategy(
                    AdaptationStrategy(
                        id=s["id"], issued_at_us=s["issued_at_us"], target=s["target"], reason=s["reason"]
                    )
                )
            for r in doc["run_records"]:
                kb.append_run_record(
                    RunRecord(
                        run_index=r["run_index"],
                        scenario=r["scenario"],
                        duration_us=r["duration_us"],
                        reconfig_us=r["reconfig_us"],
                        switches=r["switches"],
                        streamed_us=dict(r["streamed_us"]),
                    )
                )
            return kb
        except MalformedStoreError:
            raise
        except (KeyError, TypeError, ValueError, InvalidRunError, NonMonotonicIdError) as exc:
            raise MalformedStoreError(f"malformed store document: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "KnowledgeBase":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedStoreError(f"cannot read store file {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedStoreError(f"store file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise MalformedStoreError(f"store file {path} does not hold a JSON object")
        return cls.from_document(doc)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (
            self._strategies == other._strategies
            and self._run_records == other._run_records
            and self.threshold_mbps == other.threshold_mbps
            and self.last_applied == other.last_applied
        )
