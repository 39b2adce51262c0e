"""Simulation time units.

All internal bookkeeping runs on integer microseconds so that time
accounting is exact (streamed + reconfiguring == elapsed, always).
Float seconds appear only at the boundaries: config files, CSV exports,
and the public helpers below.
"""

from __future__ import annotations

US_PER_SECOND = 1_000_000


def to_us(seconds: float) -> int:
    """Convert seconds to integer microseconds (nearest)."""
    return round(seconds * US_PER_SECOND)


def to_seconds(us: int) -> float:
    """Convert integer microseconds back to float seconds."""
    return us / US_PER_SECOND


def format_seconds(us: int) -> str:
    """Fixed six-decimal rendering of a microsecond count, for CSV output."""
    sign = "-" if us < 0 else ""
    whole, frac = divmod(abs(us), US_PER_SECOND)
    return f"{sign}{whole}.{frac:06d}"
