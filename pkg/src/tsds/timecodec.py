"""Offset algebra between "units since epoch" doubles and ISO-8601 timestamps.

Calendar is UTC proleptic Gregorian with no leap seconds; offsets are plain
float64 multiples of the unit. Accepted timestamp grammar for query literals
is the subset ``YYYY-MM-DD[Thh:mm:ss[.ffffff]]``; epoch strings inside a
units attribute are parsed more permissively (space or ``T`` separator,
single-digit fields, fractional seconds).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import datetime, timedelta

from .errors import BadEpoch, BadTimestamp, UnknownUnit

UNIT_SECONDS = {
    "seconds": 1.0,
    "minutes": 60.0,
    "hours": 3600.0,
    "days": 86400.0,
}

_TIMESTAMP_RE = re.compile(
    r"(?P<y>\d{4})-(?P<m>\d{2})-(?P<d>\d{2})"
    r"(?:T(?P<H>\d{2}):(?P<M>\d{2}):(?P<S>\d{2})(?:\.(?P<f>\d{1,6}))?)?\Z"
)

# permissive epoch form: "1989-01-01", "1989-01-01 00:00:0.0", "2000-01-01T06:00:00Z"
_EPOCH_RE = re.compile(
    r"(?P<y>\d{4})-(?P<m>\d{1,2})-(?P<d>\d{1,2})"
    r"(?:[T ](?P<H>\d{1,2}):(?P<M>\d{1,2})(?::(?P<S>\d{1,2})(?:\.(?P<f>\d+))?)?)?"
    r"Z?\Z"
)


@dataclass(frozen=True)
class TimeEncoding:
    """One of the four supported offset units plus a UTC epoch."""

    unit: str
    epoch: datetime

    def __post_init__(self):
        if self.unit not in UNIT_SECONDS:
            raise UnknownUnit(f"unsupported time unit {self.unit!r}")

    @property
    def unit_seconds(self) -> float:
        return UNIT_SECONDS[self.unit]


def parse_time_units(s: str) -> TimeEncoding:
    """Parse a units attribute such as ``minutes since 1989-01-01 00:00:0.0``."""
    if " since " not in s:
        raise UnknownUnit(f"units string {s!r} lacks a ' since ' separator")
    unit_word, epoch_text = s.split(" since ", 1)
    unit = unit_word.strip().lower()
    if unit not in UNIT_SECONDS:
        raise UnknownUnit(f"unknown time unit {unit_word.strip()!r}")
    m = _EPOCH_RE.match(epoch_text.strip())
    if m is None:
        raise BadEpoch(f"cannot parse epoch {epoch_text.strip()!r}")
    try:
        micro = int((m.group("f") or "0").ljust(6, "0")[:6])
        epoch = datetime(
            int(m.group("y")), int(m.group("m")), int(m.group("d")),
            int(m.group("H") or 0), int(m.group("M") or 0), int(m.group("S") or 0),
            micro,
        )
    except ValueError as exc:
        raise BadEpoch(f"invalid epoch {epoch_text.strip()!r}: {exc}") from None
    return TimeEncoding(unit, epoch)


def format_time_units(enc: TimeEncoding) -> str:
    return f"{enc.unit} since {format_timestamp(enc.epoch)}"


def parse_timestamp(s: str) -> datetime:
    """Strict ISO-8601 subset parser; date-only means midnight UTC."""
    m = _TIMESTAMP_RE.match(s)
    if m is None:
        raise BadTimestamp(f"cannot parse timestamp {s!r}")
    try:
        micro = int((m.group("f") or "0").ljust(6, "0"))
        return datetime(
            int(m.group("y")), int(m.group("m")), int(m.group("d")),
            int(m.group("H") or 0), int(m.group("M") or 0), int(m.group("S") or 0),
            micro,
        )
    except ValueError as exc:
        raise BadTimestamp(f"invalid timestamp {s!r}: {exc}") from None


def format_timestamp(dt: datetime) -> str:
    """Render ``YYYY-MM-DDThh:mm:ss`` with fractional seconds only when nonzero."""
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        return base + f".{dt.microsecond:06d}".rstrip("0")
    return base


def to_offset(dt: datetime, enc: TimeEncoding) -> float:
    return (dt - enc.epoch).total_seconds() / enc.unit_seconds


def from_offset(x: float, enc: TimeEncoding) -> datetime:
    if not math.isfinite(x):
        raise BadTimestamp(f"offset {x!r} is not finite")
    # round to whole microseconds so the inverse stays within a microsecond
    try:
        return enc.epoch + timedelta(microseconds=round(x * enc.unit_seconds * 1e6))
    except (OverflowError, OSError) as exc:
        raise BadTimestamp(f"offset {x!r} out of calendar range") from exc


def time_to_offset(t: str, enc: TimeEncoding) -> float:
    return to_offset(parse_timestamp(t), enc)


def offset_to_time(x: float, enc: TimeEncoding) -> str:
    return format_timestamp(from_offset(x, enc))
