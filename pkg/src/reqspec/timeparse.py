"""Time-phrase refinement.

Maps a raw time span onto one of five shapes: Always, a sliding Window,
a day-of-week Recurrence with a start/end clock, a forward Horizon, or
Unknown (which downstream always turns into a clarification request,
never into a formula).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import normalize


@dataclass(frozen=True)
class Always:
    def to_dict(self):
        return {"kind": "always"}


@dataclass(frozen=True)
class Window:
    duration: int  # seconds, > 0

    def to_dict(self):
        return {"kind": "window", "seconds": self.duration}


@dataclass(frozen=True)
class Recurrence:
    days: tuple[int, ...]  # 0=Mon .. 6=Sun, sorted, non-empty
    start: int  # seconds of day
    end: int  # seconds of day, start < end < 86400

    def to_dict(self):
        return {
            "kind": "recurrence",
            "days": list(self.days),
            "start": self.start,
            "end": self.end,
        }


@dataclass(frozen=True)
class Horizon:
    duration: int  # seconds, > 0

    def to_dict(self):
        return {"kind": "horizon", "seconds": self.duration}


@dataclass(frozen=True)
class Unknown:
    raw: str

    def to_dict(self):
        return {"kind": "unknown", "raw": self.raw}


TimeSpec = Always | Window | Recurrence | Horizon | Unknown


def timespec_from_dict(d: dict) -> TimeSpec:
    kind = d.get("kind")
    if kind == "always":
        return Always()
    if kind == "window":
        return Window(d["seconds"])
    if kind == "recurrence":
        return Recurrence(tuple(d["days"]), d["start"], d["end"])
    if kind == "horizon":
        return Horizon(d["seconds"])
    if kind == "unknown":
        return Unknown(d["raw"])
    raise ValueError(f"bad timespec dict: {d!r}")


_UNIT_SECONDS = {
    "second": 1,
    "minute": 60,
    "hour": 3600,
    "day": 86400,
    "week": 7 * 86400,
}

_ALWAYS_PHRASES = {
    "always",
    "at all times",
    "all the time",
    "anytime",
    "any time",
    "every day",
    "everyday",
    "for every day",
    "daily",
}

_WINDOW_RE = re.compile(
    r"^(?:in\s+)?(?:any\s+)?(\d+(?:\.\d+)?)\s*"
    r"(second|minute|hour|day|week)s?(?:\s+period)?$"
)

_HORIZON_RE = re.compile(
    r"^(?:for\s+)?(?:the\s+)?next\s+(\d+(?:\.\d+)?)\s*"
    r"(second|minute|hour|day|week)s?$"
)

_RECURRENCE_RE = re.compile(
    r"^(?:(?:on|during)\s+)?(?:(?P<days>[a-z ,]+?)\s+)?"
    r"(?:from|between)\s+(?P<a>[\d: ]*?[\d][\d: ]*(?:\s*(?:am|pm))?)\s+"
    r"(?:to|and|until)\s+(?P<b>[\d: ]*?[\d][\d: ]*(?:\s*(?:am|pm))?)$"
)

_DAY_NAMES = {
    "monday": 0,
    "tuesday": 1,
    "wednesday": 2,
    "thursday": 3,
    "friday": 4,
    "saturday": 5,
    "sunday": 6,
    "mon": 0,
    "tue": 1,
    "tues": 1,
    "wed": 2,
    "thu": 3,
    "thur": 3,
    "thurs": 3,
    "fri": 4,
    "sat": 5,
    "sun": 6,
}

ALL_DAYS = (0, 1, 2, 3, 4, 5, 6)
WEEKDAYS = (0, 1, 2, 3, 4)
WEEKENDS = (5, 6)


def _parse_days(spec: str | None) -> tuple[int, ...] | None:
    """Day-set grammar; None on failure, all days when the spec is absent."""
    if spec is None or not spec.strip():
        return ALL_DAYS
    s = spec.strip()
    if s in ("weekdays", "weekday", "every weekday"):
        return WEEKDAYS
    if s in ("weekends", "weekend"):
        return WEEKENDS
    if s in ("every day", "everyday", "daily", "all days"):
        return ALL_DAYS
    days: set[int] = set()
    for word in re.split(r"[, ]+|\band\b", s):
        word = word.strip()
        if not word or word == "and":
            continue
        day = _DAY_NAMES.get(word.rstrip("s") if word.endswith("s") else word)
        if day is None:
            day = _DAY_NAMES.get(word)
        if day is None:
            return None
        days.add(day)
    return tuple(sorted(days)) if days else None


_CLOCK_RE = re.compile(r"^(\d{1,2})(?::(\d{2}))?\s*(am|pm)?$")


def _parse_clock(text: str) -> int | None:
    """Clock time to seconds-of-day; 12-hour with am/pm or 24-hour."""
    m = _CLOCK_RE.match(text.strip())
    if not m:
        return None
    hour = int(m.group(1))
    minute = int(m.group(2) or 0)
    meridiem = m.group(3)
    if minute > 59:
        return None
    if meridiem:
        if not 1 <= hour <= 12:
            return None
        if meridiem == "am":
            hour = 0 if hour == 12 else hour
        else:
            hour = 12 if hour == 12 else hour + 12
    elif hour > 23:
        return None
    return hour * 3600 + minute * 60


def _whole_seconds(amount: str, unit: str) -> int | None:
    seconds = float(amount) * _UNIT_SECONDS[unit]
    if seconds <= 0 or seconds != int(seconds):
        return None
    return int(seconds)


def refine_time(raw: str) -> TimeSpec:
    """Classify a raw time phrase; total, Unknown is the fallback."""
    phrase = normalize(raw)
    if not phrase:
        return Unknown(raw)

    if phrase in _ALWAYS_PHRASES:
        return Always()

    m = _WINDOW_RE.match(phrase)
    if m:
        seconds = _whole_seconds(m.group(1), m.group(2))
        return Window(seconds) if seconds else Unknown(raw)

    m = _HORIZON_RE.match(phrase)
    if m:
        seconds = _whole_seconds(m.group(1), m.group(2))
        return Horizon(seconds) if seconds else Unknown(raw)

    m = _RECURRENCE_RE.match(phrase)
    if m:
        days = _parse_days(m.group("days"))
        start = _parse_clock(m.group("a"))
        end = _parse_clock(m.group("b"))
        if days and start is not None and end is not None and 0 <= start < end < 86400:
            return Recurrence(days, start, end)
        return Unknown(raw)

    return Unknown(raw)
