"""The output specification dialect: build, render, and parse.

A formula is a single bounded or unbounded "globally" over one
comparison predicate, optionally guarded by a day-of-week recurrence
window. The concrete grammar (normative, see docs/FORMATS.md):

    formula := "G" [ "[" nat "," nat "]" ] SP "(" body ")"
    body    := guard | pred | "!(" pred ")"
    guard   := "in_window(" days "," nat "," nat ")" SP "->" SP "(" pred_n ")"
    pred_n  := pred | "!(" pred ")"
    pred    := ident [ "{" ident "}" ] "@" ident SP cmp SP value
    cmp     := "<=" | ">=" | "<" | ">" | "=="
    value   := decimal [ SP unit ] | "level(" ident "," nat ")"
    days    := day | day "-" day | day ("|" day)+

``render_formal`` emits the canonical spelling; ``parse_formula`` is its
inverse and rejects everything else, reporting a character position.
Negation appears only around equality predicates (bound comparisons
absorb negation by flipping).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .errors import FormulaSyntaxError, IncompleteFrame, UnknownTime
from .extract import (
    CmpOp,
    Comparison,
    KeywordFrame,
    NumberValue,
    OrdinalValue,
    frame_missing,
)
from .model import normalize
from .timeparse import Always, Horizon, Recurrence, Unknown, Window

DAY_ABBR = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
DAY_FULL = (
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday",
)


@dataclass(frozen=True)
class LevelValue:
    scale: str  # identifier form of the scale name
    index: int


@dataclass(frozen=True)
class Predicate:
    entity: str
    quantifier: str | None
    location: str
    cmp: str
    value: NumberValue | LevelValue


@dataclass(frozen=True)
class Not:
    body: Predicate


@dataclass(frozen=True)
class Guard:
    days: tuple[int, ...]
    start: int
    end: int
    body: Predicate | Not


@dataclass(frozen=True)
class Globally:
    interval: tuple[int, int] | None
    body: Predicate | Not | Guard


SpecFormula = Globally


def ident(text: str) -> str:
    """Identifier form of a slot value: normalized, underscores for gaps."""
    s = re.sub(r"[^a-z0-9]+", "_", normalize(text)).strip("_")
    if not s:
        return "unnamed"
    if not re.search(r"[a-z_]", s):
        return f"x{s}"
    return s


def build_formula(frame: KeywordFrame) -> Globally:
    """Deterministic translation of a complete frame (rules M-1..M-6)."""
    missing = frame_missing(frame)
    if missing:
        raise IncompleteFrame(missing)
    spec = frame.time.spec
    if isinstance(spec, Unknown):
        raise UnknownTime(f"time phrase {spec.raw!r} was never refined")

    comparison = frame.condition.comparison
    if isinstance(comparison.value, OrdinalValue):
        value: NumberValue | LevelValue = LevelValue(
            ident(comparison.value.scale), comparison.value.index
        )
    else:
        value = comparison.value

    pred = Predicate(
        entity=ident(frame.entity.text),
        quantifier=ident(frame.quantifier.text) if frame.quantifier else None,
        location=ident(frame.location.text),
        cmp=comparison.op,
        value=value,
    )
    body: Predicate | Not = Not(pred) if comparison.negated else pred

    if isinstance(spec, Always):
        return Globally(None, body)
    if isinstance(spec, Window):
        return Globally((0, spec.duration), body)
    if isinstance(spec, Horizon):
        return Globally((0, spec.duration), body)
    return Globally(None, Guard(spec.days, spec.start, spec.end, body))


# --------------------------------------------------------------------------
# Rendering


def render_days(days: tuple[int, ...]) -> str:
    ds = tuple(sorted(set(days)))
    if len(ds) == 1:
        return DAY_ABBR[ds[0]]
    if ds == tuple(range(ds[0], ds[-1] + 1)):
        return f"{DAY_ABBR[ds[0]]}-{DAY_ABBR[ds[-1]]}"
    return "|".join(DAY_ABBR[d] for d in ds)


def _render_value(value: NumberValue | LevelValue) -> str:
    if isinstance(value, LevelValue):
        return f"level({value.scale},{value.index})"
    text = str(value.magnitude)
    return f"{text} {value.unit}" if value.unit else text


def _render_pred(node: Predicate | Not) -> str:
    if isinstance(node, Not):
        return f"!({_render_pred(node.body)})"
    p = node
    quant = f"{{{p.quantifier}}}" if p.quantifier else ""
    return f"{p.entity}{quant}@{p.location} {p.cmp} {_render_value(p.value)}"


def render_formal(formula: Globally) -> str:
    head = "G"
    if formula.interval is not None:
        lo, hi = formula.interval
        head += f"[{lo},{hi}]"
    body = formula.body
    if isinstance(body, Guard):
        inner = (
            f"in_window({render_days(body.days)},{body.start},{body.end})"
            f" -> ({_render_pred(body.body)})"
        )
    else:
        inner = _render_pred(body)
    return f"{head} ({inner})"


# --------------------------------------------------------------------------
# Friendly rendering

_OP_WORDS = {
    CmpOp.LE: "at most",
    CmpOp.GE: "at least",
    CmpOp.LT: "below",
    CmpOp.GT: "above",
    CmpOp.EQ: "exactly",
}


def _duration_adjective(seconds: int) -> str:
    if seconds % 3600 == 0:
        return f"{seconds // 3600}-hour"
    if seconds % 60 == 0:
        return f"{seconds // 60}-minute"
    return f"{seconds}-second"


def _duration_plain(seconds: int) -> str:
    for size, unit in ((3600, "hour"), (60, "minute"), (1, "second")):
        if seconds % size == 0:
            n = seconds // size
            return f"{n} {unit}" + ("s" if n != 1 else "")
    return f"{seconds} seconds"


def _days_friendly(days: tuple[int, ...]) -> str:
    ds = tuple(sorted(set(days)))
    if len(ds) == 7:
        return "every day"
    if len(ds) == 1:
        return DAY_FULL[ds[0]]
    if ds == tuple(range(ds[0], ds[-1] + 1)):
        return f"{DAY_FULL[ds[0]]} to {DAY_FULL[ds[-1]]}"
    names = [DAY_FULL[d] for d in ds]
    return ", ".join(names[:-1]) + f" and {names[-1]}"


def _clock(seconds: int) -> str:
    return f"{seconds // 3600:02d}:{(seconds % 3600) // 60:02d}"


def render_friendly(frame: KeywordFrame, formula: Globally) -> str:
    """Plain-English restatement; every slot value appears verbatim."""
    comparison = frame.condition.comparison
    value = comparison.value
    if isinstance(value, OrdinalValue):
        value_text = f"'{value.level}' on the {value.scale} scale"
    else:
        value_text = f"{value.magnitude} {value.unit}".rstrip()

    out = f"Entity '{frame.entity.text}'"
    if frame.quantifier:
        out += f" of '{frame.quantifier.text}'"
    out += f" at '{frame.location.text}'"
    if comparison.negated:
        out += f" must not be {_OP_WORDS[comparison.op]} {value_text}"
    else:
        out += f" must be {_OP_WORDS[comparison.op]} {value_text}"

    spec = frame.time.spec
    if isinstance(spec, Always):
        out += " at all times"
    elif isinstance(spec, Window):
        out += f" over any {_duration_adjective(spec.duration)} window"
    elif isinstance(spec, Horizon):
        out += f" for the next {_duration_plain(spec.duration)}"
    elif isinstance(spec, Recurrence):
        out += (
            f" on {_days_friendly(spec.days)} between"
            f" {_clock(spec.start)} and {_clock(spec.end)}"
        )
    return out + "."


# --------------------------------------------------------------------------
# Parsing

_IDENT_RE = re.compile(r"[a-z0-9_]+")
_NAT_RE = re.compile(r"\d+")
_DECIMAL_RE = re.compile(r"-?\d+(?:\.\d+)?")
_UNIT_RE = re.compile(r"[^\s()]+")
_DAY_RE = re.compile(r"Mon|Tue|Wed|Thu|Fri|Sat|Sun")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise FormulaSyntaxError(message, self.pos if pos is None else pos)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, lit: str) -> bool:
        return self.text.startswith(lit, self.pos)

    def take(self, lit: str) -> bool:
        if self.peek(lit):
            self.pos += len(lit)
            return True
        return False

    def expect(self, lit: str):
        if not self.take(lit):
            self.error(f"expected {lit!r}")

    def space(self):
        if self.eof() or not self.text[self.pos].isspace():
            self.error("expected whitespace")
        self.skip_ws()

    def skip_ws(self):
        while not self.eof() and self.text[self.pos].isspace():
            self.pos += 1

    def regex(self, pattern: re.Pattern, what: str) -> str:
        m = pattern.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def nat(self) -> int:
        return int(self.regex(_NAT_RE, "a natural number"))

    def identifier(self) -> str:
        at = self.pos
        name = self.regex(_IDENT_RE, "an identifier")
        if not re.search(r"[a-z_]", name):
            self.error("identifier needs at least one letter", at)
        return name


def _parse_days(s: _Scanner) -> tuple[int, ...]:
    def one() -> int:
        return DAY_ABBR.index(s.regex(_DAY_RE, "a day abbreviation"))

    at = s.pos
    first = one()
    if s.take("-"):
        last = one()
        if last <= first:
            s.error("day range out of order", at)
        return tuple(range(first, last + 1))
    days = [first]
    while s.take("|"):
        days.append(one())
    if len(set(days)) != len(days):
        s.error("duplicate day", at)
    return tuple(sorted(days))


def _parse_value(s: _Scanner) -> NumberValue | LevelValue:
    if s.take("level("):
        scale = s.identifier()
        s.expect(",")
        index = s.nat()
        s.expect(")")
        return LevelValue(scale, index)
    at = s.pos
    literal = s.regex(_DECIMAL_RE, "a decimal value")
    try:
        magnitude = Decimal(literal)
    except InvalidOperation:  # pragma: no cover - regex guards this
        s.error("bad decimal", at)
    mark = s.pos
    s.skip_ws()
    if s.pos > mark and not s.eof() and s.text[s.pos] != ")":
        unit = s.regex(_UNIT_RE, "a unit")
        return NumberValue(magnitude, unit)
    s.pos = mark
    return NumberValue(magnitude, "")


def _parse_pred(s: _Scanner) -> Predicate:
    entity = s.identifier()
    quantifier = None
    if s.take("{"):
        quantifier = s.identifier()
        s.expect("}")
    s.expect("@")
    location = s.identifier()
    s.space()
    for op in CmpOp.ALL:
        if s.take(op):
            break
    else:
        s.error("expected a comparison operator")
    s.space()
    value = _parse_value(s)
    return Predicate(entity, quantifier, location, op, value)


def _parse_pred_or_neg(s: _Scanner) -> Predicate | Not:
    if s.take("!("):
        s.skip_ws()
        pred = _parse_pred(s)
        s.skip_ws()
        s.expect(")")
        return Not(pred)
    return _parse_pred(s)


def parse_formula(text: str) -> Globally:
    """Parse canonical formula text; inverse of :func:`render_formal`."""
    s = _Scanner(text)
    s.skip_ws()
    s.expect("G")

    interval = None
    if s.take("["):
        at = s.pos
        lo = s.nat()
        s.expect(",")
        hi = s.nat()
        s.expect("]")
        if lo > hi:
            s.error(f"interval [{lo},{hi}] out of order", at)
        interval = (lo, hi)

    s.space()
    s.expect("(")
    s.skip_ws()

    body: Predicate | Not | Guard
    if s.take("in_window("):
        at = s.pos
        days = _parse_days(s)
        s.expect(",")
        start = s.nat()
        s.expect(",")
        end = s.nat()
        s.expect(")")
        if not (0 <= start < end < 86400):
            s.error(f"window {start}..{end} is not a valid daily range", at)
        s.skip_ws()
        s.expect("->")
        s.skip_ws()
        s.expect("(")
        s.skip_ws()
        inner = _parse_pred_or_neg(s)
        s.skip_ws()
        s.expect(")")
        body = Guard(days, start, end, inner)
    else:
        body = _parse_pred_or_neg(s)

    s.skip_ws()
    s.expect(")")
    s.skip_ws()
    if not s.eof():
        s.error("trailing characters after formula")
    return Globally(interval, body)
