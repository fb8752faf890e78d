"""Token-level slot labeling and keyword-frame extraction.

Labeling is deterministic: longest-match lookup against the knowledge
base vocabulary first, then alignment against stored sentence patterns
for any kind the vocabulary did not resolve. Ties break by longer span,
then earlier position, then SlotKind declaration order. The module also
refines time spans, detects comparison polarity around the condition
span, and parses condition values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation

from .errors import AmbiguousPolarity, UnparseableCondition
from .kb import KnowledgeBase, Pattern
from .model import Requirement, SlotKind, Token, normalize, tokenize
from .timeparse import Always, TimeSpec, Unknown, refine_time, timespec_from_dict

# --------------------------------------------------------------------------
# Comparison values


class CmpOp:
    LE = "<="
    GE = ">="
    LT = "<"
    GT = ">"
    EQ = "=="

    ALL = ("<=", ">=", "<", ">", "==")


# Standalone negation flips bounds; equality keeps the op and sets a flag.
NEGATION_FLIP = {
    CmpOp.LE: CmpOp.GT,
    CmpOp.GT: CmpOp.LE,
    CmpOp.GE: CmpOp.LT,
    CmpOp.LT: CmpOp.GE,
    CmpOp.EQ: CmpOp.EQ,
}


@dataclass(frozen=True)
class NumberValue:
    magnitude: Decimal
    unit: str = ""  # opaque unit text, possibly empty

    def to_dict(self):
        return {"type": "number", "magnitude": str(self.magnitude), "unit": self.unit}


@dataclass(frozen=True)
class OrdinalValue:
    level: str
    scale: str
    index: int

    def to_dict(self):
        return {
            "type": "ordinal",
            "level": self.level,
            "scale": self.scale,
            "index": self.index,
        }


@dataclass(frozen=True)
class Comparison:
    op: str  # one of CmpOp.ALL
    value: NumberValue | OrdinalValue
    negated: bool = False  # only meaningful for EQ

    def to_dict(self):
        return {"op": self.op, "negated": self.negated, "value": self.value.to_dict()}


def _comparison_from_dict(d: dict) -> Comparison:
    v = d["value"]
    if v["type"] == "number":
        value = NumberValue(Decimal(v["magnitude"]), v["unit"])
    else:
        value = OrdinalValue(v["level"], v["scale"], v["index"])
    return Comparison(d["op"], value, d["negated"])


# --------------------------------------------------------------------------
# Frame slots


class Provenance:
    EXTRACTED = "extracted"
    CLARIFIED = "clarified"
    CORRECTED = "corrected"
    DEFAULTED = "defaulted"


@dataclass(frozen=True)
class SlotValue:
    text: str
    provenance: str = Provenance.EXTRACTED
    start: int | None = None
    end: int | None = None

    def to_dict(self):
        return {
            "text": self.text,
            "provenance": self.provenance,
            "start": self.start,
            "end": self.end,
        }


@dataclass(frozen=True)
class TimeSlot:
    text: str | None
    spec: TimeSpec
    provenance: str = Provenance.EXTRACTED

    def to_dict(self):
        return {
            "text": self.text,
            "provenance": self.provenance,
            "spec": self.spec.to_dict(),
        }


@dataclass(frozen=True)
class ConditionSlot:
    text: str
    comparison: Comparison | None
    provenance: str = Provenance.EXTRACTED

    def to_dict(self):
        return {
            "text": self.text,
            "provenance": self.provenance,
            "comparison": self.comparison.to_dict() if self.comparison else None,
        }


@dataclass(frozen=True)
class KeywordFrame:
    """The five slots plus polarity; the bridge between text and formula."""

    entity: SlotValue | None = None
    quantifier: SlotValue | None = None
    location: SlotValue | None = None
    time: TimeSlot | None = None
    condition: ConditionSlot | None = None

    def to_dict(self):
        return {
            "entity": self.entity.to_dict() if self.entity else None,
            "quantifier": self.quantifier.to_dict() if self.quantifier else None,
            "location": self.location.to_dict() if self.location else None,
            "time": self.time.to_dict() if self.time else None,
            "condition": self.condition.to_dict() if self.condition else None,
        }

    @property
    def complete(self) -> bool:
        return not frame_missing(self)


def frame_from_dict(d: dict) -> KeywordFrame:
    def slot(v):
        return SlotValue(v["text"], v["provenance"], v["start"], v["end"]) if v else None

    time = None
    if d.get("time"):
        t = d["time"]
        time = TimeSlot(t["text"], timespec_from_dict(t["spec"]), t["provenance"])
    cond = None
    if d.get("condition"):
        c = d["condition"]
        comparison = _comparison_from_dict(c["comparison"]) if c["comparison"] else None
        cond = ConditionSlot(c["text"], comparison, c["provenance"])
    return KeywordFrame(
        entity=slot(d.get("entity")),
        quantifier=slot(d.get("quantifier")),
        location=slot(d.get("location")),
        time=time,
        condition=cond,
    )


# Clarification order: location first, then time, condition, entity.
# The quantifier is never required for completeness.
CLARIFY_ORDER = (SlotKind.LOCATION, SlotKind.TIME, SlotKind.CONDITION, SlotKind.ENTITY)


def frame_missing(frame: KeywordFrame) -> list[SlotKind]:
    """Slots still needed before the frame can become a formula."""
    missing = []
    if frame.location is None:
        missing.append(SlotKind.LOCATION)
    if frame.time is None or isinstance(frame.time.spec, Unknown):
        missing.append(SlotKind.TIME)
    if frame.condition is None or frame.condition.comparison is None:
        missing.append(SlotKind.CONDITION)
    if frame.entity is None:
        missing.append(SlotKind.ENTITY)
    return missing


# --------------------------------------------------------------------------
# BIO labeling


def spans_from_bio(tags: list[str]) -> list[tuple[SlotKind, int, int]]:
    spans = []
    start = None
    kind = None
    for i, tag in enumerate(tags):
        if tag.startswith("B-"):
            if start is not None:
                spans.append((kind, start, i))
            kind = SlotKind.from_name(tag[2:])
            start = i
        elif tag.startswith("I-"):
            continue
        else:
            if start is not None:
                spans.append((kind, start, i))
                start, kind = None, None
    if start is not None:
        spans.append((kind, start, len(tags)))
    return spans


def _gazetteer_candidates(norm: list[str], kb: KnowledgeBase):
    n = len(norm)
    limit = min(kb.max_phrase_tokens, n)
    for i in range(n):
        for length in range(min(limit, n - i), 0, -1):
            phrase = " ".join(norm[i : i + length])
            kind = kb.lookup_phrase(phrase)
            if kind is not None:
                yield length, i, kind


_MAX_GAP = 8


def _match_pattern(
    pattern: Pattern, norm: list[str]
) -> dict[SlotKind, tuple[int, int]] | None:
    """Anchored alignment of a pattern against normalized tokens.

    Placeholders absorb 1.._MAX_GAP tokens, shortest first, so the
    result is deterministic. Returns kind -> token span, or None.
    """
    elems = pattern.match_elements
    n = len(norm)
    memo: dict[tuple[int, int], dict | None] = {}

    def walk(pi: int, ti: int):
        key = (pi, ti)
        if key in memo:
            return memo[key]
        if pi == len(elems):
            memo[key] = {} if ti == n else None
            return memo[key]
        op, payload = elems[pi]
        result = None
        if op == "lit":
            if ti < n and norm[ti] == payload:
                rest = walk(pi + 1, ti + 1)
                if rest is not None:
                    result = rest
        else:
            for gap in range(1, min(_MAX_GAP, n - ti) + 1):
                rest = walk(pi + 1, ti + gap)
                if rest is not None:
                    result = dict(rest)
                    result[payload] = (ti, ti + gap)
                    break
        memo[key] = result
        return result

    return walk(0, 0)


def label(tokens: list[Token], kb: KnowledgeBase) -> list[str]:
    """BIO tags over ``tokens``; unmatched tokens get O."""
    if not tokens:
        return []
    norm = [normalize(t.surface) for t in tokens]
    n = len(norm)
    occupied = [False] * n
    selected: list[tuple[SlotKind, int, int]] = []

    ranked = sorted(
        _gazetteer_candidates(norm, kb),
        key=lambda c: (-c[0], c[1], c[2].order),
    )
    for length, i, kind in ranked:
        if any(occupied[i : i + length]):
            continue
        selected.append((kind, i, i + length))
        for j in range(i, i + length):
            occupied[j] = True

    resolved = {kind for kind, _, _ in selected}
    if len(resolved) < len(SlotKind):
        for pattern in kb.patterns_sorted():
            wanted = [
                k for k in pattern.placeholder_kinds() if k not in resolved
            ]
            if not wanted:
                continue
            alignment = _match_pattern(pattern, norm)
            if not alignment:
                continue
            for kind in sorted(alignment, key=lambda k: k.order):
                if kind in resolved:
                    continue
                i, j = alignment[kind]
                if any(occupied[i:j]):
                    continue
                selected.append((kind, i, j))
                for t in range(i, j):
                    occupied[t] = True
                resolved.add(kind)
            if len(resolved) == len(SlotKind):
                break

    tags = ["O"] * n
    for kind, i, j in selected:
        tags[i] = f"B-{kind.tag}"
        for t in range(i + 1, j):
            tags[t] = f"I-{kind.tag}"
    return tags


# --------------------------------------------------------------------------
# Polarity detection

_CUES: list[tuple[tuple[str, ...], str]] = [
    (("no", "more", "than"), CmpOp.LE),
    (("not", "more", "than"), CmpOp.LE),
    (("no", "greater", "than"), CmpOp.LE),
    (("no", "less", "than"), CmpOp.GE),
    (("not", "less", "than"), CmpOp.GE),
    (("no", "fewer", "than"), CmpOp.GE),
    (("at", "most"), CmpOp.LE),
    (("at", "least"), CmpOp.GE),
    (("greater", "than"), CmpOp.GT),
    (("more", "than"), CmpOp.GT),
    (("better", "than"), CmpOp.GT),
    (("less", "than"), CmpOp.LT),
    (("fewer", "than"), CmpOp.LT),
    (("worse", "than"), CmpOp.LT),
    (("equal", "to"), CmpOp.EQ),
    (("equals",), CmpOp.EQ),
    (("exactly",), CmpOp.EQ),
    (("above",), CmpOp.GT),
    (("over",), CmpOp.GT),
    (("below",), CmpOp.LT),
    (("under",), CmpOp.LT),
]
_CUES.sort(key=lambda c: -len(c[0]))

_NEGATORS = {"not", "never", "n't"}
_COPULAS = {"be", "is", "are", "was", "were", "being"}
_POLARITY_WINDOW = 6


def detect_polarity(norm_tokens: list[str], cond_start: int) -> tuple[str, bool]:
    """(op, negated) from the cue phrase directly before the condition.

    The cue must sit immediately before the condition span; a standalone
    negation earlier in the window flips bounds and flags equality.
    Raises AmbiguousPolarity when the window holds neither a comparison
    cue nor bare-equality phrasing.
    """
    lo = max(0, cond_start - _POLARITY_WINDOW)
    window = norm_tokens[lo:cond_start]

    for words, op in _CUES:  # longest first, so "no more than" beats "more than"
        k = len(words)
        if k <= len(window) and tuple(window[-k:]) == words:
            negated = any(w in _NEGATORS for w in window[:-k])
            if negated:
                flipped = NEGATION_FLIP[op]
                return (flipped, True) if op == CmpOp.EQ else (flipped, False)
            return op, False

    if window and window[-1] in _COPULAS:
        negated = any(w in _NEGATORS for w in window)
        return CmpOp.EQ, negated

    raise AmbiguousPolarity(
        f"no comparison cue before condition (context: {' '.join(window)!r})"
    )


# --------------------------------------------------------------------------
# Condition parsing

_NUMERIC_CONDITION = re.compile(r"^([+-]?\d+(?:\.\d+)?)\s*(.*)$")


def parse_condition(
    raw: str, op: str, kb: KnowledgeBase, *, negated: bool = False
) -> Comparison:
    """Numeric ``<number> [unit]`` first, then ordinal-scale lookup."""
    text = raw.strip()
    if not text:
        raise UnparseableCondition("empty condition")
    m = _NUMERIC_CONDITION.match(text)
    if m:
        try:
            magnitude = Decimal(m.group(1))
        except InvalidOperation as exc:  # pragma: no cover - regex guards this
            raise UnparseableCondition(f"bad number {m.group(1)!r}") from exc
        unit = re.sub(r"\s+", "", m.group(2))
        return Comparison(op, NumberValue(magnitude, unit), negated)

    found = kb.find_scale(normalize(text))
    if found:
        scale, index = found
        return Comparison(op, OrdinalValue(normalize(text), scale, index), negated)

    raise UnparseableCondition(f"condition {raw!r} is neither numeric nor a known level")


def condition_value_parses(value: str, kb: KnowledgeBase) -> bool:
    """Structural check used by the learning gate; ignores polarity."""
    try:
        parse_condition(value, CmpOp.EQ, kb)
        return True
    except UnparseableCondition:
        return False


# --------------------------------------------------------------------------
# Frame extraction

_TIME_HINT_WORDS = {
    "always",
    "daily",
    "weekday",
    "weekdays",
    "weekend",
    "weekends",
    "second",
    "seconds",
    "minute",
    "minutes",
    "hour",
    "hours",
    "day",
    "days",
    "week",
    "weeks",
    "month",
    "months",
    "year",
    "years",
    "today",
    "tomorrow",
    "tonight",
    "morning",
    "afternoon",
    "evening",
    "night",
    "noon",
    "midnight",
    "am",
    "pm",
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
}
_CLOCKISH = re.compile(r"^\d{1,2}(:\d{2})?\s*(am|pm)$|^\d{1,2}:\d{2}$")


def _has_time_hint(norm_tokens: list[str], tags: list[str]) -> bool:
    for word, tag in zip(norm_tokens, tags):
        if tag != "O":
            continue
        if word in _TIME_HINT_WORDS or _CLOCKISH.match(word):
            return True
    return False


def extract_frame(
    req: Requirement, kb: KnowledgeBase
) -> tuple[KeywordFrame, list[SlotKind]]:
    """Label a requirement and assemble its keyword frame.

    Returns the frame plus the slots still required for completeness, in
    clarification order. A missing time phrase defaults to Always unless
    leftover time-like tokens suggest the phrase was simply not
    understood, in which case time is reported missing instead.
    """
    tokens = tokenize(req.raw_text)
    tags = label(tokens, kb)
    norm = [normalize(t.surface) for t in tokens]

    first: dict[SlotKind, tuple[int, int]] = {}
    for kind, i, j in sorted(spans_from_bio(tags), key=lambda s: s[1]):
        first.setdefault(kind, (i, j))

    def span_slot(kind: SlotKind) -> SlotValue | None:
        if kind not in first:
            return None
        i, j = first[kind]
        start, end = tokens[i].start, tokens[j - 1].end
        return SlotValue(req.raw_text[start:end], Provenance.EXTRACTED, start, end)

    entity = span_slot(SlotKind.ENTITY)
    quantifier = span_slot(SlotKind.QUANTIFIER)
    location = span_slot(SlotKind.LOCATION)

    time: TimeSlot | None
    if SlotKind.TIME in first:
        i, j = first[SlotKind.TIME]
        raw = req.raw_text[tokens[i].start : tokens[j - 1].end]
        time = TimeSlot(raw, refine_time(raw), Provenance.EXTRACTED)
    elif _has_time_hint(norm, tags):
        time = None
    else:
        time = TimeSlot(None, Always(), Provenance.DEFAULTED)

    condition: ConditionSlot | None = None
    if SlotKind.CONDITION in first:
        i, j = first[SlotKind.CONDITION]
        raw = req.raw_text[tokens[i].start : tokens[j - 1].end]
        try:
            op, negated = detect_polarity(norm, i)
            comparison = parse_condition(raw, op, kb, negated=negated)
            condition = ConditionSlot(raw, comparison, Provenance.EXTRACTED)
        except (AmbiguousPolarity, UnparseableCondition):
            condition = None

    frame = KeywordFrame(entity, quantifier, location, time, condition)
    return frame, frame_missing(frame)


def set_slot(
    frame: KeywordFrame, kind: SlotKind, value, provenance: str
) -> KeywordFrame:
    """Return a frame with one slot replaced by a user-supplied value."""
    if kind is SlotKind.ENTITY:
        return replace(frame, entity=SlotValue(value, provenance))
    if kind is SlotKind.QUANTIFIER:
        return replace(frame, quantifier=SlotValue(value, provenance))
    if kind is SlotKind.LOCATION:
        return replace(frame, location=SlotValue(value, provenance))
    if kind is SlotKind.TIME:
        return replace(frame, time=TimeSlot(value, refine_time(value), provenance))
    if kind is SlotKind.CONDITION:
        raise ValueError("condition slots carry a comparison; use set_condition")
    raise ValueError(f"unknown kind {kind!r}")


def set_condition(
    frame: KeywordFrame, text: str, comparison: Comparison, provenance: str
) -> KeywordFrame:
    return replace(
        frame, condition=ConditionSlot(text, comparison, provenance)
    )
