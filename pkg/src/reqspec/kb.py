"""Versioned knowledge base: vocabulary, patterns, scales, learning.

A knowledge base snapshot is immutable. Learning produces a *new*
snapshot via :func:`flush_learned`; readers keep whatever snapshot they
hold until they next look one up. The on-disk form is a single JSON
document (see docs/FORMATS.md).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import CorruptStore, MalformedCorpus, NoPlaceholders
from .model import SlotKind, normalize, tokenize
from .timeparse import Unknown, refine_time

FORMAT_VERSION = 1

# Defaults for the learning gate; both are configuration, not policy.
CONFLICT_THRESHOLD = 3
USER_QUOTA = 100
MAX_VALUE_TOKENS = 10


@dataclass(frozen=True)
class VocabEntry:
    phrase: str  # normalized
    kind: SlotKind
    frequency: int = 1
    provenance: str = "seed"  # or "learned"
    validated: bool = True


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class SlotPart:
    kind: SlotKind


PatternPart = TextPart | SlotPart


@dataclass(frozen=True)
class Pattern:
    """A sentence shape: literal stretches with kind-tagged placeholders."""

    parts: tuple[PatternPart, ...]
    frequency: int = 1

    def render(self) -> str:
        out = []
        for p in self.parts:
            out.append(p.text if isinstance(p, TextPart) else f"[{p.kind.tag.upper()}]")
        return "".join(out)

    def placeholder_kinds(self) -> tuple[SlotKind, ...]:
        seen = []
        for p in self.parts:
            if isinstance(p, SlotPart) and p.kind not in seen:
                seen.append(p.kind)
        return tuple(seen)

    @cached_property
    def match_elements(self) -> tuple[tuple[str, object], ...]:
        """Flattened (\"lit\", word) / (\"slot\", kind) sequence for alignment."""
        elems: list[tuple[str, object]] = []
        for p in self.parts:
            if isinstance(p, SlotPart):
                elems.append(("slot", p.kind))
            else:
                for w in _literal_words(p.text):
                    elems.append(("lit", w))
        return tuple(elems)


def _literal_words(text: str) -> list[str]:
    if not text.strip():
        return []
    return [normalize(t.surface) for t in tokenize(text)]


@dataclass(frozen=True)
class RejectionRecord:
    value: str
    kind: SlotKind
    reason: str
    user: str
    at: float


@dataclass
class LearnedSample:
    """A clarification or correction queued for long-term learning."""

    requirement_text: str
    slot_kind: SlotKind
    clarified_value: str
    user: str = "anonymous"
    timestamp: float = field(default_factory=time.time)
    status: str = "pending"  # pending | accepted | rejected
    reject_reason: str | None = None


class RejectReason:
    SPAN_NOT_FOUND = "SpanNotFoundAndUnparseable"
    KIND_CONFLICT = "KindConflict"
    QUOTA_EXCEEDED = "QuotaExceeded"
    TOO_LONG = "TooLong"


@dataclass(frozen=True)
class KnowledgeBase:
    version: int = 1
    vocabulary: tuple[VocabEntry, ...] = ()
    patterns: tuple[Pattern, ...] = ()
    ordinal_scales: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    rejection_log: tuple[RejectionRecord, ...] = ()

    @cached_property
    def _phrase_index(self) -> dict[str, SlotKind]:
        # A phrase may be recorded under several kinds; resolve by
        # (frequency desc, SlotKind declaration order).
        best: dict[str, tuple[int, int, SlotKind]] = {}
        for e in self.vocabulary:
            rank = (-e.frequency, e.kind.order)
            cur = best.get(e.phrase)
            if cur is None or rank < (cur[0], cur[1]):
                best[e.phrase] = (rank[0], rank[1], e.kind)
        return {p: v[2] for p, v in best.items()}

    @cached_property
    def max_phrase_tokens(self) -> int:
        return max((len(e.phrase.split()) for e in self.vocabulary), default=0)

    def lookup_phrase(self, phrase: str) -> SlotKind | None:
        return self._phrase_index.get(phrase)

    def vocab_for(self, kind: SlotKind) -> list[VocabEntry]:
        return sorted(
            (e for e in self.vocabulary if e.kind == kind), key=lambda e: e.phrase
        )

    def patterns_sorted(self) -> list[Pattern]:
        return sorted(self.patterns, key=lambda p: (-p.frequency, p.render()))

    def find_scale(self, level: str) -> tuple[str, int] | None:
        """Locate a normalized level name; returns (scale name, index)."""
        for name in sorted(self.ordinal_scales):
            levels = self.ordinal_scales[name]
            if level in levels:
                return name, list(levels).index(level)
        return None


# ---------------------------------------------------------------------------
# Corpus ingestion


def _check_record(i: int, rec) -> list[tuple[SlotKind, int, int]]:
    if not isinstance(rec, dict):
        raise MalformedCorpus(i, "record is not an object")
    text = rec.get("text")
    if not isinstance(text, str) or not text.strip():
        raise MalformedCorpus(i, "missing or blank 'text'")
    spans = rec.get("spans")
    if not isinstance(spans, list):
        raise MalformedCorpus(i, "missing 'spans' list")
    out = []
    for s in spans:
        if not isinstance(s, dict):
            raise MalformedCorpus(i, "span is not an object")
        kind = SlotKind.from_name(str(s.get("kind", "")))
        if kind is None:
            raise MalformedCorpus(i, f"unknown span kind {s.get('kind')!r}")
        start, end = s.get("start"), s.get("end")
        if not isinstance(start, int) or not isinstance(end, int):
            raise MalformedCorpus(i, "span offsets must be integers")
        if not (0 <= start < end <= len(text)):
            raise MalformedCorpus(i, f"span ({start}, {end}) out of bounds")
        out.append((kind, start, end))
    out.sort(key=lambda s: s[1])
    for (_, _, e0), (_, s1, _) in zip(out, out[1:]):
        if s1 < e0:
            raise MalformedCorpus(i, "overlapping spans")
    return out


def abstract_pattern(record: Mapping) -> Pattern:
    """Replace each labeled span with a kind-tagged placeholder."""
    spans = _check_record(0, dict(record))
    if not spans:
        raise NoPlaceholders("record has no labeled spans")
    text = record["text"]
    parts: list[PatternPart] = []
    cursor = 0
    for kind, start, end in spans:
        if start > cursor:
            parts.append(TextPart(text[cursor:start]))
        parts.append(SlotPart(kind))
        cursor = end
    if cursor < len(text):
        parts.append(TextPart(text[cursor:]))
    return Pattern(tuple(parts))


def kb_build(
    records: Sequence[Mapping],
    ordinal_scales: Mapping[str, Sequence[str]] | None = None,
) -> KnowledgeBase:
    """Abstract an annotated corpus into a version-1 knowledge base."""
    vocab_count: dict[tuple[str, SlotKind], int] = {}
    pattern_count: dict[str, tuple[Pattern, int]] = {}

    for i, rec in enumerate(records, 1):
        spans = _check_record(i, rec)
        if not spans:
            raise MalformedCorpus(i, "record has no labeled spans")
        text = rec["text"]
        for kind, start, end in spans:
            phrase = normalize(text[start:end])
            if not phrase:
                raise MalformedCorpus(i, "span text normalizes to nothing")
            vocab_count[(phrase, kind)] = vocab_count.get((phrase, kind), 0) + 1
        pat = abstract_pattern(rec)
        key = pat.render()
        prev = pattern_count.get(key)
        pattern_count[key] = (pat, prev[1] + 1 if prev else 1)

    vocabulary = tuple(
        VocabEntry(phrase, kind, freq, "seed", True)
        for (phrase, kind), freq in sorted(
            vocab_count.items(), key=lambda kv: (kv[0][1].order, kv[0][0])
        )
    )
    patterns = tuple(
        replace(pat, frequency=freq)
        for _, (pat, freq) in sorted(pattern_count.items())
    )
    scales = {
        str(name): tuple(normalize(lv) for lv in levels)
        for name, levels in (ordinal_scales or {}).items()
    }
    return KnowledgeBase(1, vocabulary, patterns, scales)


def load_corpus(path) -> list[dict]:
    """Read annotated JSONL; raises MalformedCorpus with the file line."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedCorpus(line_no, f"invalid JSON: {exc.msg}") from exc
    return records


# ---------------------------------------------------------------------------
# Online-learning validation and flush


def _parses_as(kind: SlotKind, value: str, kb: KnowledgeBase) -> bool:
    if kind is SlotKind.TIME:
        return not isinstance(refine_time(value), Unknown)
    if kind is SlotKind.CONDITION:
        from .extract import condition_value_parses

        return condition_value_parses(value, kb)
    return False


def validate_sample(
    sample: LearnedSample,
    kb: KnowledgeBase,
    *,
    prior_user_pending: int = 0,
    conflict_threshold: int = CONFLICT_THRESHOLD,
    user_quota: int = USER_QUOTA,
    max_value_tokens: int = MAX_VALUE_TOKENS,
) -> str | None:
    """Apply rules V-1..V-4 in order; returns a reject reason or None.

    V-1  the value occurs verbatim (normalized) in the requirement, or it
         parses as the slot's structured form;
    V-2  the value does not collide with an established entry of a
         different kind (frequency above ``conflict_threshold``);
    V-3  the submitting user stays within the per-flush-window quota;
    V-4  the value is at most ``max_value_tokens`` tokens long.
    """
    value_norm = normalize(sample.clarified_value)
    text_norm = normalize(sample.requirement_text)

    if not value_norm or (
        value_norm not in text_norm
        and not _parses_as(sample.slot_kind, sample.clarified_value, kb)
    ):
        return RejectReason.SPAN_NOT_FOUND

    for entry in kb.vocabulary:
        if (
            entry.phrase == value_norm
            and entry.kind is not sample.slot_kind
            and entry.frequency > conflict_threshold
        ):
            return RejectReason.KIND_CONFLICT

    if prior_user_pending >= user_quota:
        return RejectReason.QUOTA_EXCEEDED

    if len(tokenize(sample.clarified_value)) > max_value_tokens:
        return RejectReason.TOO_LONG

    return None


def flush_learned(
    kb: KnowledgeBase,
    samples: Iterable[LearnedSample],
    *,
    conflict_threshold: int = CONFLICT_THRESHOLD,
    user_quota: int = USER_QUOTA,
    now: float | None = None,
) -> KnowledgeBase:
    """Validate pending samples and publish a new snapshot (version + 1).

    Accepted samples become validated learned vocabulary (frequencies
    merge with existing entries); rejected ones land in the rejection
    log with their reason. The input snapshot is never mutated.
    """
    stamp = time.time() if now is None else now
    seen_per_user: dict[str, int] = {}
    additions: dict[tuple[str, SlotKind], int] = {}
    rejections: list[RejectionRecord] = []

    for sample in samples:
        if sample.status != "pending":
            continue
        prior = seen_per_user.get(sample.user, 0)
        seen_per_user[sample.user] = prior + 1
        reason = validate_sample(
            sample,
            kb,
            prior_user_pending=prior,
            conflict_threshold=conflict_threshold,
            user_quota=user_quota,
        )
        if reason is None:
            sample.status = "accepted"
            key = (normalize(sample.clarified_value), sample.slot_kind)
            additions[key] = additions.get(key, 0) + 1
        else:
            sample.status = "rejected"
            sample.reject_reason = reason
            rejections.append(
                RejectionRecord(
                    sample.clarified_value, sample.slot_kind, reason, sample.user, stamp
                )
            )

    merged: dict[tuple[str, SlotKind], VocabEntry] = {
        (e.phrase, e.kind): e for e in kb.vocabulary
    }
    for (phrase, kind), count in additions.items():
        existing = merged.get((phrase, kind))
        if existing:
            merged[(phrase, kind)] = replace(
                existing, frequency=existing.frequency + count
            )
        else:
            merged[(phrase, kind)] = VocabEntry(phrase, kind, count, "learned", True)

    vocabulary = tuple(
        sorted(merged.values(), key=lambda e: (e.kind.order, e.phrase))
    )
    return KnowledgeBase(
        version=kb.version + 1,
        vocabulary=vocabulary,
        patterns=kb.patterns,
        ordinal_scales=dict(kb.ordinal_scales),
        rejection_log=kb.rejection_log + tuple(rejections),
    )


# ---------------------------------------------------------------------------
# Persistence


def save(kb: KnowledgeBase) -> bytes:
    doc = {
        "format_version": FORMAT_VERSION,
        "version": kb.version,
        "vocabulary": [
            {
                "phrase": e.phrase,
                "kind": e.kind.value,
                "frequency": e.frequency,
                "provenance": e.provenance,
                "validated": e.validated,
            }
            for e in kb.vocabulary
        ],
        "patterns": [
            {
                "parts": [
                    {"text": p.text} if isinstance(p, TextPart) else {"slot": p.kind.value}
                    for p in pat.parts
                ],
                "frequency": pat.frequency,
            }
            for pat in kb.patterns
        ],
        "ordinal_scales": {k: list(v) for k, v in kb.ordinal_scales.items()},
        "rejection_log": [
            {
                "value": r.value,
                "kind": r.kind.value,
                "reason": r.reason,
                "user": r.user,
                "at": r.at,
            }
            for r in kb.rejection_log
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode("utf-8")


def _require(doc: Mapping, key: str, types) -> object:
    if key not in doc or not isinstance(doc[key], types):
        raise CorruptStore(f"missing or invalid field {key!r}")
    return doc[key]


def load(data: bytes | str) -> KnowledgeBase:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptStore(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptStore("store root must be an object")

    fmt = _require(doc, "format_version", int)
    if fmt != FORMAT_VERSION:
        raise CorruptStore(
            f"unsupported format version {fmt} (this build reads {FORMAT_VERSION})"
        )
    version = _require(doc, "version", int)

    try:
        vocabulary = tuple(
            VocabEntry(
                e["phrase"],
                _kind(e["kind"]),
                int(e["frequency"]),
                e["provenance"],
                bool(e["validated"]),
            )
            for e in _require(doc, "vocabulary", list)
        )
        patterns = tuple(
            Pattern(
                tuple(
                    TextPart(p["text"]) if "text" in p else SlotPart(_kind(p["slot"]))
                    for p in pat["parts"]
                ),
                int(pat["frequency"]),
            )
            for pat in _require(doc, "patterns", list)
        )
        scales = {
            str(k): tuple(str(x) for x in v)
            for k, v in _require(doc, "ordinal_scales", dict).items()
        }
        rejection_log = tuple(
            RejectionRecord(
                r["value"], _kind(r["kind"]), r["reason"], r["user"], float(r["at"])
            )
            for r in _require(doc, "rejection_log", list)
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptStore(f"malformed store contents: {exc}") from exc

    return KnowledgeBase(version, vocabulary, patterns, scales, rejection_log)


def _kind(name: str) -> SlotKind:
    kind = SlotKind.from_name(str(name))
    if kind is None:
        raise ValueError(f"unknown slot kind {name!r}")
    return kind


def load_file(path) -> KnowledgeBase:
    with open(path, "rb") as fh:
        return load(fh.read())


def save_file(kb: KnowledgeBase, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save(kb))
