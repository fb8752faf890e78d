"""Core text types, tokenization, and normalization.

The tokenizer follows three rules (documented in docs/FORMATS.md):

  T-1  split on whitespace;
  T-2  strip punctuation clinging to token edges (commas, sentence-final
       periods, quotes); tokens that were pure punctuation disappear;
  T-3  numeric-unit compounds stay single tokens: slash-joined unit
       strings ("mg/m3"), digit+meridiem forms ("2pm"), and a bare
       number followed by "am"/"pm" ("7 am") are never split.

Offsets are character offsets into the original string, so every token
surface is a verbatim slice of the input.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import EmptyInput


class SlotKind(enum.Enum):
    """The five keyword kinds a requirement is decomposed into.

    Declaration order is the tie-break order used by the labeler.
    """

    ENTITY = "entity"
    QUANTIFIER = "quantifier"
    LOCATION = "location"
    TIME = "time"
    CONDITION = "condition"

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]

    @property
    def tag(self) -> str:
        """Span-label form used in BIO tags, e.g. ``Entity``."""
        return self.name.capitalize()

    @classmethod
    def from_name(cls, name: str) -> "SlotKind | None":
        """Resolve a user-facing slot name; "description" aliases quantifier."""
        key = name.strip().lower()
        if key == "description":
            return cls.QUANTIFIER
        for member in cls:
            if member.value == key:
                return member
        return None


_KIND_ORDER = {k: i for i, k in enumerate(SlotKind)}


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad token span ({self.start}, {self.end})")


@dataclass(frozen=True)
class Requirement:
    """One English sentence to be formalized."""

    id: str
    raw_text: str
    source: str = "interactive"  # or "batch"

    def __post_init__(self):
        if not self.raw_text.strip():
            raise EmptyInput("requirement text is blank")


_EDGE_PUNCT = ".,;:!?'\"()"
_MERIDIEM = re.compile(r"^(am|pm)$", re.IGNORECASE)
_NUMBER = re.compile(r"^\d+(\.\d+)?$")


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into offset-carrying tokens (rules T-1..T-3)."""
    if not text or not text.strip():
        raise EmptyInput("cannot tokenize blank text")

    raw: list[Token] = []
    for m in re.finditer(r"\S+", text):
        start, end = m.start(), m.end()
        # T-2: peel punctuation off both edges.
        while start < end and text[start] in _EDGE_PUNCT:
            start += 1
        while end > start and text[end - 1] in _EDGE_PUNCT:
            end -= 1
        if start < end:
            raw.append(Token(text[start:end], start, end))

    # T-3: merge "<number> am|pm" into a single clock token.
    tokens: list[Token] = []
    i = 0
    while i < len(raw):
        cur = raw[i]
        if (
            i + 1 < len(raw)
            and _NUMBER.match(cur.surface)
            and _MERIDIEM.match(raw[i + 1].surface)
        ):
            nxt = raw[i + 1]
            tokens.append(Token(text[cur.start : nxt.end], cur.start, nxt.end))
            i += 2
        else:
            tokens.append(cur)
            i += 1
    return tokens


def normalize(text: str) -> str:
    """Canonical lookup form: lowercase, single spaces, no terminal period.

    Idempotent; used for vocabulary keys and session memory keys.
    """
    collapsed = re.sub(r"\s+", " ", text.strip())
    return collapsed.lower().rstrip(".").rstrip()
