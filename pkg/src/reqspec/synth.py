"""Controllable synthesis of annotated requirement corpora.

Records are produced by sampling a stored pattern uniformly and filling
each placeholder with a uniformly sampled vocabulary phrase of the
matching kind. A placeholder of kind k is dropped with a per-kind
probability calibrated so that the *corpus-level* fraction of records
missing k matches ``missing_rates[k]``; patterns that never contained k
already contribute to that fraction, so the per-placeholder drop
probability is (rate - base) / (1 - base) clamped to [0, 1], where base
is the share of patterns without a k placeholder.

Sampling order per record (one shared RNG seeded from the controls):
pattern index; then, per placeholder in template order, one drop roll,
then one filler index roll if the placeholder was kept. Identical
(kb, controls) therefore reproduce identical corpora byte for byte.

When a placeholder is dropped, its dangling function words are elided:
trailing prepositions and determiners are removed from the literal text
before it; when nothing could be removed there, leading function words
of the literal after it are removed instead.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InsufficientVocabulary
from .kb import KnowledgeBase, SlotPart, TextPart
from .model import SlotKind

# Corpus-level missing fractions observed in real city requirements:
# locations absent from 27.6%, quantifiers from 29.1%, and 90% carry no
# time phrase beyond the default.
DEFAULT_MISSING_RATES: dict[SlotKind, float] = {
    SlotKind.LOCATION: 0.276,
    SlotKind.QUANTIFIER: 0.291,
    SlotKind.TIME: 0.90,
}


@dataclass(frozen=True)
class SynthesisControls:
    count: int
    missing_rates: Mapping[SlotKind, float] = field(
        default_factory=lambda: dict(DEFAULT_MISSING_RATES)
    )
    rng_seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        for kind, rate in self.missing_rates.items():
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"missing rate for {kind.value} not in [0, 1]: {rate}")


_FUNCTION_WORDS = {
    "of", "in", "at", "on", "for", "within", "during", "from", "between",
    "to", "than", "the", "a", "an", "all", "any", "every",
}


def _elide_trailing(text: str) -> tuple[str, bool]:
    """Strip trailing function words; returns (text, anything_removed)."""
    out = text.rstrip()
    removed = False
    while True:
        m = re.search(r"(\S+)\s*$", out)
        if not m or m.group(1).lower() not in _FUNCTION_WORDS:
            break
        out = out[: m.start()].rstrip()
        removed = True
    if removed:
        return (out + " " if out else ""), True
    return text, False


def _elide_leading(text: str) -> str:
    out = text.lstrip(" ,.;:")
    while True:
        m = re.match(r"^(\S+)\s*", out)
        if not m or m.group(1).lower() not in _FUNCTION_WORDS:
            break
        out = out[m.end() :]
    return out


def _drop_probabilities(
    kb: KnowledgeBase, rates: Mapping[SlotKind, float]
) -> dict[SlotKind, float]:
    patterns = kb.patterns_sorted()
    probs: dict[SlotKind, float] = {}
    for kind in SlotKind:
        rate = float(rates.get(kind, 0.0))
        without = sum(1 for p in patterns if kind not in p.placeholder_kinds())
        base = without / len(patterns)
        if base >= 1.0 or rate <= base:
            probs[kind] = 0.0
        else:
            probs[kind] = (rate - base) / (1.0 - base)
    return probs


def synthesize(kb: KnowledgeBase, controls: SynthesisControls) -> list[dict]:
    """Generate ``controls.count`` annotated records from the knowledge base."""
    patterns = kb.patterns_sorted()
    if not patterns:
        raise ValueError("knowledge base has no patterns to synthesize from")

    fillers: dict[SlotKind, list[str]] = {}
    for pattern in patterns:
        for kind in pattern.placeholder_kinds():
            if kind not in fillers:
                phrases = [e.phrase for e in kb.vocab_for(kind)]
                if not phrases:
                    raise InsufficientVocabulary(kind)
                fillers[kind] = phrases

    drop_p = _drop_probabilities(kb, controls.missing_rates)
    rng = random.Random(controls.rng_seed)
    records = []

    for _ in range(controls.count):
        pattern = patterns[rng.randrange(len(patterns))]
        choices: list[str | None | tuple[SlotKind, str]] = []
        for part in pattern.parts:
            if isinstance(part, TextPart):
                choices.append(part.text)
            else:
                dropped = rng.random() < drop_p[part.kind]
                if dropped:
                    choices.append(None)
                else:
                    phrases = fillers[part.kind]
                    choices.append((part.kind, phrases[rng.randrange(len(phrases))]))

        # Elision around dropped placeholders, before offsets are fixed.
        pieces = list(choices)
        for idx, item in enumerate(pieces):
            if item is not None:
                continue
            elided = False
            if idx > 0 and isinstance(pieces[idx - 1], str):
                pieces[idx - 1], elided = _elide_trailing(pieces[idx - 1])
            if not elided and idx + 1 < len(pieces) and isinstance(pieces[idx + 1], str):
                pieces[idx + 1] = _elide_leading(pieces[idx + 1])

        text = ""
        spans = []
        for item in pieces:
            if item is None:
                continue
            if isinstance(item, tuple):
                kind, phrase = item
                spans.append(
                    {"kind": kind.value, "start": len(text), "end": len(text) + len(phrase)}
                )
                text += phrase
            else:
                piece = item
                if not text:
                    piece = piece.lstrip(" ,.;:")
                elif text.endswith(" ") and piece.startswith(" "):
                    piece = piece.lstrip(" ")
                text += piece
        records.append({"text": text, "spans": spans})

    return records
