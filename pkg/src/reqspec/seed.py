"""Starter corpus: six example indoor/outdoor monitoring requirements.

These are the sentences offered to new users in the UI, hand-annotated
so a fresh deployment has a working knowledge base out of the box. Span
offsets are located at import time so the annotations cannot drift from
the sentence text.
"""

from __future__ import annotations

from .kb import KnowledgeBase, kb_build
from .model import SlotKind

STARTER_REQUIREMENTS = [
    "The indoor concentrations of carbon monoxide should be no more than"
    " 7 mg/m3 in any 24 hours period in all the buildings.",
    "In all the buildings, annual average concentration of tetrachloroethylene"
    " should be no more than 0.25 mg/m3.",
    "All portable LED Luminaries should have Power Factor of no less than"
    " 0.70 everywhere.",
    "In all buildings, the average concentration of Bacterial should be"
    " no more than 2500 cfu/m3 for every day.",
    "The air quality within 3 miles of school A should always be better than"
    " moderate for the next 2 hours.",
    "The indoor concentrations of carbon monoxide should be no more than"
    " 7 mg/m3 in any 24 hours period in all the buildings.",
]

# (slot kind, phrase) per sentence; phrases are located by first occurrence.
_ANNOTATIONS: list[list[tuple[SlotKind, str]]] = [
    [
        (SlotKind.ENTITY, "indoor concentrations"),
        (SlotKind.QUANTIFIER, "carbon monoxide"),
        (SlotKind.CONDITION, "7 mg/m3"),
        (SlotKind.TIME, "24 hours period"),
        (SlotKind.LOCATION, "buildings"),
    ],
    [
        (SlotKind.LOCATION, "buildings"),
        (SlotKind.ENTITY, "annual average concentration"),
        (SlotKind.QUANTIFIER, "tetrachloroethylene"),
        (SlotKind.CONDITION, "0.25 mg/m3"),
    ],
    [
        (SlotKind.QUANTIFIER, "portable LED Luminaries"),
        (SlotKind.ENTITY, "Power Factor"),
        (SlotKind.CONDITION, "0.70"),
        (SlotKind.LOCATION, "everywhere"),
    ],
    [
        (SlotKind.LOCATION, "buildings"),
        (SlotKind.ENTITY, "average concentration"),
        (SlotKind.QUANTIFIER, "Bacterial"),
        (SlotKind.CONDITION, "2500 cfu/m3"),
        (SlotKind.TIME, "every day"),
    ],
    [
        (SlotKind.ENTITY, "air quality"),
        (SlotKind.LOCATION, "within 3 miles of school A"),
        (SlotKind.CONDITION, "moderate"),
        (SlotKind.TIME, "for the next 2 hours"),
    ],
    [
        (SlotKind.ENTITY, "indoor concentrations"),
        (SlotKind.QUANTIFIER, "carbon monoxide"),
        (SlotKind.CONDITION, "7 mg/m3"),
        (SlotKind.TIME, "24 hours period"),
        (SlotKind.LOCATION, "buildings"),
    ],
]

# Air-quality index bands ordered worst to best, so "better than" maps to
# a strictly-greater comparison over the level index.
ORDINAL_SCALES = {
    "air-quality": (
        "hazardous",
        "very unhealthy",
        "unhealthy",
        "unhealthy for sensitive groups",
        "moderate",
        "good",
    ),
}


def seed_records() -> list[dict]:
    """Annotated-corpus records for the starter requirements."""
    records = []
    for text, notes in zip(STARTER_REQUIREMENTS, _ANNOTATIONS):
        spans = []
        for kind, phrase in notes:
            start = text.find(phrase)
            if start < 0:
                raise AssertionError(f"phrase {phrase!r} not in {text!r}")
            spans.append({"kind": kind.value, "start": start, "end": start + len(phrase)})
        records.append({"text": text, "spans": spans})
    return records


def seed_kb() -> KnowledgeBase:
    return kb_build(seed_records(), ordinal_scales=ORDINAL_SCALES)
