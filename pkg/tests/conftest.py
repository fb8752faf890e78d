from __future__ import annotations

import random
from decimal import Decimal

import pytest

from reqspec.extract import (
    CmpOp,
    Comparison,
    ConditionSlot,
    KeywordFrame,
    NumberValue,
    OrdinalValue,
    Provenance,
    SlotValue,
    TimeSlot,
)
from reqspec.seed import ORDINAL_SCALES, STARTER_REQUIREMENTS, seed_kb
from reqspec.timeparse import Always, Horizon, Recurrence, Window

# The demo requirement whose time phrase is not in the starter vocabulary.
CASE3_REQUIREMENT = (
    "In all the buildings, during weekdays from 2pm to 5pm, the average"
    " concentration of tetrachloroethylene should be no more than 0.25 mg/m3."
)

CASE3_TIME_PHRASE = "weekdays from 2pm to 5pm"

R1 = STARTER_REQUIREMENTS[0]


@pytest.fixture(scope="session")
def kb():
    return seed_kb()


_WORDS = [
    "noise", "level", "traffic", "air", "flow", "water", "usage", "parks",
    "district", "sensors", "lamps", "bridges", "zone", "output", "pressure",
]

_UNITS = ["", "mg/m3", "cfu/m3", "db", "%"]


def _text(rng: random.Random, max_words: int = 3) -> str:
    n = rng.randint(1, max_words)
    return " ".join(rng.choice(_WORDS) for _ in range(n))


def make_frame(rng: random.Random) -> KeywordFrame:
    """A random complete frame; exercises every formula shape."""
    op = rng.choice(list(CmpOp.ALL))
    negated = op == CmpOp.EQ and rng.random() < 0.3
    if rng.random() < 0.25:
        levels = ORDINAL_SCALES["air-quality"]
        idx = rng.randrange(len(levels))
        value = OrdinalValue(levels[idx], "air-quality", idx)
    else:
        if rng.random() < 0.5:
            magnitude = Decimal(rng.randint(0, 5000))
        else:
            magnitude = Decimal(f"{rng.randint(0, 99)}.{rng.randint(0, 99):02d}")
        value = NumberValue(magnitude, rng.choice(_UNITS))

    roll = rng.random()
    if roll < 0.25:
        spec = Always()
    elif roll < 0.5:
        spec = Window(rng.randint(1, 10**6))
    elif roll < 0.75:
        spec = Horizon(rng.randint(1, 10**6))
    else:
        days = tuple(sorted(rng.sample(range(7), rng.randint(1, 7))))
        start = rng.randrange(0, 86398)
        end = rng.randrange(start + 1, 86400)
        spec = Recurrence(days, start, end)

    return KeywordFrame(
        entity=SlotValue(_text(rng), Provenance.EXTRACTED),
        quantifier=(
            SlotValue(_text(rng), Provenance.EXTRACTED) if rng.random() < 0.8 else None
        ),
        location=SlotValue(_text(rng), Provenance.EXTRACTED),
        time=TimeSlot("sometime", spec, Provenance.EXTRACTED),
        condition=ConditionSlot(
            "some condition", Comparison(op, value, negated), Provenance.EXTRACTED
        ),
    )
