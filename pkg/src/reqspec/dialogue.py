"""Session state machine: completion, correction, confirmation, memory.

A session serializes its messages. Each message is handled against one
immutable knowledge-base snapshot. No specification is ever emitted
without an explicit affirmative while the session is awaiting
confirmation, and every clarified or corrected slot value is queued as
a learning sample for the validation pipeline.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field

from .errors import (
    AmbiguousPolarity,
    EmptyInput,
    SessionFinalized,
    UnparseableCondition,
)
from .extract import (
    CLARIFY_ORDER,
    CmpOp,
    KeywordFrame,
    Provenance,
    detect_polarity,
    extract_frame,
    frame_from_dict,
    frame_missing,
    parse_condition,
    set_condition,
    set_slot,
)
from .formula import build_formula, render_formal, render_friendly
from .kb import KnowledgeBase, LearnedSample
from .model import Requirement, SlotKind, normalize, tokenize
from .timeparse import Unknown, refine_time


class State:
    AWAITING_REQUIREMENT = "awaiting_requirement"
    AWAITING_CLARIFICATION = "awaiting_clarification"
    AWAITING_CONFIRMATION = "awaiting_confirmation"
    FINALIZED = "finalized"


AFFIRMATIVES = {"yes", "y", "confirm", "correct", "ok"}

_SLOT_NAMES = ("entity", "quantifier", "description", "location", "time", "condition")


@dataclass
class Reply:
    text: str
    state_after: str
    frame_view: dict | None = None
    spec_view: dict | None = None  # {"formal": ..., "friendly": ...}

    def __post_init__(self):
        # A spec is visible exactly when the session just finalized.
        assert (self.spec_view is not None) == (self.state_after == State.FINALIZED)


@dataclass
class Session:
    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    user: str = "anonymous"
    state: str = State.AWAITING_REQUIREMENT
    clarify_slot: SlotKind | None = None
    current_req: Requirement | None = None
    current_frame: KeywordFrame | None = None
    memory: dict[str, dict] = field(default_factory=dict)  # normalized text -> frame dict
    transcript: list[dict] = field(default_factory=list)
    pending_learned: list[LearnedSample] = field(default_factory=list)
    kb_version: int = 0
    closed: bool = False


def open_session(user: str = "anonymous") -> Session:
    return Session(user=user)


def close_session(session: Session) -> list[LearnedSample]:
    """Sign-out: hand the queued samples to the learning pipeline."""
    session.closed = True
    samples = list(session.pending_learned)
    session.pending_learned = []
    return samples


def parse_correction(text: str) -> tuple[SlotKind, str] | None:
    """Read a "<slot name> <value>" override; value is kept verbatim."""
    parts = text.split(None, 1)
    if len(parts) != 2:
        return None
    name, remainder = parts[0].lower(), parts[1]
    if name not in _SLOT_NAMES or not remainder.strip():
        return None
    return SlotKind.from_name(name), remainder


def export_transcript(session: Session) -> list[dict]:
    return [dict(turn) for turn in session.transcript]


# --------------------------------------------------------------------------
# Internals


def _frame_lines(frame: KeywordFrame) -> str:
    rows = []
    for name in ("entity", "quantifier", "location", "time", "condition"):
        slot = getattr(frame, name)
        if slot is None:
            rows.append(f"  {name}: (missing)")
        elif name == "time":
            shown = slot.text if slot.text else "always"
            mark = " (defaulted)" if slot.provenance == Provenance.DEFAULTED else ""
            rows.append(f"  {name}: {shown}{mark}")
        else:
            rows.append(f"  {name}: {slot.text}")
    return "\n".join(rows)


def _confirm_prompt(frame: KeywordFrame) -> str:
    return (
        "Here is what I understood:\n"
        f"{_frame_lines(frame)}\n"
        "Reply 'yes' to confirm, or retype any slot like"
        " 'location all the buildings'."
    )


def _clarify_prompt(kind: SlotKind, reason: str | None = None) -> str:
    lead = f"{reason} " if reason else ""
    return (
        f"{lead}I could not determine the {kind.value} for this requirement."
        f" Please provide the {kind.value}."
    )


def _queue_sample(session: Session, kind: SlotKind, value: str):
    session.pending_learned.append(
        LearnedSample(
            requirement_text=session.current_req.raw_text,
            slot_kind=kind,
            clarified_value=value,
            user=session.user,
            timestamp=time.time(),
        )
    )


def _remember(session: Session):
    key = normalize(session.current_req.raw_text)
    session.memory[key] = session.current_frame.to_dict()


def _apply_value(
    session: Session, kind: SlotKind, value: str, provenance: str, kb: KnowledgeBase
) -> str | None:
    """Set one slot from user text; returns an error message on bad input."""
    frame = session.current_frame
    if kind is SlotKind.TIME:
        if isinstance(refine_time(value), Unknown):
            return (
                f"I could not interpret {value!r} as a time"
                " (try forms like 'any 24 hours period' or"
                " 'weekdays from 2pm to 5pm')."
            )
        session.current_frame = set_slot(frame, kind, value, provenance)
    elif kind is SlotKind.CONDITION:
        try:
            op, negated, bare = _split_condition_clause(value)
            fallback = None
            if bare is not value and frame.condition and frame.condition.comparison:
                fallback = frame.condition.comparison.op
            comparison = parse_condition(
                bare, op if op else (fallback or CmpOp.EQ), kb, negated=negated
            )
        except UnparseableCondition:
            return (
                f"I could not interpret {value!r} as a condition"
                " (try a number with an optional unit, like '7 mg/m3')."
            )
        session.current_frame = set_condition(frame, value, comparison, provenance)
    else:
        session.current_frame = set_slot(frame, kind, value, provenance)

    _queue_sample(session, kind, value)
    _remember(session)
    return None


def _split_condition_clause(value: str) -> tuple[str | None, bool, str]:
    """Split an optional leading cue off a condition value.

    "no more than 7 mg/m3" -> ("<=", False, "7 mg/m3"); plain values come
    back with no operator so the caller can fall back sensibly.
    """
    try:
        tokens = tokenize(value)
    except EmptyInput:
        return None, False, value
    norm = [normalize(t.surface) for t in tokens]
    for split_at in range(len(norm) - 1, 0, -1):
        try:
            op, negated = detect_polarity(norm, split_at)
        except AmbiguousPolarity:
            continue
        rest = value[tokens[split_at].start :]
        return op, negated, rest
    return None, False, value


def _advance_after_fill(session: Session) -> Reply:
    missing = frame_missing(session.current_frame)
    if missing:
        ordered = [k for k in CLARIFY_ORDER if k in missing]
        session.state = State.AWAITING_CLARIFICATION
        session.clarify_slot = ordered[0]
        return Reply(
            _clarify_prompt(ordered[0]),
            session.state,
            frame_view=session.current_frame.to_dict(),
        )
    session.state = State.AWAITING_CONFIRMATION
    session.clarify_slot = None
    return Reply(
        _confirm_prompt(session.current_frame),
        session.state,
        frame_view=session.current_frame.to_dict(),
    )


def _present_memory_hit(session: Session, text: str, key: str) -> Reply:
    session.current_req = Requirement(uuid.uuid4().hex, text)
    session.current_frame = frame_from_dict(json.loads(json.dumps(session.memory[key])))
    session.state = State.AWAITING_CONFIRMATION
    session.clarify_slot = None
    return Reply(
        "I have seen this requirement before in this session."
        " Here is the stored result:\n"
        f"{_frame_lines(session.current_frame)}\n"
        "Reply 'yes' to confirm, or retype any slot.",
        session.state,
        frame_view=session.memory[key],
    )


def _finalize(session: Session) -> Reply:
    formula = build_formula(session.current_frame)
    formal = render_formal(formula)
    friendly = render_friendly(session.current_frame, formula)
    session.state = State.FINALIZED
    return Reply(
        f"Confirmed. {friendly}",
        session.state,
        frame_view=session.current_frame.to_dict(),
        spec_view={"formal": formal, "friendly": friendly},
    )


def _handle_awaiting_requirement(session: Session, text: str, kb: KnowledgeBase) -> Reply:
    key = normalize(text)
    if key in session.memory:
        return _present_memory_hit(session, text, key)

    correction = parse_correction(text)
    if correction or key in AFFIRMATIVES:
        return Reply(
            "There is no requirement being worked on yet."
            " Please enter a requirement first.",
            session.state,
        )

    req = Requirement(uuid.uuid4().hex, text)
    frame, missing = extract_frame(req, kb)
    if all(
        slot is None
        for slot in (frame.entity, frame.quantifier, frame.location, frame.condition)
    ) and (frame.time is None or frame.time.text is None):
        return Reply(
            "I could not find any requirement keywords in that."
            " Please state a requirement, e.g. starting from one of the"
            " example sentences.",
            session.state,
        )

    session.current_req = req
    session.current_frame = frame
    if missing:
        ordered = [k for k in CLARIFY_ORDER if k in missing]
        session.state = State.AWAITING_CLARIFICATION
        session.clarify_slot = ordered[0]
        return Reply(
            _clarify_prompt(ordered[0]), session.state, frame_view=frame.to_dict()
        )
    session.state = State.AWAITING_CONFIRMATION
    return Reply(_confirm_prompt(frame), session.state, frame_view=frame.to_dict())


def _handle_awaiting_clarification(
    session: Session, text: str, kb: KnowledgeBase
) -> Reply:
    correction = parse_correction(text)
    if correction:
        kind, value = correction
        error = _apply_value(session, kind, value, Provenance.CORRECTED, kb)
        if error:
            return Reply(
                f"{error} Still waiting on the"
                f" {session.clarify_slot.value}.",
                session.state,
                frame_view=session.current_frame.to_dict(),
            )
        return _advance_after_fill(session)

    value = text.strip()
    kind = session.clarify_slot
    error = _apply_value(session, kind, value, Provenance.CLARIFIED, kb)
    if error:
        return Reply(
            error, session.state, frame_view=session.current_frame.to_dict()
        )
    return _advance_after_fill(session)


def _handle_awaiting_confirmation(
    session: Session, text: str, kb: KnowledgeBase
) -> Reply:
    if normalize(text) in AFFIRMATIVES:
        # Confirmation always follows a complete frame; fall back to
        # clarification if that ever stops holding rather than crash.
        if frame_missing(session.current_frame):
            return _advance_after_fill(session)
        return _finalize(session)

    correction = parse_correction(text)
    if correction:
        kind, value = correction
        error = _apply_value(session, kind, value, Provenance.CORRECTED, kb)
        if error:
            return Reply(
                error, session.state, frame_view=session.current_frame.to_dict()
            )
        # Any change demands another round of confirmation.
        return _advance_after_fill(session)

    key = normalize(text)
    if key in session.memory:
        return _present_memory_hit(session, text, key)

    return Reply(
        "Please reply 'yes' to confirm, or retype a slot like"
        " 'time weekdays from 2pm to 5pm'.",
        session.state,
        frame_view=session.current_frame.to_dict(),
    )


def handle_message(session: Session, text: str, kb: KnowledgeBase) -> Reply:
    """Advance the session by one user message."""
    if session.closed or session.state == State.FINALIZED:
        raise SessionFinalized(
            "session is finalized; start a new requirement to continue"
        )
    if not text or not text.strip():
        raise EmptyInput("message text is blank")

    session.kb_version = kb.version
    session.transcript.append(
        {"turn": len(session.transcript), "speaker": "user", "text": text,
         "state_after": session.state}
    )

    if session.state == State.AWAITING_REQUIREMENT:
        reply = _handle_awaiting_requirement(session, text, kb)
    elif session.state == State.AWAITING_CLARIFICATION:
        reply = _handle_awaiting_clarification(session, text, kb)
    else:
        reply = _handle_awaiting_confirmation(session, text, kb)

    session.transcript.append(
        {"turn": len(session.transcript), "speaker": "system", "text": reply.text,
         "state_after": reply.state_after}
    )
    return reply
