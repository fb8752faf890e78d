"""reqspec: English smart-city requirements to checkable specifications."""

from .dialogue import (
    Reply,
    Session,
    close_session,
    handle_message,
    open_session,
    parse_correction,
)
from .errors import ReqspecError
from .extract import KeywordFrame, extract_frame, label
from .formula import build_formula, parse_formula, render_formal, render_friendly
from .kb import KnowledgeBase, LearnedSample, flush_learned, kb_build, validate_sample
from .model import Requirement, SlotKind, Token, normalize, tokenize
from .seed import STARTER_REQUIREMENTS, seed_kb, seed_records
from .synth import SynthesisControls, synthesize
from .timeparse import refine_time

__version__ = "0.1.0"

__all__ = [
    "KeywordFrame",
    "KnowledgeBase",
    "LearnedSample",
    "Reply",
    "Requirement",
    "ReqspecError",
    "STARTER_REQUIREMENTS",
    "Session",
    "SlotKind",
    "SynthesisControls",
    "Token",
    "build_formula",
    "close_session",
    "extract_frame",
    "flush_learned",
    "handle_message",
    "kb_build",
    "label",
    "normalize",
    "open_session",
    "parse_correction",
    "parse_formula",
    "refine_time",
    "render_formal",
    "render_friendly",
    "seed_kb",
    "seed_records",
    "synthesize",
    "tokenize",
    "validate_sample",
]
