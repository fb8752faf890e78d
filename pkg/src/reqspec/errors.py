"""Exception types shared across the package."""

from __future__ import annotations


class ReqspecError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(ReqspecError):
    """Raised when a text operation receives blank input."""


class AmbiguousPolarity(ReqspecError):
    """No comparison cue phrase could be found around a condition span."""


class UnparseableCondition(ReqspecError):
    """A condition value is neither numeric nor a known ordinal level."""


class IncompleteFrame(ReqspecError):
    """A formula was requested for a frame that still has missing slots."""

    def __init__(self, missing):
        self.missing = list(missing)
        names = ", ".join(k.value for k in self.missing)
        super().__init__(f"frame incomplete, missing: {names}")


class UnknownTime(ReqspecError):
    """A formula was requested while the time slot is still unresolved."""


class MalformedCorpus(ReqspecError):
    """An annotated-corpus record is invalid; carries the offending line."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class NoPlaceholders(ReqspecError):
    """Pattern abstraction needs at least one labeled span."""


class InsufficientVocabulary(ReqspecError):
    """Synthesis needs at least one vocabulary entry per placeholder kind."""

    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"no vocabulary entries of kind {kind.value!r}")


class CorruptStore(ReqspecError):
    """A knowledge-base store could not be decoded."""


class FormulaSyntaxError(ReqspecError):
    """Formula text rejected by the grammar; carries a character position."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class SessionFinalized(ReqspecError):
    """Messages are not accepted once a session is finalized or closed."""
