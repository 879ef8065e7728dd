"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: ValidationError and
subclasses exit 1, OSError exits 2, BackendError/ModelError exit 3.
"""


class ChatQEError(Exception):
    """Base class for all package errors."""


class ValidationError(ChatQEError):
    """Input data violates a documented invariant or schema."""


class ParseError(ValidationError):
    """A file could not be decoded; carries the offending line number."""

    def __init__(self, path, line_no, reason):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no


class PipelineError(ValidationError):
    """Corpus pipeline precondition failed (e.g. utterance without candidates)."""


class AlignmentError(ValidationError):
    """A translation file is missing a (chat_id, index) row the corpus requires."""


class InputTooLongError(ValidationError):
    """The response translation alone does not fit the detector's max length."""


class BackendError(ChatQEError):
    """A translation backend failed after retries; carries utterance coordinates."""

    def __init__(self, message, chat_id=None, index=None):
        if chat_id is not None:
            message = f"{message} (chat_id={chat_id}, index={index})"
        super().__init__(message)
        self.chat_id = chat_id
        self.index = index


class DegenerateOutputError(BackendError):
    """A backend returned empty text for a non-empty input."""


class ProtocolError(BackendError):
    """A backend violated the wire contract (e.g. a 2-sentence window returned != 2)."""


class ModelError(ChatQEError):
    """Detector training or loading failed (single-class data, vocab mismatch, ...)."""
