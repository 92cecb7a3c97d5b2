"""Error types shared across the toolkit.

Every failure mode carries a stable kebab-case code so that the CLI and the
HTTP service can report it without string-matching exception messages.
"""

from __future__ import annotations


class TacrecError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class InvalidConfig(TacrecError):
    code = "invalid-config"


class EmptyDataset(TacrecError):
    code = "empty-dataset"


class EmptyContext(TacrecError):
    code = "empty-context"


class EmptyTactic(TacrecError):
    code = "empty-tactic"


class TacticParseFailure(TacrecError):
    code = "tactic-parse-failure"


class NoSuchDirectory(TacrecError):
    code = "no-such-directory"


class IoError(TacrecError):
    code = "io-error"


class CorruptDataset(TacrecError):
    code = "corrupt-dataset"


class CorruptCheckpoint(TacrecError):
    code = "corrupt-checkpoint"


class VocabMismatch(TacrecError):
    code = "vocab-mismatch"


class InvalidId(TacrecError):
    code = "invalid-id"


class InvalidLabel(TacrecError):
    code = "invalid-label"
