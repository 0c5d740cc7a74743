"""Exception types shared across the package.

The CLI prints errors as one line, ``<ClassName>: <message>``, so class
names double as machine-parsable error codes.  Names describe the failure,
not the module that raised it; several are reused wherever the same failure
mode applies (e.g. ``MalformedRecord`` for any bad JSON Lines row).
"""

from __future__ import annotations


class PgxragError(Exception):
    """Base class for every error this package raises deliberately."""


# --- file and record level -------------------------------------------------

class MissingFile(PgxragError):
    pass


class MalformedRecord(PgxragError):
    """A JSON Lines row that fails validation; carries its 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateDocId(PgxragError):
    def __init__(self, doc_id: str):
        super().__init__(f"duplicate doc_id {doc_id!r}")
        self.doc_id = doc_id


class DuplicateChunkId(PgxragError):
    def __init__(self, chunk_id: str):
        super().__init__(f"duplicate chunk_id {chunk_id!r}")
        self.chunk_id = chunk_id


class EmptyDocument(PgxragError):
    pass


# --- embedding and retrieval ----------------------------------------------

class EmptyText(PgxragError):
    pass


class BackendUnavailable(PgxragError):
    pass


class CassetteMiss(BackendUnavailable):
    """Replay-mode cassette has no recording for the request."""

    def __init__(self, request_hash: str):
        super().__init__(f"no recorded response for request_hash {request_hash}")
        self.request_hash = request_hash


class DimensionMismatch(PgxragError):
    pass


class EmptyCorpus(PgxragError):
    pass


# --- index persistence -----------------------------------------------------

class IoFailure(PgxragError):
    pass


class CorruptIndex(PgxragError):
    pass


class VersionMismatch(PgxragError):
    pass


# --- prompt templates ------------------------------------------------------

class MissingBinding(PgxragError):
    def __init__(self, name: str):
        super().__init__(f"no binding for placeholder {{{name}}}")
        self.name = name


class UnknownPlaceholder(PgxragError):
    def __init__(self, name: str):
        super().__init__(f"unknown placeholder {{{name}}}")
        self.name = name


# --- pipeline --------------------------------------------------------------

class EmptyChunk(PgxragError):
    pass


class NoSummaries(PgxragError):
    pass


class ConfigMismatch(PgxragError):
    pass


# --- evaluation ------------------------------------------------------------

class UndefinedMetric(PgxragError):
    pass


class EmptyGroup(PgxragError):
    pass


class UnknownGroup(PgxragError):
    def __init__(self, group: str):
        super().__init__(f"unknown group {group!r}")
        self.group = group


class AllZeroDifferences(PgxragError):
    pass


class UnknownItem(PgxragError):
    def __init__(self, item_id: str):
        super().__init__(f"unknown quiz item {item_id!r}")
        self.item_id = item_id


class DuplicateAnswer(PgxragError):
    def __init__(self, item_id: str):
        super().__init__(f"duplicate answer for quiz item {item_id!r}")
        self.item_id = item_id


class DuplicateSubmission(PgxragError):
    """An annotation submission token was already consumed."""

    def __init__(self, token: str):
        super().__init__(f"submission token {token!r} already used")
        self.token = token
