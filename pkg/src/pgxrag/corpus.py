"""Loading, validating, and chunking guideline corpora.

A corpus file is JSON Lines: one document object per line with keys
``doc_id``, ``source``, ``guideline_key``, ``title``, ``body``, ``drugs``,
``genes``.  Loading is fail-fast — any invalid line rejects the whole file —
because a silently truncated knowledge base poisons everything computed
downstream of it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateDocId,
    EmptyDocument,
    MalformedRecord,
    MissingFile,
)

DEFAULT_MAX_CHUNK_TOKENS = 512
MIN_MAX_CHUNK_TOKENS = 32

_BLANK_LINE = re.compile(r"\n[ \t\r\f\v]*\n")


class Source(str, Enum):
    """Origin of a document; phase configurations filter on it at load time."""

    CPIC = "CPIC"
    PHARMGKB = "PharmGKB"
    OTHER = "Other"


def token_count(text: str) -> int:
    """Whitespace token count — the deterministic, backend-agnostic budget unit."""
    return len(text.split())


def normalize_body(body: str) -> str:
    """Body text with each paragraph stripped and blank separator lines removed.

    This is the whitespace form chunking preserves: joining a document's chunk
    texts with a single newline reproduces exactly ``normalize_body(body)``.
    """
    return "\n".join(p for p in (part.strip() for part in _BLANK_LINE.split(body)) if p)


def _require_str(obj: Mapping, key: str, line_number: int) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise MalformedRecord(line_number, f"field {key!r} must be a string")
    return value


def _require_str_list(obj: Mapping, key: str, line_number: int) -> tuple[str, ...]:
    value = obj.get(key, [])
    if not isinstance(value, list) or any(not isinstance(v, str) or not v.strip() for v in value):
        raise MalformedRecord(line_number, f"field {key!r} must be a list of nonempty strings")
    if len(set(value)) != len(value):
        raise MalformedRecord(line_number, f"field {key!r} contains duplicates")
    return tuple(value)


@dataclass(frozen=True)
class Document:
    """One guideline document as stored in a corpus file."""

    doc_id: str
    source: Source
    guideline_key: str
    title: str
    body: str
    drugs: tuple[str, ...] = ()
    genes: tuple[str, ...] = ()

    @classmethod
    def from_obj(cls, obj: object, line_number: int = 0) -> "Document":
        if not isinstance(obj, dict):
            raise MalformedRecord(line_number, "record must be a JSON object")
        doc_id = _require_str(obj, "doc_id", line_number)
        if not doc_id.strip():
            raise MalformedRecord(line_number, "doc_id must be nonempty")
        raw_source = _require_str(obj, "source", line_number)
        try:
            source = Source(raw_source)
        except ValueError:
            allowed = ", ".join(s.value for s in Source)
            raise MalformedRecord(line_number, f"source {raw_source!r} not one of: {allowed}") from None
        body = _require_str(obj, "body", line_number)
        if not body.strip():
            raise MalformedRecord(line_number, "body must be nonempty")
        return cls(
            doc_id=doc_id,
            source=source,
            guideline_key=_require_str(obj, "guideline_key", line_number),
            title=_require_str(obj, "title", line_number),
            body=body,
            drugs=_require_str_list(obj, "drugs", line_number),
            genes=_require_str_list(obj, "genes", line_number),
        )

    def to_obj(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "source": self.source.value,
            "guideline_key": self.guideline_key,
            "title": self.title,
            "body": self.body,
            "drugs": list(self.drugs),
            "genes": list(self.genes),
        }


@dataclass(frozen=True)
class Corpus:
    """Documents kept after source filtering, plus the count filtered away."""

    documents: tuple[Document, ...]
    excluded_count: int = 0

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @cached_property
    def by_id(self) -> Mapping[str, Document]:
        return {d.doc_id: d for d in self.documents}


def load_corpus(path: Path | str, expected_sources: Iterable[Source] | None = None) -> Corpus:
    """Load and validate a JSON Lines corpus file.

    ``expected_sources`` keeps only documents whose source is in the set and
    counts the rest as excluded; ``None`` keeps everything.  Duplicate doc_ids
    are rejected across the whole file, including documents that would have
    been filtered out.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"corpus file not found: {path}")
    wanted = set(expected_sources) if expected_sources is not None else None
    kept: list[Document] = []
    excluded = 0
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON ({exc.msg})") from exc
            doc = Document.from_obj(obj, line_number)
            if doc.doc_id in seen:
                raise DuplicateDocId(doc.doc_id)
            seen.add(doc.doc_id)
            if wanted is not None and doc.source not in wanted:
                excluded += 1
                continue
            kept.append(doc)
    return Corpus(documents=tuple(kept), excluded_count=excluded)


def serialize_corpus(documents: Iterable[Document]) -> str:
    """Render documents back to JSON Lines; a load/serialize round trip is lossless."""
    lines = [json.dumps(d.to_obj(), ensure_ascii=False, sort_keys=True) for d in documents]
    return "\n".join(lines) + ("\n" if lines else "")


def save_corpus(documents: Iterable[Document], path: Path | str) -> None:
    Path(path).write_text(serialize_corpus(documents), encoding="utf-8")


@dataclass(frozen=True)
class Chunk:
    """A retrieval unit cut from one document."""

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str

    @property
    def token_estimate(self) -> int:
        return token_count(self.text)


@dataclass(frozen=True)
class ChunkingResult:
    chunks: tuple[Chunk, ...]
    oversized_chunk_ids: tuple[str, ...] = ()
    """Chunks from single paragraphs that alone exceed the token ceiling.

    They are kept (dropping content silently would be worse) but flagged so
    callers can log or reject them."""


def chunk_document(doc: Document, max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS) -> ChunkingResult:
    """Greedily pack whole paragraphs into chunks of at most ``max_chunk_tokens``.

    Paragraphs are blank-line-separated blocks of the body.  A paragraph never
    splits across chunks; a single paragraph above the ceiling becomes its own
    flagged oversized chunk.  Chunk ids are ``{doc_id}#{ordinal}`` with dense
    ordinals from 0.
    """
    if max_chunk_tokens < MIN_MAX_CHUNK_TOKENS:
        raise ValueError(f"max_chunk_tokens must be >= {MIN_MAX_CHUNK_TOKENS}, got {max_chunk_tokens}")
    paragraphs = [p for p in (part.strip() for part in _BLANK_LINE.split(doc.body)) if p]
    if not paragraphs:
        raise EmptyDocument(f"document {doc.doc_id!r} has no non-blank paragraphs")

    texts: list[str] = []
    oversized_positions: list[int] = []
    pending: list[str] = []
    pending_tokens = 0

    def flush() -> None:
        nonlocal pending, pending_tokens
        if pending:
            texts.append("\n".join(pending))
            pending = []
            pending_tokens = 0

    for para in paragraphs:
        n = token_count(para)
        if n > max_chunk_tokens:
            flush()
            oversized_positions.append(len(texts))
            texts.append(para)
            continue
        if pending and pending_tokens + n > max_chunk_tokens:
            flush()
        pending.append(para)
        pending_tokens += n
    flush()

    chunks = tuple(
        Chunk(chunk_id=f"{doc.doc_id}#{i}", doc_id=doc.doc_id, ordinal=i, text=text)
        for i, text in enumerate(texts)
    )
    oversized = tuple(chunks[i].chunk_id for i in oversized_positions)
    return ChunkingResult(chunks=chunks, oversized_chunk_ids=oversized)


def chunk_corpus(
    corpus: Corpus, max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS
) -> tuple[list[Chunk], list[str]]:
    """Chunk every document in corpus order; returns (chunks, oversized ids)."""
    all_chunks: list[Chunk] = []
    oversized: list[str] = []
    for doc in corpus:
        result = chunk_document(doc, max_chunk_tokens)
        all_chunks.extend(result.chunks)
        oversized.extend(result.oversized_chunk_ids)
    return all_chunks, oversized
