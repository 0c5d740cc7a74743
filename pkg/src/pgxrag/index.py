"""Exact cosine similarity index with binary persistence.

The index is deliberately brute-force: score every stored vector against the
query and take the top k.  At knowledge-base scale (tens of chunks, low
thousands at the outside) exactness is worth far more than ANN speed.

Storage is float32 — half the bytes, and a lossless round trip through the
on-disk format — while scoring always runs in float64 after upcasting, so
search results do not depend on the precision of intermediate arithmetic.

File format (little-endian throughout)::

    magic    6 bytes  b"PGXIDX"
    version  1 byte   b"1"
    dim      uint32
    count    uint32
    tag_len  uint16, then tag_len bytes of UTF-8 backend tag
    checksum 32 bytes, SHA-256 of the payload
    payload  count x (uint16 id_len + UTF-8 chunk id), in lexical id order,
             then count*dim float32 vectors in the same order
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Chunk
from .embedding import EmbeddingBackend, embed
from .errors import (
    CorruptIndex,
    DimensionMismatch,
    DuplicateChunkId,
    EmptyCorpus,
    IoFailure,
    PgxragError,
    VersionMismatch,
)

MAGIC = b"PGXIDX"
VERSION = b"1"

_NORM_TOL_F64 = 1e-6
_NORM_TOL_F32 = 1e-5


@dataclass(frozen=True)
class ScoredHit:
    chunk_id: str
    score: float


@dataclass(frozen=True)
class VectorIndex:
    """Unit vectors for a set of chunk ids, kept in lexical id order."""

    chunk_ids: tuple[str, ...]
    vectors: np.ndarray  # float32, shape (count, dim)
    backend_tag: str

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.chunk_ids):
            raise ValueError("vectors must be a (count, dim) matrix matching chunk_ids")
        if self.vectors.dtype != np.float32:
            raise ValueError(f"vectors must be float32, got {self.vectors.dtype}")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.chunk_ids)

    @cached_property
    def _matrix64(self) -> np.ndarray:
        return self.vectors.astype(np.float64)

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[str, np.ndarray]], backend_tag: str) -> "VectorIndex":
        items = sorted(entries, key=lambda kv: kv[0])
        if not items:
            raise EmptyCorpus("cannot build an index from zero vectors")
        seen: set[str] = set()
        rows: list[np.ndarray] = []
        dim: int | None = None
        for chunk_id, vec in items:
            if chunk_id in seen:
                raise DuplicateChunkId(chunk_id)
            seen.add(chunk_id)
            arr = np.asarray(vec, dtype=np.float64).ravel()
            if dim is None:
                dim = arr.size
            elif arr.size != dim:
                raise DimensionMismatch(f"vector for {chunk_id!r} has size {arr.size}, expected {dim}")
            norm = float(np.linalg.norm(arr))
            if abs(norm - 1.0) > _NORM_TOL_F64:
                raise ValueError(f"vector for {chunk_id!r} is not unit-norm (|v| = {norm})")
            rows.append(arr.astype(np.float32))
        matrix = np.vstack(rows)
        return cls(chunk_ids=tuple(cid for cid, _ in items), vectors=matrix, backend_tag=backend_tag)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors; unit norm is asserted, not repaired."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    for name, v in (("a", a), ("b", b)):
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > _NORM_TOL_F64:
            raise ValueError(f"vector {name} is not unit-norm (|v| = {norm})")
    return float(np.dot(a, b))


def build_index(chunks: Sequence[Chunk], backend: EmbeddingBackend) -> VectorIndex:
    """Embed every chunk and assemble the index; fails naming the bad chunk."""
    if not chunks:
        raise EmptyCorpus("no chunks to index")
    entries: list[tuple[str, np.ndarray]] = []
    for chunk in chunks:
        try:
            vec = embed(chunk.text, backend)
        except PgxragError as exc:
            raise type(exc)(f"chunk {chunk.chunk_id!r}: {exc}") from exc
        entries.append((chunk.chunk_id, vec))
    return VectorIndex.from_entries(entries, backend_tag=backend.tag)


def search_top_k(index: VectorIndex, query_vector: np.ndarray, k: int) -> list[ScoredHit]:
    """Exact top-k by cosine score, descending; score ties break by chunk id.

    Scores are float64 dot products against the full matrix.  Selection uses
    argpartition for the score cutoff, then re-sorts the candidate set with
    the (-score, chunk_id) key, so equal-score chunks always order the same
    way regardless of their position in the index.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = np.asarray(query_vector, dtype=np.float64).ravel()
    if q.size != index.dim:
        raise DimensionMismatch(f"query has dimension {q.size}, index has {index.dim}")
    # einsum reduces each row independently, so byte-identical vectors always
    # get byte-identical scores; the matmul kernel does not guarantee that at
    # every shape, which would make tie order depend on row position
    scores = np.einsum("ij,j->i", index._matrix64, q)
    n = len(index)
    m = min(k, n)
    if m == n:
        candidates = range(n)
    else:
        cutoff = np.partition(scores, n - m)[n - m]
        candidates = np.flatnonzero(scores >= cutoff)
    ordered = sorted(candidates, key=lambda i: (-scores[i], index.chunk_ids[i]))[:m]
    return [ScoredHit(chunk_id=index.chunk_ids[i], score=float(scores[i])) for i in ordered]


def persist_index(index: VectorIndex, path: Path | str) -> None:
    """Write the index to disk atomically (temp file + rename)."""
    path = Path(path)
    payload = bytearray()
    for chunk_id in index.chunk_ids:
        raw = chunk_id.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"chunk id too long to persist: {chunk_id[:40]}...")
        payload += struct.pack("<H", len(raw)) + raw
    payload += np.ascontiguousarray(index.vectors, dtype="<f4").tobytes()
    tag_raw = index.backend_tag.encode("utf-8")
    header = (
        MAGIC
        + VERSION
        + struct.pack("<II", index.dim, len(index))
        + struct.pack("<H", len(tag_raw))
        + tag_raw
        + hashlib.sha256(bytes(payload)).digest()
    )
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write index to {path}: {exc}") from exc


def open_index(path: Path | str) -> VectorIndex:
    """Read an index file back, verifying magic, version, and checksum.

    The stored float32 vectors are used exactly as read — no re-normalization
    — so a persist/open round trip is bitwise lossless.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read index from {path}: {exc}") from exc

    if len(blob) < 7:
        raise CorruptIndex("file too short to hold a header")
    if blob[:6] != MAGIC:
        raise CorruptIndex("bad magic; not an index file")
    if blob[6:7] != VERSION:
        raise VersionMismatch(f"unsupported index version {blob[6:7]!r}, expected {VERSION!r}")

    offset = 7
    try:
        dim, count = struct.unpack_from("<II", blob, offset)
        offset += 8
        (tag_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        tag = blob[offset : offset + tag_len].decode("utf-8")
        offset += tag_len
        checksum = blob[offset : offset + 32]
        if len(checksum) != 32:
            raise struct.error("short checksum")
        offset += 32
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptIndex(f"truncated or invalid header: {exc}") from exc

    payload = blob[offset:]
    if hashlib.sha256(payload).digest() != checksum:
        raise CorruptIndex("payload checksum mismatch")

    pos = 0
    chunk_ids: list[str] = []
    try:
        for _ in range(count):
            (id_len,) = struct.unpack_from("<H", payload, pos)
            pos += 2
            chunk_ids.append(payload[pos : pos + id_len].decode("utf-8"))
            pos += id_len
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptIndex(f"invalid chunk id table: {exc}") from exc

    expected = count * dim * 4
    if len(payload) - pos != expected:
        raise CorruptIndex(f"vector block is {len(payload) - pos} bytes, expected {expected}")
    vectors = np.frombuffer(payload[pos:], dtype="<f4").reshape(count, dim).astype(np.float32)

    if chunk_ids != sorted(chunk_ids):
        raise CorruptIndex("chunk ids are not in lexical order")
    if len(set(chunk_ids)) != count:
        raise CorruptIndex("chunk ids are not unique")
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    if count and np.max(np.abs(norms - 1.0)) > _NORM_TOL_F32:
        raise CorruptIndex("stored vectors are not unit-norm")
    return VectorIndex(chunk_ids=tuple(chunk_ids), vectors=vectors, backend_tag=tag)
