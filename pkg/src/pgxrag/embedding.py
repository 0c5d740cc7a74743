"""Text embedding backends.

Two implementations of the same contract: a remote HTTP client for a hosted
embedding model, and a deterministic offline reference (hashed bag of words)
that makes the whole pipeline runnable and testable with no network.  Both
produce unit-normalized float64 vectors via the ``embed`` entry point.
"""

from __future__ import annotations

import hashlib
import os
import re
from typing import Protocol, runtime_checkable

import numpy as np
import requests

from .errors import BackendUnavailable, DimensionMismatch, EmptyText

TOKEN_RE = re.compile(r"[a-z0-9]+")

DEFAULT_OFFLINE_DIM = 64
DEFAULT_REMOTE_MODEL = "text-embedding-3-small"
DEFAULT_REMOTE_DIM = 1536
API_KEY_ENV = "PGXRAG_API_KEY"


@runtime_checkable
class EmbeddingBackend(Protocol):
    """Anything that maps text to a raw (not yet normalized) vector."""

    tag: str
    dim: int

    def embed_raw(self, text: str) -> np.ndarray: ...


def _hash_bucket(token: str, dim: int) -> int:
    # blake2b rather than hash(): stable across processes and interpreter runs.
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


class OfflineEmbedder:
    """Hashed bag-of-words reference embedder.

    Tokens are lowercased alphanumeric runs; each token hashes to one of
    ``dim`` buckets and the bucket counts, L2-normalized, are the vector.
    Deterministic to the bit across runs and platforms.
    """

    def __init__(self, dim: int = DEFAULT_OFFLINE_DIM):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.tag = f"offline-bow-{dim}"

    def embed_raw(self, text: str) -> np.ndarray:
        counts = np.zeros(self.dim, dtype=np.float64)
        for token in TOKEN_RE.findall(text.lower()):
            counts[_hash_bucket(token, self.dim)] += 1.0
        return counts


class RemoteEmbedder:
    """Client for an OpenAI-style ``/embeddings`` endpoint."""

    def __init__(
        self,
        endpoint: str,
        model: str = DEFAULT_REMOTE_MODEL,
        dim: int = DEFAULT_REMOTE_DIM,
        api_key: str | None = None,
        timeout: float = 30.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.dim = dim
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.tag = f"remote:{model}"

    def embed_raw(self, text: str) -> np.ndarray:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = requests.post(
                f"{self.endpoint}/embeddings",
                json={"model": self.model, "input": text},
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"embedding request failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"embedding endpoint returned HTTP {resp.status_code}")
        try:
            vector = resp.json()["data"][0]["embedding"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"embedding response malformed: {exc}") from exc
        arr = np.asarray(vector, dtype=np.float64)
        if arr.ndim != 1 or arr.size != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {arr.size}")
        return arr


def embed(text: str, backend: EmbeddingBackend) -> np.ndarray:
    """Embed nonempty text into a unit-normalized float64 vector.

    All validation lives here so every backend inherits it: empty or
    whitespace-only text is rejected, the backend's declared dimension is
    enforced, and an all-zero raw vector (text with no alphanumeric tokens)
    is rejected rather than silently normalized into NaNs.
    """
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    raw = np.asarray(backend.embed_raw(text), dtype=np.float64)
    if raw.ndim != 1:
        raw = raw.ravel()
    if raw.size != backend.dim:
        raise DimensionMismatch(f"backend {backend.tag} returned size {raw.size}, declared {backend.dim}")
    norm = float(np.linalg.norm(raw))
    if norm == 0.0:
        raise EmptyText("text has no content the backend can embed (all-zero vector)")
    return raw / norm
