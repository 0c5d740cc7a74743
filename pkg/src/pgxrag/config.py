"""Backend selection and assembly shared by the CLI and the HTTP service.

Backends come in three modes.  ``offline`` needs nothing and is fully
deterministic; ``remote`` talks to hosted embedding/chat endpoints using the
``PGXRAG_API_KEY`` environment variable for credentials (never a config
file, never a flag — keys do not belong in shell history or JSON on disk);
``cassette`` replays recorded generations and can record through a remote
backend.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Chunk, Corpus, chunk_corpus, load_corpus
from .embedding import (
    DEFAULT_REMOTE_DIM,
    DEFAULT_REMOTE_MODEL,
    EmbeddingBackend,
    OfflineEmbedder,
    RemoteEmbedder,
)
from .errors import ConfigMismatch, MalformedRecord, MissingFile
from .generation import (
    DEFAULT_CHAT_MODEL,
    CassetteBackend,
    GenerationBackend,
    OfflineGenerationBackend,
    RemoteGenerationBackend,
)
from .index import VectorIndex, build_index, open_index
from .lexicon import GuidelineLexicon, default_lexicon, load_lexicon
from .pipeline import PhaseConfig, Pipeline
from .templates import load_templates

GENERATION_MODES = ("offline", "remote", "cassette", "cassette-record")
EMBEDDING_MODES = ("offline", "remote")


@dataclass(frozen=True)
class RemoteSettings:
    embedding_endpoint: str = ""
    embedding_model: str = DEFAULT_REMOTE_MODEL
    embedding_dim: int = DEFAULT_REMOTE_DIM
    generation_endpoint: str = ""
    generation_model: str = DEFAULT_CHAT_MODEL

    @classmethod
    def from_file(cls, path: Path | str) -> "RemoteSettings":
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"config file not found: {path}")
        try:
            obj = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(0, f"invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise MalformedRecord(0, "config must be a JSON object")
        emb = obj.get("embedding", {})
        gen = obj.get("generation", {})
        return cls(
            embedding_endpoint=str(emb.get("endpoint", "")),
            embedding_model=str(emb.get("model", DEFAULT_REMOTE_MODEL)),
            embedding_dim=int(emb.get("dim", DEFAULT_REMOTE_DIM)),
            generation_endpoint=str(gen.get("endpoint", "")),
            generation_model=str(gen.get("model", DEFAULT_CHAT_MODEL)),
        )


def make_embedder(mode: str, settings: RemoteSettings | None = None, dim: int | None = None) -> EmbeddingBackend:
    if mode == "offline":
        return OfflineEmbedder(dim=dim) if dim else OfflineEmbedder()
    if mode == "remote":
        if settings is None or not settings.embedding_endpoint:
            raise ConfigMismatch("remote embedding requires a config file with embedding.endpoint")
        return RemoteEmbedder(
            endpoint=settings.embedding_endpoint,
            model=settings.embedding_model,
            dim=settings.embedding_dim,
        )
    raise ConfigMismatch(f"unknown embedding mode {mode!r}; expected one of: {', '.join(EMBEDDING_MODES)}")


def make_generator(
    mode: str,
    lexicon: GuidelineLexicon,
    settings: RemoteSettings | None = None,
    cassette_path: Path | str | None = None,
) -> GenerationBackend:
    if mode == "offline":
        return OfflineGenerationBackend(lexicon)
    if mode == "remote":
        if settings is None or not settings.generation_endpoint:
            raise ConfigMismatch("remote generation requires a config file with generation.endpoint")
        return RemoteGenerationBackend(
            endpoint=settings.generation_endpoint, model=settings.generation_model
        )
    if mode in ("cassette", "cassette-record"):
        if cassette_path is None:
            raise ConfigMismatch("cassette generation requires --cassette PATH")
        if mode == "cassette":
            return CassetteBackend(cassette_path, mode="replay")
        inner = make_generator("remote", lexicon, settings)
        return CassetteBackend(cassette_path, mode="record", inner=inner)
    raise ConfigMismatch(f"unknown generation mode {mode!r}; expected one of: {', '.join(GENERATION_MODES)}")


def assemble_pipeline(
    corpus_path: Path | str,
    phase: int,
    embedding_mode: str = "offline",
    generation_mode: str = "offline",
    settings: RemoteSettings | None = None,
    cassette_path: Path | str | None = None,
    index_path: Path | str | None = None,
    lexicon_path: Path | str | None = None,
    template_dir: Path | str | None = None,
) -> tuple[Pipeline, Corpus, list[Chunk]]:
    """Load everything a phase needs and wire it into a ready pipeline.

    Without ``index_path`` the index is built in memory from the corpus; with
    it, the persisted index is opened and must match the embedder's tag.
    """
    config = PhaseConfig.for_phase(phase)
    corpus = load_corpus(corpus_path, expected_sources=config.sources)
    chunks, _ = chunk_corpus(corpus)
    lexicon = load_lexicon(lexicon_path) if lexicon_path else default_lexicon()
    embedder = make_embedder(embedding_mode, settings)
    generator = make_generator(generation_mode, lexicon, settings, cassette_path)
    templates = load_templates(template_dir)
    if index_path is not None:
        index: VectorIndex = open_index(index_path)
        if index.backend_tag != embedder.tag:
            raise ConfigMismatch(
                f"index was built with backend {index.backend_tag!r}, "
                f"but the session embedder is {embedder.tag!r}"
            )
    else:
        index = build_index(chunks, embedder)
    pipeline = Pipeline(
        corpus=corpus,
        chunks=chunks,
        index=index,
        config=config,
        embedder=embedder,
        generator=generator,
        templates=templates,
        lexicon=lexicon,
    )
    return pipeline, corpus, chunks
