"""The query pipeline: retrieve, summarize per chunk, synthesize one answer.

Three phase configurations exist.  Phase 1 retrieves from the primary
guideline corpus only.  Phase 2 adds the annotation-database documents to
the same retrieval pass.  Phase 3 keeps Phase 2's corpus and additionally
runs one supplementary retrieval per drug or gene the query mentions
(querying ``"{entity} {original query}"``), merging hits by best score under
a doubled context budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Chunk, Corpus, Document, Source
from .embedding import EmbeddingBackend, embed
from .errors import (
    ConfigMismatch,
    EmptyChunk,
    NoSummaries,
    PgxragError,
)
from .generation import GenerationBackend, GenerationRequest
from .index import ScoredHit, VectorIndex, search_top_k
from .lexicon import GuidelineLexicon, TargetEntities, extract_targets
from .templates import PromptTemplate, TemplateId, render_prompt
from .util import canonical_json, sha256_hex

DEFAULT_K = 4
BASE_CONTEXT_BUDGET = 4096
EXPANDED_CONTEXT_BUDGET = 8192

PHASE_SOURCES: dict[int, frozenset[Source]] = {
    1: frozenset({Source.CPIC}),
    2: frozenset({Source.CPIC, Source.PHARMGKB}),
    3: frozenset({Source.CPIC, Source.PHARMGKB}),
}


@dataclass(frozen=True)
class PhaseConfig:
    phase: int
    sources: frozenset[Source]
    k_primary: int = DEFAULT_K
    k_supplementary: int = 0
    temperature: float = 0.0
    context_token_budget: int = BASE_CONTEXT_BUDGET

    def __post_init__(self):
        if self.phase not in (1, 2, 3):
            raise ConfigMismatch(f"phase must be 1, 2, or 3, got {self.phase}")
        if self.temperature != 0.0:
            raise ConfigMismatch("generation is pinned to temperature 0 for reproducibility")
        if self.k_primary < 1:
            raise ConfigMismatch("k_primary must be >= 1")
        if self.k_supplementary < 0:
            raise ConfigMismatch("k_supplementary must be >= 0")
        if (self.phase == 3) != (self.k_supplementary > 0):
            raise ConfigMismatch("supplementary retrieval is exactly the phase 3 behavior")
        if self.context_token_budget < 1:
            raise ConfigMismatch("context_token_budget must be >= 1")

    @classmethod
    def for_phase(cls, phase: int) -> "PhaseConfig":
        if phase not in PHASE_SOURCES:
            raise ConfigMismatch(f"phase must be 1, 2, or 3, got {phase}")
        return cls(
            phase=phase,
            sources=PHASE_SOURCES[phase],
            k_primary=DEFAULT_K,
            k_supplementary=DEFAULT_K if phase == 3 else 0,
            context_token_budget=EXPANDED_CONTEXT_BUDGET if phase == 3 else BASE_CONTEXT_BUDGET,
        )

    def snapshot(self) -> dict:
        """Stable JSON-friendly form, used in trace hashes and run manifests."""
        return {
            "phase": self.phase,
            "sources": sorted(s.value for s in self.sources),
            "k_primary": self.k_primary,
            "k_supplementary": self.k_supplementary,
            "temperature": self.temperature,
            "context_token_budget": self.context_token_budget,
        }


@dataclass(frozen=True)
class PipelineResponse:
    query_id: str
    query_text: str
    phase: int
    hits: tuple[ScoredHit, ...]
    summaries: tuple[tuple[str, str], ...]  # (chunk_id, summary text)
    answer: str
    backend_tag: str
    trace_hash: str
    supplementary_queries: tuple[str, ...] = ()

    def to_obj(self) -> dict:
        return {
            "query_id": self.query_id,
            "query_text": self.query_text,
            "phase": self.phase,
            "hits": [{"chunk_id": h.chunk_id, "score": h.score} for h in self.hits],
            "summaries": [[cid, text] for cid, text in self.summaries],
            "answer": self.answer,
            "backend_tag": self.backend_tag,
            "trace_hash": self.trace_hash,
            "supplementary_queries": list(self.supplementary_queries),
        }

    @classmethod
    def from_obj(cls, obj: Mapping) -> "PipelineResponse":
        return cls(
            query_id=str(obj["query_id"]),
            query_text=str(obj.get("query_text", "")),
            phase=int(obj["phase"]),
            hits=tuple(ScoredHit(h["chunk_id"], float(h["score"])) for h in obj["hits"]),
            summaries=tuple((cid, text) for cid, text in obj["summaries"]),
            answer=str(obj["answer"]),
            backend_tag=str(obj.get("backend_tag", "")),
            trace_hash=str(obj.get("trace_hash", "")),
            supplementary_queries=tuple(obj.get("supplementary_queries", ())),
        )


def summarize_chunk(
    query: str,
    chunk_text: str,
    source_label: str,
    generator: GenerationBackend,
    templates: Mapping[TemplateId, PromptTemplate],
    temperature: float = 0.0,
) -> str:
    """Layer 1: one summary of one chunk, shaped by the user's query."""
    if not chunk_text or not chunk_text.strip():
        raise EmptyChunk(f"chunk from {source_label!r} has no text to summarize")
    system = templates[TemplateId.LAYER1_SYSTEM].text
    user = render_prompt(
        templates[TemplateId.LAYER1_USER],
        {"source": source_label, "query": query, "content": chunk_text},
    )
    request = GenerationRequest(
        system=system,
        user=user,
        temperature=temperature,
        meta={"kind": "summarize", "query": query, "content": chunk_text, "source": source_label},
    )
    return generator.generate(request)


def synthesize_answer(
    query: str,
    summaries: Sequence[tuple[str, str]],
    generator: GenerationBackend,
    templates: Mapping[TemplateId, PromptTemplate],
    temperature: float = 0.0,
) -> str:
    """Layer 2: one answer from all layer-1 summaries."""
    if not summaries:
        raise NoSummaries("no summaries to synthesize from")
    numbered = "\n".join(f"{i}. {text}" for i, (_, text) in enumerate(summaries, start=1))
    system = templates[TemplateId.LAYER2_SYSTEM].text
    user = render_prompt(
        templates[TemplateId.LAYER2_USER],
        {"user_input": query, "all_summaries": numbered},
    )
    request = GenerationRequest(
        system=system,
        user=user,
        temperature=temperature,
        meta={"kind": "synthesize", "query": query, "summaries": [list(s) for s in summaries]},
    )
    return generator.generate(request)


class Pipeline:
    """Wires one corpus, one index, and the two backends into ``answer_query``."""

    def __init__(
        self,
        corpus: Corpus,
        chunks: Sequence[Chunk],
        index: VectorIndex,
        config: PhaseConfig,
        embedder: EmbeddingBackend,
        generator: GenerationBackend,
        templates: Mapping[TemplateId, PromptTemplate],
        lexicon: GuidelineLexicon,
    ):
        self.corpus = corpus
        self.config = config
        self.embedder = embedder
        self.generator = generator
        self.templates = templates
        self.lexicon = lexicon
        self.index = index

        self._chunk_map: dict[str, tuple[Chunk, Document]] = {}
        for chunk in chunks:
            doc = corpus.by_id.get(chunk.doc_id)
            if doc is None:
                raise ConfigMismatch(f"chunk {chunk.chunk_id!r} references unknown doc {chunk.doc_id!r}")
            if doc.source not in config.sources:
                allowed = ", ".join(sorted(s.value for s in config.sources))
                raise ConfigMismatch(
                    f"chunk {chunk.chunk_id!r} comes from {doc.source.value}, "
                    f"but phase {config.phase} allows only: {allowed}"
                )
            self._chunk_map[chunk.chunk_id] = (chunk, doc)
        for chunk_id in index.chunk_ids:
            if chunk_id not in self._chunk_map:
                raise ConfigMismatch(f"index entry {chunk_id!r} has no matching chunk")

    @property
    def backend_tag(self) -> str:
        return f"{self.embedder.tag}+{self.generator.tag}"

    def _run_stage(self, stage: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PgxragError as exc:
            raise type(exc)(f"{stage}: {exc}") from exc

    def _retrieve(self, query: str) -> tuple[list[ScoredHit], list[str]]:
        qvec = self._run_stage("embed", embed, query, self.embedder)
        primary = self._run_stage("retrieve", search_top_k, self.index, qvec, self.config.k_primary)
        if self.config.k_supplementary <= 0:
            return primary, []

        targets: TargetEntities = extract_targets(query, self.lexicon)
        sub_queries = [f"{term} {query}" for term in targets.all_terms()]
        best: dict[str, float] = {h.chunk_id: h.score for h in primary}
        for sub in sub_queries:
            svec = self._run_stage("embed", embed, sub, self.embedder)
            for hit in self._run_stage(
                "retrieve", search_top_k, self.index, svec, self.config.k_supplementary
            ):
                prev = best.get(hit.chunk_id)
                if prev is None or hit.score > prev:
                    best[hit.chunk_id] = hit.score
        merged = [ScoredHit(cid, score) for cid, score in best.items()]
        merged.sort(key=lambda h: (-h.score, h.chunk_id))
        return merged, sub_queries

    def _apply_budget(self, hits: Sequence[ScoredHit]) -> list[ScoredHit]:
        """First-fit truncation: walk hits in rank order, keep what still fits.

        The top hit is always kept, even alone over budget — answering from
        the single best chunk beats answering from nothing.
        """
        retained: list[ScoredHit] = []
        used = 0
        for hit in hits:
            tokens = self._chunk_map[hit.chunk_id][0].token_estimate
            if not retained:
                retained.append(hit)
                used += tokens
            elif used + tokens <= self.config.context_token_budget:
                retained.append(hit)
                used += tokens
        return retained

    def answer_query(self, query_text: str, query_id: str = "") -> PipelineResponse:
        merged, sub_queries = self._retrieve(query_text)
        retained = self._apply_budget(merged)

        summaries: list[tuple[str, str]] = []
        for hit in retained:
            chunk, doc = self._chunk_map[hit.chunk_id]
            text = self._run_stage(
                "summarize",
                summarize_chunk,
                query_text,
                chunk.text,
                doc.doc_id,
                self.generator,
                self.templates,
                self.config.temperature,
            )
            summaries.append((hit.chunk_id, text))

        answer = self._run_stage(
            "synthesize",
            synthesize_answer,
            query_text,
            summaries,
            self.generator,
            self.templates,
            self.config.temperature,
        )

        trace_hash = sha256_hex(
            canonical_json(
                {
                    "query": query_text,
                    "config": self.config.snapshot(),
                    "hit_ids": [h.chunk_id for h in retained],
                    "summaries": [[cid, text] for cid, text in summaries],
                    "answer": answer,
                }
            )
        )
        return PipelineResponse(
            query_id=query_id,
            query_text=query_text,
            phase=self.config.phase,
            hits=tuple(retained),
            summaries=tuple(summaries),
            answer=answer,
            backend_tag=self.backend_tag,
            trace_hash=trace_hash,
            supplementary_queries=tuple(sub_queries),
        )
