"""Generation backends: remote chat model, offline extractive reference, cassette.

Every backend answers the same ``GenerationRequest``.  The request carries the
rendered system and user prompts (what a remote model sees) plus a ``meta``
mapping describing the task structurally; ``meta`` is what the offline
reference backend works from, and it is deliberately excluded from the
request hash so cassettes recorded against a remote model replay for the
identical prompts regardless of backend bookkeeping.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence, runtime_checkable

import requests

from .errors import BackendUnavailable, CassetteMiss, MalformedRecord, MissingFile
from .lexicon import GuidelineLexicon, extract_targets
from .util import canonical_json, sha256_hex

DEFAULT_CHAT_MODEL = "gpt-4o-mini"
API_KEY_ENV = "PGXRAG_API_KEY"

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_WORD_RE = re.compile(r"[a-z0-9]+")
_SOURCE_PREFIX = re.compile(r"^Source:\s*[^.]*\.\s*")

# Function words ignored when scoring sentence/query overlap.  Small on
# purpose: domain words ("dosing", "genotype") must keep their weight.
STOPWORDS = frozenset(
    """a an and are as at be but by for from has have how in is it of on or
    should that the their this to was were what when which who will with
    would""".split()
)


@dataclass(frozen=True)
class GenerationRequest:
    system: str
    user: str
    temperature: float = 0.0
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def request_hash(self) -> str:
        """SHA-256 over the canonical JSON of (system, user, temperature) only."""
        return sha256_hex(
            canonical_json({"system": self.system, "user": self.user, "temperature": self.temperature})
        )


@runtime_checkable
class GenerationBackend(Protocol):
    tag: str

    def generate(self, request: GenerationRequest) -> str: ...


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_SPLIT.split(text.strip()) if s.strip()]


def content_words(text: str) -> set[str]:
    return {w for w in _WORD_RE.findall(text.lower()) if w not in STOPWORDS}


def extractive_summary(query: str, content: str, source: str, max_sentences: int = 3) -> str:
    """Pick the sentences sharing the most content words with the query.

    Zero-overlap sentences are dropped unless nothing overlaps at all, in
    which case the leading sentences stand in.  Selected sentences keep their
    original order and are prefixed with the source label.
    """
    sentences = split_sentences(content)
    query_words = content_words(query)
    scored = [(len(content_words(s) & query_words), i, s) for i, s in enumerate(sentences)]
    candidates = [t for t in scored if t[0] > 0] or scored
    top = sorted(candidates, key=lambda t: (-t[0], t[1]))[:max_sentences]
    chosen = [s for _, _, s in sorted(top, key=lambda t: t[1])]
    return f"Source: {source}. " + " ".join(chosen)


def _first_sentence(text: str) -> str:
    sentences = split_sentences(text)
    return sentences[0] if sentences else text.strip()


def offline_synthesis(query: str, summaries: Sequence[tuple[str, str]], lexicon: GuidelineLexicon) -> str:
    """Deterministic synthesis: one numbered line per summary, then a target recap."""
    lines = []
    for i, (source, text) in enumerate(summaries, start=1):
        body = _SOURCE_PREFIX.sub("", text, count=1)
        lines.append(f"{i}. {source}: {_first_sentence(body)}")
    targets = extract_targets(query, lexicon)
    if targets.is_empty():
        lines.append("Summary: no guideline drugs or genes matched the query.")
    else:
        drugs = ", ".join(targets.drugs) if targets.drugs else "none"
        genes = ", ".join(targets.genes) if targets.genes else "none"
        lines.append(f"Summary: drugs: {drugs}; genes: {genes}.")
    return "\n".join(lines)


class OfflineGenerationBackend:
    """Extractive reference backend driven entirely by request metadata.

    Same text in, same text out, no model anywhere — the point is a fully
    deterministic pipeline for tests and air-gapped runs, not answer quality.
    """

    tag = "offline"

    def __init__(self, lexicon: GuidelineLexicon):
        self.lexicon = lexicon

    def generate(self, request: GenerationRequest) -> str:
        kind = request.meta.get("kind")
        if kind == "summarize":
            return extractive_summary(
                query=request.meta["query"],
                content=request.meta["content"],
                source=request.meta["source"],
            )
        if kind == "synthesize":
            summaries = [(str(s), str(t)) for s, t in request.meta["summaries"]]
            return offline_synthesis(request.meta["query"], summaries, self.lexicon)
        raise BackendUnavailable(f"offline backend cannot serve request kind {kind!r}")


class RemoteGenerationBackend:
    """Client for an OpenAI-style ``/chat/completions`` endpoint."""

    def __init__(
        self,
        endpoint: str,
        model: str = DEFAULT_CHAT_MODEL,
        api_key: str | None = None,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        self.tag = f"remote:{model}"

    def generate(self, request: GenerationRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
        }
        try:
            resp = requests.post(
                f"{self.endpoint}/chat/completions", json=body, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(f"generation request failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"generation endpoint returned HTTP {resp.status_code}")
        try:
            text = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"generation response malformed: {exc}") from exc
        if not isinstance(text, str):
            raise BackendUnavailable("generation response content is not a string")
        return text


class CassetteBackend:
    """Record/replay wrapper keyed by request hash.

    Replay mode serves recorded responses only and fails loudly on a miss.
    Record mode delegates misses to the inner backend and appends the new
    (request_hash, response_text) pair to the cassette file as JSON Lines.
    """

    def __init__(
        self,
        path: Path | str,
        mode: str = "replay",
        inner: GenerationBackend | None = None,
    ):
        if mode not in ("replay", "record"):
            raise ValueError(f"mode must be 'replay' or 'record', got {mode!r}")
        if mode == "record" and inner is None:
            raise ValueError("record mode requires an inner backend")
        self.path = Path(path)
        self.mode = mode
        self.inner = inner
        self._lock = threading.Lock()
        self._responses: dict[str, str] = {}
        if self.path.is_file():
            self._load()
        elif mode == "replay":
            raise MissingFile(f"cassette file not found: {self.path}")
        self.tag = f"cassette:{inner.tag}" if (mode == "record" and inner is not None) else "cassette"

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line_number, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(line_number, f"invalid JSON ({exc.msg})") from exc
                if not isinstance(obj, dict) or "request_hash" not in obj or "response_text" not in obj:
                    raise MalformedRecord(line_number, "cassette rows need request_hash and response_text")
                self._responses[str(obj["request_hash"])] = str(obj["response_text"])

    def __len__(self) -> int:
        return len(self._responses)

    def generate(self, request: GenerationRequest) -> str:
        h = request.request_hash()
        with self._lock:
            if h in self._responses:
                return self._responses[h]
            if self.mode == "replay" or self.inner is None:
                raise CassetteMiss(h)
            text = self.inner.generate(request)
            self._responses[h] = text
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"request_hash": h, "response_text": text}, ensure_ascii=False) + "\n")
                fh.flush()
            return text
