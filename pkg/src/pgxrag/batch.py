"""Batch runs over a query dataset, with reproducibility manifests.

A run's manifest captures everything that determines its output: phase
configuration, backend tags, template and input digests, tool version.
Its digest deliberately excludes wall-clock timestamps — two runs of the
same inputs must produce byte-identical output files, so the output file
embeds only the digest while the timestamped manifest lives in a sidecar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .evaluation import QueryRecord
from .pipeline import Pipeline, PipelineResponse
from .templates import PromptTemplate, TemplateId
from .util import canonical_json, sha256_hex, utc_now_iso


@dataclass(frozen=True)
class RunManifest:
    config: Mapping[str, object]          # PhaseConfig.snapshot()
    embedder_tag: str
    generator_tag: str
    template_digests: Mapping[str, str]   # template id -> sha256 of template text
    corpus_digest: str
    dataset_digest: str
    tool_version: str = __version__
    started_at: str = ""
    finished_at: str = ""

    def identity_digest(self) -> str:
        """Digest of what the run computes, not when it ran."""
        return sha256_hex(
            canonical_json(
                {
                    "config": dict(self.config),
                    "embedder_tag": self.embedder_tag,
                    "generator_tag": self.generator_tag,
                    "template_digests": dict(self.template_digests),
                    "corpus_digest": self.corpus_digest,
                    "dataset_digest": self.dataset_digest,
                    "tool_version": self.tool_version,
                }
            )
        )

    def to_obj(self) -> dict:
        return {
            "config": dict(self.config),
            "embedder_tag": self.embedder_tag,
            "generator_tag": self.generator_tag,
            "template_digests": dict(self.template_digests),
            "corpus_digest": self.corpus_digest,
            "dataset_digest": self.dataset_digest,
            "tool_version": self.tool_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "identity_digest": self.identity_digest(),
        }


def template_digests(templates: Mapping[TemplateId, PromptTemplate]) -> dict[str, str]:
    return {tid.value: sha256_hex(t.text) for tid, t in templates.items()}


@dataclass(frozen=True)
class BatchResult:
    count: int
    manifest: RunManifest
    responses: tuple[PipelineResponse, ...] = field(repr=False, default=())


def run_batch(
    records: Sequence[QueryRecord],
    pipeline: Pipeline,
    out_path: Path | str,
    corpus_digest: str,
    dataset_digest: str,
) -> BatchResult:
    """Answer every dataset query in order and write one JSONL output file.

    The output's first line carries the manifest identity digest; each
    following line is one response.  The full manifest (with timestamps)
    is written next to the output as ``<name>.manifest.json``.
    """
    out_path = Path(out_path)
    started = utc_now_iso()
    responses = [pipeline.answer_query(r.text, r.query_id) for r in records]
    finished = utc_now_iso()
    manifest = RunManifest(
        config=pipeline.config.snapshot(),
        embedder_tag=pipeline.embedder.tag,
        generator_tag=pipeline.generator.tag,
        template_digests=template_digests(pipeline.templates),
        corpus_digest=corpus_digest,
        dataset_digest=dataset_digest,
        started_at=started,
        finished_at=finished,
    )
    lines = [canonical_json({"manifest_digest": manifest.identity_digest()})]
    lines.extend(canonical_json(r.to_obj()) for r in responses)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = out_path.with_name(out_path.name + ".manifest.json")
    sidecar.write_text(json.dumps(manifest.to_obj(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return BatchResult(count=len(responses), manifest=manifest, responses=tuple(responses))


def load_batch_output(path: Path | str) -> tuple[str, list[PipelineResponse]]:
    """Read a batch output file back into (manifest_digest, responses)."""
    path = Path(path)
    digest = ""
    responses: list[PipelineResponse] = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            obj = json.loads(line)
            if i == 0 and "manifest_digest" in obj:
                digest = obj["manifest_digest"]
                continue
            responses.append(PipelineResponse.from_obj(obj))
    return digest, responses
