"""HTTP JSON service for querying the pipeline and running review sessions.

The browser review console is a pure client of this API; everything it can
do goes through these endpoints.  Validation failures return 400, unknown
ids 404, and replayed submission tokens 409, so the client can distinguish
"fix your input" from "someone already did this".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .config import RemoteSettings, assemble_pipeline
from .errors import (
    DuplicateSubmission,
    EmptyGroup,
    EmptyText,
    PgxragError,
    UnknownGroup,
    UnknownItem,
)
from .evaluation import (
    AnnotationRecord,
    QueryRecord,
    build_comparison,
    load_dataset,
    load_quiz,
    score_quiz,
)
from .pipeline import PipelineResponse
from .store import AnnotationStore
from .util import utc_now_iso


@dataclass(frozen=True)
class AppSettings:
    corpus_path: Path
    store_path: Path
    dataset_path: Optional[Path] = None
    quiz_path: Optional[Path] = None
    responses_dir: Optional[Path] = None
    lexicon_path: Optional[Path] = None
    template_dir: Optional[Path] = None
    embedding_mode: str = "offline"
    generation_mode: str = "offline"
    config_path: Optional[Path] = None
    cassette_path: Optional[Path] = None
    ui_dir: Optional[Path] = None


class QueryIn(BaseModel):
    text: str = Field(min_length=1)
    phase: int = Field(default=1, ge=1, le=3)


class AnnotationIn(BaseModel):
    query_id: str = Field(min_length=1)
    group: str = Field(min_length=1)
    accuracy: int = Field(ge=1, le=5)
    relevance: int = Field(ge=1, le=5)
    completeness: int = Field(ge=1, le=5)
    clarity: int = Field(ge=1, le=5)
    annotator_id: str = Field(min_length=1)
    tp: Optional[int] = Field(default=None, ge=0)
    fp: Optional[int] = Field(default=None, ge=0)
    fn: Optional[int] = Field(default=None, ge=0)
    submission_token: Optional[str] = None


class QuizAnswersIn(BaseModel):
    answers: dict[str, int]


def _load_group_responses(responses_dir: Path) -> dict[str, list[PipelineResponse]]:
    """Each ``<group>.jsonl`` in the directory holds one group's responses."""
    out: dict[str, list[PipelineResponse]] = {}
    for path in sorted(responses_dir.glob("*.jsonl")):
        responses: list[PipelineResponse] = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if "manifest_digest" in obj and "query_id" not in obj:
                    continue
                responses.append(PipelineResponse.from_obj(obj))
        out[path.stem] = responses
    return out


def create_app(settings: AppSettings) -> FastAPI:
    app = FastAPI(title="pgxrag", version=__version__)

    remote = RemoteSettings.from_file(settings.config_path) if settings.config_path else None
    store = AnnotationStore(settings.store_path)
    dataset: list[QueryRecord] = (
        load_dataset(settings.dataset_path) if settings.dataset_path else []
    )
    dataset_ids = {r.query_id for r in dataset}
    quiz_items = load_quiz(settings.quiz_path) if settings.quiz_path else []
    group_responses = (
        _load_group_responses(settings.responses_dir) if settings.responses_dir else {}
    )
    pipelines: dict[int, object] = {}

    def pipeline_for(phase: int):
        if phase not in pipelines:
            pipelines[phase], _, _ = assemble_pipeline(
                corpus_path=settings.corpus_path,
                phase=phase,
                embedding_mode=settings.embedding_mode,
                generation_mode=settings.generation_mode,
                settings=remote,
                cassette_path=settings.cassette_path,
                lexicon_path=settings.lexicon_path,
                template_dir=settings.template_dir,
            )
        return pipelines[phase]

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # Bad field values are the client's mistake, not an unprocessable
        # entity of ours: report them as 400.
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(PgxragError)
    async def domain_error_handler(request: Request, exc: PgxragError):
        status = 400
        if isinstance(exc, DuplicateSubmission):
            status = 409
        elif isinstance(exc, (UnknownGroup, UnknownItem, EmptyGroup)):
            status = 404
        return JSONResponse(
            status_code=status, content={"error": type(exc).__name__, "detail": str(exc)}
        )

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/query")
    async def run_query(body: QueryIn):
        try:
            pipeline = pipeline_for(body.phase)
            response = pipeline.answer_query(body.text)
        except EmptyText as exc:
            return JSONResponse(status_code=400, content={"error": "EmptyText", "detail": str(exc)})
        return response.to_obj()

    @app.get("/api/dataset")
    async def get_dataset():
        return {"queries": [r.to_obj() for r in dataset]}

    @app.get("/api/responses")
    async def get_responses(group: str = Query(min_length=1)):
        if group not in group_responses:
            raise UnknownGroup(group)
        return {"group": group, "responses": [r.to_obj() for r in group_responses[group]]}

    @app.post("/api/annotations")
    async def post_annotation(body: AnnotationIn):
        ref_known = False
        if body.group in group_responses:
            ref_known = any(r.query_id == body.query_id for r in group_responses[body.group])
        elif dataset_ids:
            ref_known = body.query_id in dataset_ids
        if not ref_known:
            return JSONResponse(
                status_code=404,
                content={
                    "error": "UnknownResponse",
                    "detail": f"no response for query {body.query_id!r} in group {body.group!r}",
                },
            )
        record = AnnotationRecord(
            query_id=body.query_id,
            group=body.group,
            accuracy=body.accuracy,
            relevance=body.relevance,
            completeness=body.completeness,
            clarity=body.clarity,
            annotator_id=body.annotator_id,
            tp=body.tp,
            fp=body.fp,
            fn=body.fn,
            timestamp=utc_now_iso(),
            submission_token=body.submission_token,
        )
        store.append(record)  # fsyncs before we acknowledge
        return {"stored": record.to_obj()}

    @app.get("/api/metrics")
    async def get_metrics(groups: str = Query(min_length=1)):
        names = [g.strip() for g in groups.split(",") if g.strip()]
        annotations = {g: store.records_for_group(g) for g in names}
        for name in names:
            if not annotations[name]:
                raise UnknownGroup(name)
        report = build_comparison(names, annotations)
        return report.to_obj()

    @app.get("/api/quiz")
    async def get_quiz():
        # The key stays server-side; the console only sees stems and choices.
        return {
            "items": [
                {"item_id": i.item_id, "stem": i.stem, "choices": list(i.choices)}
                for i in quiz_items
            ]
        }

    @app.post("/api/quiz/answers")
    async def post_quiz_answers(body: QuizAnswersIn):
        result = score_quiz(body.answers, quiz_items)
        return result.to_obj()

    if settings.ui_dir and Path(settings.ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=settings.ui_dir, html=True), name="ui")

    return app
