"""Command-line interface.

Subcommands map one-to-one onto the library: ingest (corpus -> index file),
ask (one query), eval run / metrics / wilcoxon (batch answering and the
evaluation harness), quiz score, and serve (the HTTP service).  Failures
exit nonzero with a single ``ClassName: message`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import (
    EMBEDDING_MODES,
    GENERATION_MODES,
    RemoteSettings,
    assemble_pipeline,
    make_embedder,
)
from .corpus import Source, chunk_corpus, load_corpus
from .errors import PgxragError
from .evaluation import (
    AnnotationRecord,
    WilcoxonSpec,
    build_comparison,
    load_annotations,
    load_dataset,
    load_quiz,
    score_quiz,
    validate_dataset,
)
from .batch import run_batch
from .index import build_index, persist_index
from .lexicon import default_lexicon, load_lexicon
from .stats import wilcoxon_signed_rank
from .util import file_sha256


def _parse_sources(raw: str) -> set[Source]:
    out: set[Source] = set()
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.add(Source(part))
        except ValueError:
            allowed = ", ".join(s.value for s in Source)
            raise ValueError(f"unknown source {part!r}; expected one of: {allowed}") from None
    if not out:
        raise ValueError("at least one source is required")
    return out


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embedding", choices=EMBEDDING_MODES, default="offline",
                        help="embedding backend mode (default: offline)")
    parser.add_argument("--generation", choices=GENERATION_MODES, default="offline",
                        help="generation backend mode (default: offline)")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config with remote endpoint settings")
    parser.add_argument("--cassette", type=Path, default=None,
                        help="cassette file for generation record/replay")
    parser.add_argument("--lexicon", type=Path, default=None,
                        help="lexicon JSON (default: packaged 26-guideline lexicon)")
    parser.add_argument("--templates", type=Path, default=None,
                        help="prompt template directory (default: packaged templates)")


def _settings(args: argparse.Namespace) -> RemoteSettings | None:
    return RemoteSettings.from_file(args.config) if args.config else None


def cmd_ingest(args: argparse.Namespace) -> int:
    sources = _parse_sources(args.sources)
    corpus = load_corpus(args.corpus, expected_sources=sources)
    chunks, oversized = chunk_corpus(corpus)
    embedder = make_embedder(args.embedding, _settings(args), dim=args.dim)
    index = build_index(chunks, embedder)
    persist_index(index, args.out)
    print(f"documents: {len(corpus)} kept, {corpus.excluded_count} excluded by source filter")
    print(f"chunks: {len(chunks)}" + (f" ({len(oversized)} oversized)" if oversized else ""))
    print(f"index: {len(index)} vectors, dim {index.dim}, backend {index.backend_tag}")
    print(f"wrote {args.out}")
    return 0


def cmd_ask(args: argparse.Namespace) -> int:
    pipeline, _, _ = assemble_pipeline(
        corpus_path=args.corpus,
        phase=args.phase,
        embedding_mode=args.embedding,
        generation_mode=args.generation,
        settings=_settings(args),
        cassette_path=args.cassette,
        index_path=args.index,
        lexicon_path=args.lexicon,
        template_dir=args.templates,
    )
    response = pipeline.answer_query(args.question)
    if args.json:
        print(json.dumps(response.to_obj(), indent=2, ensure_ascii=False, sort_keys=True))
        return 0
    print(response.answer)
    print()
    print("--- trace ---")
    print(f"phase: {response.phase}   backend: {response.backend_tag}")
    if response.supplementary_queries:
        print("supplementary queries:")
        for sub in response.supplementary_queries:
            print(f"  - {sub}")
    print("retrieved chunks:")
    for i, hit in enumerate(response.hits, start=1):
        print(f"  {i}. {hit.chunk_id}  score={hit.score:.4f}")
    print("summaries:")
    for i, (chunk_id, text) in enumerate(response.summaries, start=1):
        print(f"  {i}. [{chunk_id}] {text}")
    print(f"trace_hash: {response.trace_hash}")
    return 0


def cmd_eval_run(args: argparse.Namespace) -> int:
    records = load_dataset(args.dataset)
    pipeline, _, _ = assemble_pipeline(
        corpus_path=args.corpus,
        phase=args.phase,
        embedding_mode=args.embedding,
        generation_mode=args.generation,
        settings=_settings(args),
        cassette_path=args.cassette,
        index_path=args.index,
        lexicon_path=args.lexicon,
        template_dir=args.templates,
    )
    report = validate_dataset(records, pipeline.lexicon)
    if not report.conformant:
        print(f"note: dataset is not benchmark-shaped ({len(report.violations)} deviations)", file=sys.stderr)
    result = run_batch(
        records,
        pipeline,
        args.out,
        corpus_digest=file_sha256(Path(args.corpus)),
        dataset_digest=file_sha256(Path(args.dataset)),
    )
    print(f"answered {result.count} queries (phase {args.phase})")
    print(f"manifest digest: {result.manifest.identity_digest()}")
    print(f"wrote {args.out}")
    return 0


def _load_annotation_groups(paths: list[Path]) -> dict[str, list[AnnotationRecord]]:
    by_group: dict[str, list[AnnotationRecord]] = {}
    for path in paths:
        for record in load_annotations(path):
            by_group.setdefault(record.group, []).append(record)
    return by_group


def _parse_wilcoxon_spec(raw: str) -> WilcoxonSpec:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) == 3:
        parts.append("greater")
    if len(parts) != 4:
        raise ValueError(
            f"--wilcoxon expects GROUP_A,GROUP_B,METRIC[,ALTERNATIVE], got {raw!r}"
        )
    return WilcoxonSpec(group_a=parts[0], group_b=parts[1], metric=parts[2], alternative=parts[3])


def cmd_eval_metrics(args: argparse.Namespace) -> int:
    by_group = _load_annotation_groups(args.annotations)
    groups = [g.strip() for g in args.groups.split(",") if g.strip()]
    specs = [_parse_wilcoxon_spec(raw) for raw in args.wilcoxon]
    quiz_results = None
    if args.quiz_answers:
        if not args.quiz_items:
            raise ValueError("--quiz-answers requires --quiz-items")
        items = load_quiz(args.quiz_items)
        quiz_results = {}
        for raw in args.quiz_answers:
            group, _, path = raw.partition("=")
            if not group or not path:
                raise ValueError(f"--quiz-answers expects GROUP=PATH, got {raw!r}")
            answers_obj = json.loads(Path(path).read_text("utf-8"))
            quiz_results[group] = score_quiz(answers_obj.get("answers", {}), items)
    report = build_comparison(groups, by_group, tests=specs, quiz=quiz_results, alpha=args.alpha)
    print(report.render_text())
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_obj(), indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        print(f"\nwrote {args.report}")
    return 0


def cmd_eval_wilcoxon(args: argparse.Namespace) -> int:
    if args.pairs:
        obj = json.loads(Path(args.pairs).read_text("utf-8"))
        pairs = [(float(a), float(b)) for a, b in obj["pairs"]]
        alternative = args.alternative or obj.get("alternative", "greater")
    else:
        if not (args.annotations and args.group_a and args.group_b):
            raise ValueError("need either --pairs, or --annotations with --a and --b")
        by_group = _load_annotation_groups(args.annotations)
        from .evaluation import paired_metric_values

        pairs = paired_metric_values(by_group, args.group_a, args.group_b, args.metric)
        alternative = args.alternative or "greater"
    result = wilcoxon_signed_rank(pairs, alternative=alternative)
    print(
        f"W={result.w_statistic:g}  n={result.n_input}  n_eff={result.n_effective}  "
        f"p={result.p_value:.6g}  method={result.method}  alternative={result.alternative}"
    )
    print(f"significant@0.05={'yes' if result.p_value < 0.05 else 'no'}")
    return 0


def cmd_quiz_score(args: argparse.Namespace) -> int:
    items = load_quiz(args.items)
    obj = json.loads(Path(args.answers).read_text("utf-8"))
    result = score_quiz(obj.get("answers", {}), items)
    print(f"accuracy: {result.accuracy:.0%} ({result.n_correct}/{result.n_items})")
    for item in items:
        mark = "correct" if result.per_item[item.item_id] else "incorrect"
        print(f"  {item.item_id}: {mark}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import AppSettings, create_app

    app = create_app(
        AppSettings(
            corpus_path=args.corpus,
            store_path=args.store,
            dataset_path=args.dataset,
            quiz_path=args.quiz,
            responses_dir=args.responses,
            lexicon_path=args.lexicon,
            template_dir=args.templates,
            embedding_mode=args.embedding,
            generation_mode=args.generation,
            config_path=args.config,
            cassette_path=args.cassette,
            ui_dir=args.ui,
        )
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgxrag",
        description="Retrieval-augmented pharmacogenomic question answering and evaluation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="chunk and embed a corpus into an index file")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--sources", default="CPIC,PharmGKB",
                   help="comma-separated sources to keep (default: CPIC,PharmGKB)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--embedding", choices=EMBEDDING_MODES, default="offline")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--dim", type=int, default=None, help="offline embedder dimension")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("question")
    p.add_argument("--phase", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--index", type=Path, default=None, help="persisted index (default: build in memory)")
    p.add_argument("--json", action="store_true", help="print the full response as JSON")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_ask)

    p_eval = sub.add_parser("eval", help="batch answering and evaluation")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)

    p = eval_sub.add_parser("run", help="answer a whole query dataset")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--phase", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--index", type=Path, default=None)
    p.add_argument("--out", type=Path, required=True)
    _add_backend_flags(p)
    p.set_defaults(func=cmd_eval_run)

    p = eval_sub.add_parser("metrics", help="aggregate annotations into a comparison report")
    p.add_argument("--annotations", type=Path, action="append", required=True,
                   help="annotation JSONL file (repeatable)")
    p.add_argument("--groups", required=True, help="comma-separated group tags to report")
    p.add_argument("--report", type=Path, default=None, help="also write the report as JSON")
    p.add_argument("--wilcoxon", action="append", default=[],
                   help="paired test spec GROUP_A,GROUP_B,METRIC[,ALTERNATIVE] (repeatable)")
    p.add_argument("--quiz-items", type=Path, default=None)
    p.add_argument("--quiz-answers", action="append", default=[],
                   help="GROUP=ANSWERS_JSON to include quiz accuracy (repeatable)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_eval_metrics)

    p = eval_sub.add_parser("wilcoxon", help="one-tailed paired signed-rank test")
    p.add_argument("--pairs", type=Path, default=None,
                   help="JSON file with a 'pairs' list of [a, b] scores")
    p.add_argument("--annotations", type=Path, action="append", default=None)
    p.add_argument("--a", dest="group_a", default=None)
    p.add_argument("--b", dest="group_b", default=None)
    p.add_argument("--metric", default="accuracy")
    p.add_argument("--alternative", choices=("greater", "less"), default=None)
    p.set_defaults(func=cmd_eval_wilcoxon)

    p_quiz = sub.add_parser("quiz", help="knowledge quiz scoring")
    quiz_sub = p_quiz.add_subparsers(dest="quiz_command", required=True)
    p = quiz_sub.add_parser("score", help="grade an answer file against the quiz key")
    p.add_argument("--items", type=Path, required=True)
    p.add_argument("--answers", type=Path, required=True)
    p.set_defaults(func=cmd_quiz_score)

    p = sub.add_parser("serve", help="run the HTTP service (and review console, if built)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--store", type=Path, required=True, help="append-only annotation store file")
    p.add_argument("--dataset", type=Path, default=None)
    p.add_argument("--quiz", type=Path, default=None)
    p.add_argument("--responses", type=Path, default=None,
                   help="directory of per-group response JSONL files to review")
    p.add_argument("--ui", type=Path, default=None, help="static review console directory")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PgxragError, ValueError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
