"""HTTP service endpoints, exercised through an in-process test client."""

import json

import pytest
from fastapi.testclient import TestClient

from pgxrag import __version__
from pgxrag.batch import run_batch
from pgxrag.config import assemble_pipeline
from pgxrag.evaluation import load_annotations, load_dataset
from pgxrag.server import AppSettings, create_app

from conftest import FIXTURES


@pytest.fixture(scope="module")
def responses_dir(tmp_path_factory):
    """A review directory with one small response file per group."""
    directory = tmp_path_factory.mktemp("responses")
    records = load_dataset(FIXTURES / "dataset_260.jsonl")[:3]
    for group, phase in (("phase1", 1), ("phase2", 2)):
        pipeline, _, _ = assemble_pipeline(FIXTURES / "sample_corpus.jsonl", phase=phase)
        run_batch(records, pipeline, directory / f"{group}.jsonl", "0" * 64, "0" * 64)
    return directory


@pytest.fixture()
def client(tmp_path, responses_dir):
    settings = AppSettings(
        corpus_path=FIXTURES / "sample_corpus.jsonl",
        store_path=tmp_path / "store.jsonl",
        dataset_path=FIXTURES / "dataset_260.jsonl",
        quiz_path=FIXTURES / "quiz20.json",
        responses_dir=responses_dir,
    )
    with TestClient(create_app(settings)) as c:
        yield c


def annotation_body(**overrides):
    body = dict(query_id="cftr-ivacaftor-q01", group="phase1", accuracy=5,
                relevance=5, completeness=4, clarity=5, annotator_id="ann-a",
                tp=9, fp=1, fn=1)
    body.update(overrides)
    return body


class TestHealthAndQuery:
    def test_health(self, client):
        r = client.get("/api/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok", "version": __version__}

    def test_query_matches_library_pipeline(self, client):
        question = "How should CYP2C9 genotype adjust warfarin dosing?"
        r = client.post("/api/query", json={"text": question, "phase": 1})
        assert r.status_code == 200
        obj = r.json()
        assert len(obj["hits"]) == 4 and len(obj["summaries"]) == 4

        pipeline, _, _ = assemble_pipeline(FIXTURES / "sample_corpus.jsonl", phase=1)
        direct = pipeline.answer_query(question)
        assert obj["trace_hash"] == direct.trace_hash
        assert obj["answer"] == direct.answer

    def test_phase3_query_reports_supplementary(self, client):
        r = client.post("/api/query", json={"text": "ivacaftor and CFTR", "phase": 3})
        assert r.status_code == 200
        assert r.json()["supplementary_queries"] == [
            "ivacaftor ivacaftor and CFTR", "CFTR ivacaftor and CFTR",
        ]

    def test_empty_text_is_400(self, client):
        assert client.post("/api/query", json={"text": "", "phase": 1}).status_code == 400
        r = client.post("/api/query", json={"text": "   ", "phase": 1})
        assert r.status_code == 400
        assert r.json()["error"] == "EmptyText"

    def test_phase_out_of_range_is_400(self, client):
        assert client.post("/api/query", json={"text": "q", "phase": 4}).status_code == 400


class TestDatasetAndResponses:
    def test_dataset_served_in_full(self, client):
        r = client.get("/api/dataset")
        assert r.status_code == 200
        queries = r.json()["queries"]
        assert len(queries) == 260
        assert {"query_id", "guideline_key", "audience", "text"} <= set(queries[0])

    def test_responses_by_group(self, client):
        r = client.get("/api/responses", params={"group": "phase2"})
        assert r.status_code == 200
        obj = r.json()
        assert obj["group"] == "phase2"
        assert len(obj["responses"]) == 3
        assert all(len(resp["summaries"]) == 4 for resp in obj["responses"])

    def test_unknown_group_is_404(self, client):
        r = client.get("/api/responses", params={"group": "phase9"})
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownGroup"

    def test_missing_group_param_is_400(self, client):
        assert client.get("/api/responses").status_code == 400


class TestAnnotations:
    def test_submit_and_store(self, client, tmp_path):
        r = client.post("/api/annotations", json=annotation_body())
        assert r.status_code == 200
        stored = r.json()["stored"]
        assert stored["query_id"] == "cftr-ivacaftor-q01"
        assert stored["timestamp"]  # server stamps submissions
        lines = (tmp_path / "store.jsonl").read_text("utf-8").splitlines()
        assert len(lines) == 1

    def test_unknown_response_is_404(self, client):
        r = client.post("/api/annotations",
                        json=annotation_body(query_id="cftr-ivacaftor-q09"))
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownResponse"

    def test_dataset_backs_groups_without_response_files(self, client):
        r = client.post("/api/annotations",
                        json=annotation_body(group="phase9",
                                             query_id="g6pd-deficiency-q04"))
        assert r.status_code == 200

    def test_likert_out_of_range_is_400(self, client):
        assert client.post("/api/annotations",
                           json=annotation_body(accuracy=6)).status_code == 400
        assert client.post("/api/annotations",
                           json=annotation_body(accuracy=0)).status_code == 400

    def test_negative_count_is_400(self, client):
        assert client.post("/api/annotations",
                           json=annotation_body(tp=-1)).status_code == 400

    def test_duplicate_token_is_409(self, client):
        first = client.post("/api/annotations",
                            json=annotation_body(submission_token="tok-1"))
        assert first.status_code == 200
        again = client.post("/api/annotations",
                            json=annotation_body(submission_token="tok-1"))
        assert again.status_code == 409
        assert again.json()["error"] == "DuplicateSubmission"


@pytest.fixture()
def bare_client(tmp_path):
    """A client with a dataset but no per-group response files."""
    settings = AppSettings(
        corpus_path=FIXTURES / "sample_corpus.jsonl",
        store_path=tmp_path / "bare-store.jsonl",
        dataset_path=FIXTURES / "dataset_260.jsonl",
        quiz_path=FIXTURES / "quiz20.json",
    )
    with TestClient(create_app(settings)) as c:
        yield c


class TestMetrics:
    def test_metrics_unknown_group_is_404(self, client):
        r = client.get("/api/metrics", params={"groups": "phase2"})
        assert r.status_code == 404  # store is empty in this client

    def test_metrics_equal_offline_report(self, bare_client):
        """Round-trip the 20-record review set and compare with the CLI report."""
        client = bare_client
        for record in load_annotations(FIXTURES / "subset20_phase2.jsonl"):
            r = client.post("/api/annotations", json={
                "query_id": record.query_id, "group": record.group,
                "accuracy": record.accuracy, "relevance": record.relevance,
                "completeness": record.completeness, "clarity": record.clarity,
                "annotator_id": record.annotator_id,
                "tp": record.tp, "fp": record.fp, "fn": record.fn,
            })
            assert r.status_code == 200
        got = client.get("/api/metrics", params={"groups": "phase2"})
        assert got.status_code == 200
        expected = json.loads(
            (FIXTURES.parent / "frontend" / "test" / "fixtures" / "phase2_report.json")
            .read_text("utf-8")
        )
        assert got.json() == expected


class TestQuiz:
    def test_items_hide_the_key(self, client):
        r = client.get("/api/quiz")
        assert r.status_code == 200
        items = r.json()["items"]
        assert len(items) == 20
        assert all(set(item) == {"item_id", "stem", "choices"} for item in items)

    def test_scoring_round_trip(self, client):
        answers = json.loads(
            (FIXTURES / "quiz_answers_phase3.json").read_text("utf-8")
        )["answers"]
        r = client.post("/api/quiz/answers", json={"answers": answers})
        assert r.status_code == 200
        obj = r.json()
        assert obj["n_correct"] == 18
        assert obj["accuracy"] == pytest.approx(0.9)

    def test_unknown_item_is_404(self, client):
        r = client.post("/api/quiz/answers", json={"answers": {"q99": 1}})
        assert r.status_code == 404
        assert r.json()["error"] == "UnknownItem"
