from __future__ import annotations

import json

import pytest

from pgxrag.errors import BackendUnavailable, CassetteMiss, MissingFile
from pgxrag.generation import (
    CassetteBackend,
    GenerationRequest,
    OfflineGenerationBackend,
    STOPWORDS,
    content_words,
    extractive_summary,
    offline_synthesis,
    split_sentences,
)
from pgxrag.lexicon import default_lexicon


class TestGenerationRequest:
    def test_hash_stable(self):
        a = GenerationRequest(system="s", user="u", temperature=0.0)
        b = GenerationRequest(system="s", user="u", temperature=0.0)
        assert a.request_hash() == b.request_hash()

    def test_hash_ignores_meta(self):
        """Cassettes recorded through one backend must replay through another,
        so backend bookkeeping cannot leak into the key."""
        a = GenerationRequest(system="s", user="u", meta={"kind": "summarize", "x": 1})
        b = GenerationRequest(system="s", user="u", meta={"kind": "synthesize"})
        assert a.request_hash() == b.request_hash()
        assert a == b  # meta is excluded from equality too

    def test_hash_sensitive_to_prompts_and_temperature(self):
        base = GenerationRequest(system="s", user="u", temperature=0.0)
        assert base.request_hash() != GenerationRequest(system="S", user="u").request_hash()
        assert base.request_hash() != GenerationRequest(system="s", user="U").request_hash()
        assert base.request_hash() != GenerationRequest(system="s", user="u", temperature=0.5).request_hash()

    def test_hash_is_sha256_hex(self):
        h = GenerationRequest(system="", user="q").request_hash()
        assert len(h) == 64
        int(h, 16)


class TestSentenceTools:
    def test_split_sentences(self):
        assert split_sentences("One. Two! Three? Four") == ["One.", "Two!", "Three?", "Four"]

    def test_split_handles_whitespace_runs(self):
        assert split_sentences("  A.   B.  ") == ["A.", "B."]

    def test_content_words_drop_stopwords(self):
        words = content_words("The dose of warfarin should be reduced")
        assert "warfarin" in words and "dose" in words and "reduced" in words
        assert "the" not in words and "of" not in words

    def test_stopword_list_is_small(self):
        # domain terms must keep weight; only function words belong here
        assert 20 <= len(STOPWORDS) <= 40
        assert "dosing" not in STOPWORDS
        assert "genotype" not in STOPWORDS


class TestExtractiveSummary:
    def test_single_sentence_chunk(self):
        out = extractive_summary("any question", "Only sentence here.", "doc-1")
        assert out == "Source: doc-1. Only sentence here."

    def test_hand_scored_selection(self):
        """Sentences A (2 shared words), B (0), C (1): A then C, in order."""
        content = (
            "Warfarin dose depends on genotype. "
            "Unrelated filler text entirely. "
            "The dose is lowered."
        )
        out = extractive_summary("warfarin dose adjustment", content, "doc-w")
        assert out == "Source: doc-w. Warfarin dose depends on genotype. The dose is lowered."

    def test_zero_overlap_falls_back_to_leading(self):
        content = "First sentence here. Second sentence there. Third one. Fourth one."
        out = extractive_summary("zzz qqq xxx", content, "s")
        assert out == "Source: s. First sentence here. Second sentence there. Third one."

    def test_cap_at_three_sentences(self):
        content = " ".join(f"Warfarin point number {i}." for i in range(1, 7))
        out = extractive_summary("warfarin", content, "s")
        body = out.removeprefix("Source: s. ")
        assert body.count(".") == 3

    def test_ties_break_by_position(self):
        content = "Alpha warfarin fact. Beta warfarin fact. Gamma warfarin fact. Delta warfarin fact."
        out = extractive_summary("warfarin", content, "s")
        assert out == "Source: s. Alpha warfarin fact. Beta warfarin fact. Gamma warfarin fact."


class TestOfflineSynthesis:
    def test_numbered_lines_and_target_recap(self):
        lexicon = default_lexicon()
        summaries = [
            ("cpic-a", "Source: cpic-a. Warfarin needs dose cuts. More detail."),
            ("cpic-b", "Source: cpic-b. Second doc sentence."),
        ]
        out = offline_synthesis("warfarin initiation for this genotype", summaries, lexicon)
        lines = out.split("\n")
        assert lines[0] == "1. cpic-a: Warfarin needs dose cuts."
        assert lines[1] == "2. cpic-b: Second doc sentence."
        assert lines[2] == "Summary: drugs: warfarin; genes: CYP2C9, CYP4F2, VKORC1."

    def test_no_entities_recap(self):
        lexicon = default_lexicon()
        out = offline_synthesis("nothing relevant", [("x", "Source: x. Text.")], lexicon)
        assert out.endswith("Summary: no guideline drugs or genes matched the query.")


class TestOfflineBackend:
    def test_dispatch_by_kind(self):
        backend = OfflineGenerationBackend(default_lexicon())
        req = GenerationRequest(
            system="s",
            user="u",
            meta={"kind": "summarize", "query": "warfarin", "content": "Warfarin text.", "source": "d"},
        )
        assert backend.generate(req) == "Source: d. Warfarin text."

    def test_unknown_kind_rejected(self):
        backend = OfflineGenerationBackend(default_lexicon())
        with pytest.raises(BackendUnavailable):
            backend.generate(GenerationRequest(system="s", user="u", meta={}))

    def test_tag(self):
        assert OfflineGenerationBackend(default_lexicon()).tag == "offline"


class FixedBackend:
    tag = "fixed"

    def __init__(self, mapping=None, default="canned response"):
        self.mapping = mapping or {}
        self.default = default
        self.calls = 0

    def generate(self, request: GenerationRequest) -> str:
        self.calls += 1
        return self.mapping.get(request.user, self.default)


class TestCassetteBackend:
    def test_record_then_replay(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        inner = FixedBackend({"u1": "first answer", "u2": "second answer"})
        recorder = CassetteBackend(path, mode="record", inner=inner)
        r1 = GenerationRequest(system="s", user="u1")
        r2 = GenerationRequest(system="s", user="u2")
        assert recorder.generate(r1) == "first answer"
        assert recorder.generate(r2) == "second answer"
        assert inner.calls == 2

        replayer = CassetteBackend(path, mode="replay")
        assert replayer.generate(r2) == "second answer"
        assert replayer.generate(r1) == "first answer"

    def test_record_reuses_existing_entries(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        inner = FixedBackend()
        recorder = CassetteBackend(path, mode="record", inner=inner)
        req = GenerationRequest(system="s", user="u")
        recorder.generate(req)
        recorder.generate(req)
        assert inner.calls == 1
        assert len(path.read_text().strip().splitlines()) == 1

    def test_replay_miss(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        CassetteBackend(path, mode="record", inner=FixedBackend()).generate(
            GenerationRequest(system="s", user="known")
        )
        replayer = CassetteBackend(path, mode="replay")
        missing = GenerationRequest(system="s", user="never recorded")
        with pytest.raises(CassetteMiss) as exc:
            replayer.generate(missing)
        assert exc.value.request_hash == missing.request_hash()

    def test_cassette_miss_is_backend_unavailable(self):
        assert issubclass(CassetteMiss, BackendUnavailable)

    def test_replay_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            CassetteBackend(tmp_path / "absent.jsonl", mode="replay")

    def test_tags(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        rec = CassetteBackend(path, mode="record", inner=FixedBackend())
        assert rec.tag == "cassette:fixed"
        rec.generate(GenerationRequest(system="s", user="u"))
        assert CassetteBackend(path, mode="replay").tag == "cassette"

    def test_file_format_is_hash_and_text(self, tmp_path):
        path = tmp_path / "tape.jsonl"
        req = GenerationRequest(system="sys", user="usr")
        CassetteBackend(path, mode="record", inner=FixedBackend()).generate(req)
        obj = json.loads(path.read_text().strip())
        assert obj == {"request_hash": req.request_hash(), "response_text": "canned response"}

    def test_invalid_mode(self, tmp_path):
        with pytest.raises(ValueError):
            CassetteBackend(tmp_path / "t.jsonl", mode="append")

    def test_record_requires_inner(self, tmp_path):
        with pytest.raises(ValueError):
            CassetteBackend(tmp_path / "t.jsonl", mode="record")

    def test_shipped_cassette_replays_worked_example(self, fixtures_dir):
        scenario = json.loads((fixtures_dir / "ivacaftor_scenario.json").read_text("utf-8"))
        replayer = CassetteBackend(fixtures_dir / "cassette_ivacaftor.jsonl", mode="replay")
        # five exchanges were recorded: four layer-1 summaries and one synthesis
        assert len(replayer._responses) == 5
        assert any(
            scenario["expected_substring"] in text for text in replayer._responses.values()
        )
