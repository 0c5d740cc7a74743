"""Release gate: one test per numbered guarantee, with timing limits.

``pytest tests/test_acceptance.py -v`` prints exactly one pass/fail line
per criterion.  Every check here re-derives its expectation independently
(counting oracles, brute-force enumeration, shipped golden bytes) rather
than trusting the code under test.
"""

import json
import random
import time
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from pgxrag.cli import main
from pgxrag.corpus import chunk_document, load_corpus
from pgxrag.evaluation import (
    QueryRecord,
    aggregate_group,
    compute_f1,
    compute_precision,
    compute_recall,
    load_annotations,
    load_dataset,
    load_quiz,
    score_quiz,
    validate_dataset,
)
from pgxrag.index import VectorIndex, search_top_k
from pgxrag.lexicon import default_lexicon
from pgxrag.stats import wilcoxon_signed_rank
from pgxrag.templates import TemplateId, load_templates, render_prompt

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "tests" / "golden"


def finish(started, limit, label):
    elapsed = time.perf_counter() - started
    assert elapsed < limit, f"{label} took {elapsed:.2f}s, limit {limit:g}s"
    print(f"PASS {label} ({elapsed:.2f}s < {limit:g}s)")


class TestAcceptance:
    def test_criterion_01_metric_oracle_equivalence(self):
        """recall/precision/f1 vs an exact counting oracle on 10,000 triples."""
        started = time.perf_counter()
        rng = random.Random(11001)
        for _ in range(10_000):
            tp = rng.randint(0, 50)
            fp = rng.randint(0, 50)
            fn = rng.randint(0, 50)
            if tp + fn > 0:
                # single exact division: equality must be bit-for-bit
                assert compute_recall(tp, fn) == float(Fraction(tp, tp + fn))
            if tp + fp > 0:
                assert compute_precision(tp, fp) == float(Fraction(tp, tp + fp))
            if tp + fn > 0 and tp + fp > 0 and tp > 0:
                p = Fraction(tp, tp + fp)
                r = Fraction(tp, tp + fn)
                f1 = compute_f1(float(p), float(r))
                # harmonic mean from counts: F1 = 2tp / (2tp + fp + fn)
                assert abs(f1 - float(Fraction(2 * tp, 2 * tp + fp + fn))) < 1e-12
                assert float(min(p, r)) - 1e-12 <= f1 <= float(max(p, r)) + 1e-12
        finish(started, 5, "criterion 1: metric oracle equivalence")

    def test_criterion_02_aggregate_reproduction(self):
        """Shipped annotation fixtures reproduce the published group means."""
        started = time.perf_counter()
        full = aggregate_group(load_annotations(FIXTURES / "phase1_260.jsonl"), "phase1")
        assert full.n == 260
        assert round(full.mean_accuracy, 2) == 4.90
        assert round(full.mean_relevance, 2) == 5.00
        assert round(full.mean_completeness, 2) == 4.80
        assert round(full.mean_clarity, 2) == 5.00
        assert round(full.mean_recall, 2) == 0.99

        expected = {
            "phase1": (4.40, 4.80, 0.97),
            "phase2": (4.60, 5.00, 0.99),
            "gpt4omini": (3.90, 4.20, 0.85),
        }
        for group, (accuracy, completeness, recall) in expected.items():
            agg = aggregate_group(
                load_annotations(FIXTURES / f"subset20_{group}.jsonl"), group
            )
            assert agg.n == 20
            assert round(agg.mean_accuracy, 2) == accuracy
            assert round(agg.mean_completeness, 2) == completeness
            assert round(agg.mean_recall, 2) == recall
        finish(started, 1, "criterion 2: aggregate reproduction")

    def test_criterion_03_wilcoxon_correctness(self):
        """Exact p-values vs 2^n brute force; identities; shipped fixtures."""
        started = time.perf_counter()

        def brute_force_greater(diffs):
            nonzero = [d for d in diffs if d != 0]
            ranked = sorted(range(len(nonzero)), key=lambda i: abs(nonzero[i]))
            ranks = [0.0] * len(nonzero)
            i = 0
            while i < len(ranked):
                j = i
                while (j + 1 < len(ranked)
                       and abs(nonzero[ranked[j + 1]]) == abs(nonzero[ranked[i]])):
                    j += 1
                for k in range(i, j + 1):
                    ranks[ranked[k]] = (i + j + 2) / 2
                i = j + 1
            observed = sum(r for d, r in zip(nonzero, ranks) if d < 0)
            favorable = 0
            for signs in product((1, -1), repeat=len(nonzero)):
                w_minus = sum(r for s, r in zip(signs, ranks) if s < 0)
                if w_minus <= observed:
                    favorable += 1
            return favorable / 2 ** len(nonzero)

        rng = random.Random(33003)
        tested = 0
        while tested < 200:
            n = rng.randint(3, 12)
            diffs = [rng.randint(-4, 4) for _ in range(n)]
            if sum(1 for d in diffs if d != 0) not in range(1, 11):
                continue
            pairs = [(0.0, float(d)) for d in diffs]
            result = wilcoxon_signed_rank(pairs, alternative="greater")
            assert result.method == "exact_enumeration"
            assert result.p_value == brute_force_greater(diffs)
            n_eff = result.n_effective
            assert result.w_plus + result.w_minus == n_eff * (n_eff + 1) / 2
            tested += 1

        simple = wilcoxon_signed_rank([(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)],
                                      alternative="greater")
        assert simple.p_value == 0.125

        for name, w, significant in (("wilcoxon_p1p2.json", 10.5, False),
                                     ("wilcoxon_p2gpt.json", 18.0, True)):
            obj = json.loads((FIXTURES / name).read_text("utf-8"))
            result = wilcoxon_signed_rank(
                [(float(a), float(b)) for a, b in obj["pairs"]],
                alternative=obj["alternative"],
            )
            assert result.w_statistic == w
            assert (result.p_value < 0.05) is significant
        finish(started, 10, "criterion 3: signed-rank test correctness")

    def test_criterion_04_retrieval_exactness(self):
        """search_top_k vs full brute-force ranking on 1,000 random indexes."""
        started = time.perf_counter()
        rng = np.random.default_rng(44004)
        n, dim, k = 200, 64, 4
        ids = [f"c{i:03d}" for i in range(n)]
        for trial in range(1000):
            if trial % 5 == 0:
                # heavy-tie case: the whole matrix tiles a few distinct rows,
                # so the cut at k always lands inside a duplicate group
                base = rng.standard_normal((8, dim))
                rows = base[rng.integers(0, 8, size=n)]
            else:
                rows = rng.standard_normal((n, dim))
                copies = rng.integers(0, n, size=12)
                rows[copies[6:]] = rows[copies[:6]]  # duplicated vectors
            rows /= np.linalg.norm(rows, axis=1, keepdims=True)
            query = rng.standard_normal(dim)
            query /= np.linalg.norm(query)

            index = VectorIndex(chunk_ids=tuple(ids),
                                vectors=rows.astype(np.float32),
                                backend_tag="offline-bow-64")
            got = search_top_k(index, query, k)

            matrix = index.vectors.astype(np.float64)
            scored = sorted(
                ((float(np.dot(matrix[i], query)), ids[i]) for i in range(n)),
                key=lambda pair: (-pair[0], pair[1]),
            )
            assert [h.chunk_id for h in got] == [cid for _, cid in scored[:k]]
            for hit, (score, _) in zip(got, scored):
                assert abs(hit.score - score) < 1e-12
        finish(started, 10, "criterion 4: retrieval exactness")

    def test_criterion_05_end_to_end_determinism(self, tmp_path, capsys):
        """260-query offline eval run: fast, byte-stable, 4 summaries each."""
        started = time.perf_counter()
        outputs = []
        for name in ("first.jsonl", "second.jsonl"):
            out = tmp_path / name
            code = main([
                "eval", "run",
                "--dataset", str(FIXTURES / "dataset_260.jsonl"),
                "--corpus", str(FIXTURES / "sample_corpus.jsonl"),
                "--phase", "1", "--out", str(out),
            ])
            assert code == 0
            outputs.append(out.read_bytes())
        capsys.readouterr()
        assert outputs[0] == outputs[1]

        lines = outputs[0].decode("utf-8").splitlines()
        assert len(lines) == 261  # manifest digest line + one response per query
        for line in lines[1:]:
            assert len(json.loads(line)["summaries"]) == 4
        finish(started, 60, "criterion 5: end-to-end offline determinism")

    def test_criterion_06_template_fidelity(self):
        """Rendered layer-1/layer-2 prompts equal the golden bytes."""
        started = time.perf_counter()
        templates = load_templates()
        scenario = json.loads((FIXTURES / "ivacaftor_scenario.json").read_text("utf-8"))
        corpus = load_corpus(FIXTURES / "sample_corpus.jsonl")
        chunk = chunk_document(corpus.by_id["cpic-cftr-ivacaftor"]).chunks[0]

        layer1 = render_prompt(
            templates[TemplateId.LAYER1_USER],
            {"source": "cpic-cftr-ivacaftor", "query": scenario["query"],
             "content": chunk.text},
        )
        assert layer1.encode("utf-8") == (GOLDEN / "layer1_user_rendered.txt").read_bytes()

        golden2 = (GOLDEN / "layer2_user_rendered.txt").read_text("utf-8")
        summaries = golden2.split("Summaries:\n", 1)[1].split("\n\nPlease synthesize", 1)[0]
        layer2 = render_prompt(
            templates[TemplateId.LAYER2_USER],
            {"user_input": scenario["query"], "all_summaries": summaries},
        )
        assert layer2.encode("utf-8") == golden2.encode("utf-8")
        finish(started, 10, "criterion 6: template fidelity")

    def test_criterion_07_quiz_scoring(self):
        """The accuracy ladder, plus multi-correct items taking any keyed choice."""
        started = time.perf_counter()
        items = load_quiz(FIXTURES / "quiz20.json")
        assert len(items) == 20

        ladder = {"phase3": (18, 0.90), "claude37": (17, 0.85),
                  "gemini20": (16, 0.80), "gpt4omini": (14, 0.70)}
        for group, (n_correct, accuracy) in ladder.items():
            answers = json.loads(
                (FIXTURES / f"quiz_answers_{group}.json").read_text("utf-8")
            )["answers"]
            result = score_quiz(answers, items)
            assert result.n_correct == n_correct
            assert result.accuracy == pytest.approx(accuracy)

        multi = [item for item in items if len(item.correct) > 1]
        assert multi, "the quiz must contain at least one multi-correct item"
        for item in multi:
            for choice in item.correct:
                answers = {i.item_id: min(i.correct) for i in items}
                answers[item.item_id] = choice
                assert score_quiz(answers, items).n_correct == 20
        finish(started, 10, "criterion 7: quiz scoring")

    def test_criterion_08_dataset_conformance(self):
        """validate_dataset accepts exactly 26 x 10 and names violators."""
        started = time.perf_counter()
        lexicon = default_lexicon()
        records = load_dataset(FIXTURES / "dataset_260.jsonl")
        report = validate_dataset(records, lexicon)
        assert report.conformant
        assert report.total == 260
        assert len(report.per_guideline) == 26
        assert all(count == 10 for count in report.per_guideline.values())

        short = [r for r in records if r.query_id != "cyp2c19-clopidogrel-q07"]
        broken = validate_dataset(short, lexicon)
        assert not broken.conformant
        assert any("cyp2c19-clopidogrel" in v for v in broken.violations)

        rogue = records + [QueryRecord(query_id="zzz-q01", guideline_key="not-real",
                                       audience="provider", text="??")]
        flagged = validate_dataset(rogue, lexicon)
        assert not flagged.conformant
        assert "not-real" in flagged.unknown_keys
        finish(started, 10, "criterion 8: dataset conformance")
