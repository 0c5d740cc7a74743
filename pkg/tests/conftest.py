from __future__ import annotations

from pathlib import Path

import pytest

from pgxrag.corpus import Source, chunk_corpus, load_corpus
from pgxrag.embedding import OfflineEmbedder

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_path() -> Path:
    return FIXTURES / "sample_corpus.jsonl"


@pytest.fixture(scope="session")
def dataset_path() -> Path:
    return FIXTURES / "dataset_260.jsonl"


@pytest.fixture(scope="session")
def cpic_corpus(corpus_path):
    return load_corpus(corpus_path, expected_sources={Source.CPIC})


@pytest.fixture(scope="session")
def full_corpus(corpus_path):
    return load_corpus(corpus_path, expected_sources={Source.CPIC, Source.PHARMGKB})


@pytest.fixture(scope="session")
def cpic_chunks(cpic_corpus):
    chunks, oversized = chunk_corpus(cpic_corpus)
    assert not oversized
    return chunks


@pytest.fixture(scope="session")
def offline_embedder() -> OfflineEmbedder:
    return OfflineEmbedder()
