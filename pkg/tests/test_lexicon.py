from __future__ import annotations

import random

import pytest

from pgxrag.errors import MalformedRecord, MissingFile
from pgxrag.lexicon import (
    EXPECTED_ENTRY_COUNT,
    default_lexicon,
    extract_targets,
    load_lexicon,
    parse_lexicon,
)


@pytest.fixture(scope="module")
def lexicon():
    return default_lexicon()


class TestLexiconLoading:
    def test_entry_count(self, lexicon):
        assert len(lexicon) == EXPECTED_ENTRY_COUNT == 26

    def test_keys_unique_and_sorted_lookup(self, lexicon):
        keys = [e.guideline_key for e in lexicon.entries]
        assert len(set(keys)) == 26
        assert lexicon.by_key["hlab-abacavir"].genes == ("HLA-B",)

    def test_known_pairs(self, lexicon):
        warfarin = lexicon.by_key["cyp2c9-vkorc1-cyp4f2-warfarin"]
        assert warfarin.genes == ("CYP2C9", "VKORC1", "CYP4F2")  # guideline order, not sorted
        assert warfarin.drugs == ("warfarin",)
        g6pd = lexicon.by_key["g6pd-deficiency"]
        assert g6pd.drugs == ()

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_lexicon(tmp_path / "absent.json")

    def test_wrong_entry_count_rejected(self, lexicon):
        obj = {"entries": [
            {"guideline_key": "k", "label": "L", "genes": ["G1"], "drugs": ["d"]},
        ]}
        with pytest.raises(MalformedRecord):
            parse_lexicon(obj)
        # explicit opt-out accepts any count
        lex = parse_lexicon(obj, expect_entries=None)
        assert len(lex) == 1

    def test_malformed_entry(self):
        with pytest.raises(MalformedRecord):
            parse_lexicon({"entries": [{"guideline_key": "   "}]}, expect_entries=None)
        with pytest.raises(MalformedRecord):
            parse_lexicon({"entries": [{"guideline_key": "k", "genes": "CYP2C9"}]},
                          expect_entries=None)


class TestExtractTargets:
    def test_drug_pulls_in_guideline_genes(self, lexicon):
        targets = extract_targets("warfarin initiation for this genotype", lexicon)
        assert targets.drugs == ("warfarin",)
        assert targets.genes == ("CYP2C9", "CYP4F2", "VKORC1")

    def test_gene_alone_does_not_pull_drugs(self, lexicon):
        targets = extract_targets("What does a CYP2C19 result mean?", lexicon)
        assert targets.genes == ("CYP2C19",)
        assert targets.drugs == ()

    def test_case_insensitive(self, lexicon):
        a = extract_targets("CLOPIDOGREL and cyp2c19", lexicon)
        b = extract_targets("clopidogrel and CYP2C19", lexicon)
        assert a == b
        assert a.drugs == ("clopidogrel",)

    def test_word_boundaries(self, lexicon):
        """Substrings inside larger words must not match."""
        targets = extract_targets("the warfarinization protocol", lexicon)
        assert targets.is_empty()

    def test_no_entities(self, lexicon):
        targets = extract_targets("completely unrelated question about weather", lexicon)
        assert targets.is_empty()
        assert targets.all_terms() == ()

    def test_multiword_drug_phrase(self, lexicon):
        multi = [d for e in lexicon.entries for d in e.drugs if " " in d]
        if not multi:
            pytest.skip("lexicon carries no multi-word drug names")
        phrase = multi[0]
        targets = extract_targets(f"question about {phrase} here", lexicon)
        assert phrase in targets.drugs

    def test_dedup_and_sorted(self, lexicon):
        targets = extract_targets("warfarin warfarin WARFARIN and CYP2C9 plus cyp2c9", lexicon)
        assert targets.drugs == ("warfarin",)
        assert targets.genes == ("CYP2C9", "CYP4F2", "VKORC1")
        assert list(targets.genes) == sorted(targets.genes)

    def test_terms_survive_random_padding(self, lexicon):
        """Inserting neutral words around a term never hides it."""
        rng = random.Random(9182)
        pad = ["team", "review", "notes", "case", "update"]
        for trial in range(50):
            entry = rng.choice([e for e in lexicon.entries if e.drugs])
            drug = rng.choice(entry.drugs)
            words = [rng.choice(pad) for _ in range(rng.randint(0, 6))]
            where = rng.randint(0, len(words))
            words.insert(where, drug)
            targets = extract_targets(" ".join(words), lexicon)
            assert drug in targets.drugs, f"trial {trial}: {words}"
            for gene in entry.genes:
                assert gene in targets.genes
