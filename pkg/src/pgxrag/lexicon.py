"""The guideline drug/gene lexicon and query target extraction.

The shipped lexicon covers the 26 clinical guidelines the knowledge base is
built around: one entry per guideline with its gene symbols and drug names.
``extract_targets`` matches a free-text query against those terms to decide
which entities deserve supplementary retrieval passes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

from .errors import MalformedRecord, MissingFile

EXPECTED_ENTRY_COUNT = 26


@dataclass(frozen=True)
class LexiconEntry:
    guideline_key: str
    genes: tuple[str, ...]
    drugs: tuple[str, ...]
    label: str = ""


@dataclass(frozen=True)
class GuidelineLexicon:
    entries: tuple[LexiconEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @cached_property
    def by_key(self) -> dict[str, LexiconEntry]:
        return {e.guideline_key: e for e in self.entries}

    @cached_property
    def gene_symbols(self) -> frozenset[str]:
        return frozenset(g for e in self.entries for g in e.genes)

    @cached_property
    def drug_names(self) -> frozenset[str]:
        return frozenset(d for e in self.entries for d in e.drugs)

    @cached_property
    def _drug_entries(self) -> dict[str, tuple[LexiconEntry, ...]]:
        out: dict[str, list[LexiconEntry]] = {}
        for e in self.entries:
            for d in e.drugs:
                out.setdefault(d.lower(), []).append(e)
        return {d: tuple(es) for d, es in out.items()}

    @cached_property
    def _term_patterns(self) -> list[tuple[str, str, re.Pattern[str]]]:
        # (kind, canonical term, compiled whole-word pattern); multi-word drug
        # names match as phrases with flexible internal whitespace.
        patterns: list[tuple[str, str, re.Pattern[str]]] = []
        seen: set[tuple[str, str]] = set()
        for entry in self.entries:
            for kind, terms in (("drug", entry.drugs), ("gene", entry.genes)):
                for term in terms:
                    key = (kind, term.lower())
                    if key in seen:
                        continue
                    seen.add(key)
                    body = r"\s+".join(re.escape(w) for w in term.lower().split())
                    pat = re.compile(r"(?<!\w)" + body + r"(?!\w)")
                    patterns.append((kind, term, pat))
        return patterns


def _entry_from_obj(obj: object, line_number: int) -> LexiconEntry:
    if not isinstance(obj, dict):
        raise MalformedRecord(line_number, "lexicon entry must be a JSON object")
    key = obj.get("guideline_key")
    if not isinstance(key, str) or not key.strip():
        raise MalformedRecord(line_number, "guideline_key must be a nonempty string")
    genes = obj.get("genes", [])
    drugs = obj.get("drugs", [])
    for field_name, val in (("genes", genes), ("drugs", drugs)):
        if not isinstance(val, list) or any(not isinstance(v, str) or not v.strip() for v in val):
            raise MalformedRecord(line_number, f"{field_name} must be a list of nonempty strings")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise MalformedRecord(line_number, "label must be a string")
    return LexiconEntry(
        guideline_key=key,
        genes=tuple(genes),
        drugs=tuple(drugs),
        label=label,
    )


def parse_lexicon(obj: object, expect_entries: int | None = EXPECTED_ENTRY_COUNT) -> GuidelineLexicon:
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise MalformedRecord(0, "lexicon must be an object with an 'entries' list")
    entries = [_entry_from_obj(e, i + 1) for i, e in enumerate(obj["entries"])]
    keys = [e.guideline_key for e in entries]
    if len(set(keys)) != len(keys):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise MalformedRecord(0, f"duplicate guideline keys: {', '.join(dupes)}")
    if expect_entries is not None and len(entries) != expect_entries:
        raise MalformedRecord(0, f"expected {expect_entries} lexicon entries, found {len(entries)}")
    return GuidelineLexicon(entries=tuple(entries))


def load_lexicon(path: Path | str | None = None, expect_entries: int | None = EXPECTED_ENTRY_COUNT) -> GuidelineLexicon:
    """Load a lexicon JSON file, defaulting to the packaged 26-guideline lexicon."""
    if path is None:
        text = resources.files("pgxrag").joinpath("data/lexicon/cpic26.json").read_text("utf-8")
    else:
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"lexicon file not found: {path}")
        text = path.read_text("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(0, f"invalid JSON ({exc.msg})") from exc
    return parse_lexicon(obj, expect_entries)


_default_lexicon: GuidelineLexicon | None = None


def default_lexicon() -> GuidelineLexicon:
    global _default_lexicon
    if _default_lexicon is None:
        _default_lexicon = load_lexicon()
    return _default_lexicon


@dataclass(frozen=True)
class TargetEntities:
    """Entities a query mentions, resolved against the lexicon.

    Drug matches pull in the matched guideline's genes (a question about
    warfarin dosing implicates CYP2C9/VKORC1/CYP4F2 even if no gene is
    named); gene matches do not pull in drugs. Both tuples are deduplicated
    and sorted.
    """

    drugs: tuple[str, ...] = ()
    genes: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not self.drugs and not self.genes

    def all_terms(self) -> tuple[str, ...]:
        return self.drugs + self.genes


def extract_targets(query_text: str, lexicon: GuidelineLexicon) -> TargetEntities:
    """Case-insensitive whole-word matching of the query against lexicon terms."""
    text = query_text.lower()
    drugs: set[str] = set()
    genes: set[str] = set()
    for kind, term, pattern in lexicon._term_patterns:
        if not pattern.search(text):
            continue
        if kind == "gene":
            genes.add(term)
        else:
            drugs.add(term)
            for entry in lexicon._drug_entries[term.lower()]:
                genes.update(entry.genes)
    return TargetEntities(drugs=tuple(sorted(drugs)), genes=tuple(sorted(genes)))
