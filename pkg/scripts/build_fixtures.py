#!/usr/bin/env python3
"""Regenerate every committed fixture, data copy, and golden file.

Everything here is deterministic: running the script twice produces
byte-identical output, and the test suite assumes the committed artifacts
match what this script builds.  Regenerate after changing corpus content,
templates, the lexicon, or fixture score tables:

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import hashlib
import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from pgxrag.config import assemble_pipeline  # noqa: E402
from pgxrag.corpus import Document, Source, chunk_corpus, load_corpus, token_count  # noqa: E402
from pgxrag.embedding import OfflineEmbedder  # noqa: E402
from pgxrag.evaluation import validate_dataset  # noqa: E402
from pgxrag.generation import CassetteBackend, GenerationRequest  # noqa: E402
from pgxrag.index import build_index, search_top_k  # noqa: E402
from pgxrag.lexicon import LexiconEntry, default_lexicon  # noqa: E402
from pgxrag.pipeline import Pipeline, PhaseConfig  # noqa: E402
from pgxrag.templates import TemplateId, load_templates, render_prompt  # noqa: E402

FIXTURES = ROOT / "fixtures"
GOLDEN = ROOT / "tests" / "golden"
PKG_DATA = ROOT / "src" / "pgxrag" / "data"

ANNOTATOR = "rater-01"
PHASE1_TIMESTAMP = "2025-04-01T12:00:00Z"
SUBSET_TIMESTAMP = "2025-05-10T12:00:00Z"

PROVIDER_QUESTION_IVACAFTOR = (
    "A 16-year-old Caucasian male with CF presents with compound heterozygosity for F508del "
    "and G551D CFTR mutations. How would you determine the appropriate dose of ivacaftor for "
    "this patient, considering their unique genetic profile?"
)


def stable_offset(*parts: str) -> int:
    digest = hashlib.blake2b("|".join(parts).encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "big")


# --------------------------------------------------------------------------
# corpus
# --------------------------------------------------------------------------

FILLERS = [
    "Clinical context, organ function, and concomitant therapy should still inform the final decision.",
    "Documentation of genotype results in the health record supports safe prescribing at future encounters.",
    "Consultation with a clinical pharmacist is advisable whenever laboratory findings and symptoms disagree.",
    "Re-evaluation is warranted whenever therapy changes or new interacting medications are introduced.",
    "Patient counseling should cover the reason for testing and what the result means for treatment.",
    "Evidence grading follows the usual framework of strong, moderate, and optional recommendations.",
    "Local formulary restrictions and insurance coverage may shape which alternative is most practical.",
    "Phenotype assignment should use current consensus diplotype to phenotype translation tables.",
    "Laboratories differ in which alleles they test, so a negative result does not exclude rare variants.",
    "The guideline is revised periodically and the most recent version should always be consulted.",
    "Care teams should record the indication for testing alongside the interpreted phenotype.",
    "These recommendations assume adherence and otherwise typical absorption and elimination.",
]

# One or two sentences of guideline-specific substance woven into each
# document so retrieval and the quiz have real content to work with.
GUIDELINE_NOTES: dict[str, list[str]] = {
    "cftr-ivacaftor": [
        "Ivacaftor is recommended for cystic fibrosis patients who carry at least one G551D CFTR variant.",
        "For patients aged 6 years and older the labeled ivacaftor dosage is 150 mg every 12 hours.",
        "Ivacaftor is not recommended for patients homozygous for F508del without a responsive variant.",
    ],
    "cyp2b6-efavirenz": [
        "CYP2B6 poor metabolizers reach higher efavirenz concentrations and face more nervous system effects.",
        "A reduced efavirenz dose should be considered for CYP2B6 poor metabolizers starting therapy.",
    ],
    "cyp2c19-clopidogrel": [
        "Clopidogrel requires CYP2C19-mediated activation to inhibit platelets effectively.",
        "CYP2C19 poor and intermediate metabolizers should receive prasugrel or ticagrelor for acute coronary syndromes.",
    ],
    "cyp2c19-ppi": [
        "CYP2C19 rapid and ultrarapid metabolizers clear proton pump inhibitors quickly and may fail eradication therapy.",
        "A dose increase of proton pump inhibitors is recommended for rapid metabolizers treating H. pylori.",
    ],
    "cyp2c19-voriconazole": [
        "CYP2C19 ultrarapid metabolizers often fail to reach therapeutic voriconazole exposure.",
        "An alternative antifungal such as isavuconazole is recommended for ultrarapid metabolizers.",
    ],
    "cyp2c9-nsaids": [
        "CYP2C9 poor metabolizers clear celecoxib, flurbiprofen, and other nonsteroidal anti-inflammatory drugs slowly.",
        "Initiate nsaids at the lowest recommended dose in CYP2C9 poor metabolizers and titrate cautiously.",
    ],
    "cyp2c9-hlab-phenytoin": [
        "HLA-B*15:02 carriers face a higher risk of severe cutaneous reactions with phenytoin.",
        "CYP2C9 poor metabolizers need a reduced phenytoin maintenance dose to avoid toxicity.",
    ],
    "cyp2c9-vkorc1-cyp4f2-warfarin": [
        "Warfarin dose requirements fall with decreased-function CYP2C9 alleles and the VKORC1 -1639G>A variant.",
        "Genotype-guided warfarin dosing should use a validated algorithm incorporating CYP2C9, VKORC1, and CYP4F2.",
        "CYP4F2 V433M carriers may require a modest warfarin dose increase.",
    ],
    "cyp2d6-atomoxetine": [
        "CYP2D6 poor metabolizers reach roughly tenfold higher atomoxetine exposure than normal metabolizers.",
        "Slower atomoxetine titration with plasma concentration guidance is recommended for poor metabolizers.",
    ],
    "cyp2d6-ondansetron-tropisetron": [
        "CYP2D6 ultrarapid metabolizers clear ondansetron and tropisetron quickly and get less antiemetic benefit.",
        "An alternative antiemetic such as granisetron is recommended for CYP2D6 ultrarapid metabolizers.",
    ],
    "cyp2d6-tamoxifen": [
        "Tamoxifen depends on CYP2D6 for conversion to its active metabolite endoxifen.",
        "CYP2D6 poor metabolizers should be considered for an aromatase inhibitor instead of tamoxifen.",
    ],
    "cyp2d6-cyp2c19-tca": [
        "Tricyclic antidepressants are cleared by CYP2D6 and CYP2C19 acting on complementary pathways.",
        "Avoid standard tricyclic doses in CYP2D6 poor metabolizers or select an alternative agent.",
    ],
    "sri-antidepressants": [
        "Serotonin reuptake inhibitor antidepressants show exposure differences across CYP2D6 and CYP2C19 phenotypes.",
        "SLC6A4 and HTR2A variation has been studied for response prediction with weaker evidence.",
    ],
    "opioids-cyp2d6-oprm1-comt": [
        "Codeine and tramadol require CYP2D6 activation, so poor metabolizers get little analgesia.",
        "CYP2D6 ultrarapid metabolizers risk life-threatening toxicity from standard codeine doses and opioids should be selected accordingly.",
        "Evidence for OPRM1 and COMT guided opioid dosing remains insufficient for routine action.",
    ],
    "cyp3a5-tacrolimus": [
        "CYP3A5 expressers need a higher tacrolimus starting dose to reach therapeutic trough concentrations.",
        "Begin tacrolimus at 1.5 to 2 times the standard starting dose in CYP3A5 expressers with level monitoring.",
    ],
    "dpyd-fluoropyrimidines": [
        "DPYD decreased-function variants impair clearance of fluoropyrimidines such as fluorouracil and capecitabine.",
        "Reduce the fluoropyrimidine starting dose by half for intermediate DPD activity and avoid use in complete deficiency.",
    ],
    "g6pd-deficiency": [
        "G6PD deficiency predisposes red cells to hemolysis under oxidative drug stress.",
        "Rasburicase and primaquine class medications are contraindicated in G6PD deficient patients.",
    ],
    "hla-carbamazepine-oxcarbazepine": [
        "HLA-B*15:02 carriers face a sharply elevated risk of Stevens-Johnson syndrome with carbamazepine and oxcarbazepine.",
        "Avoid carbamazepine in HLA-B*15:02 or HLA-A*31:01 carriers who are naive to the drug.",
    ],
    "hlab-abacavir": [
        "Abacavir hypersensitivity is strongly associated with HLA-B*57:01 carriage.",
        "Never prescribe abacavir to an HLA-B*57:01 positive patient; retesting is unnecessary once documented.",
    ],
    "hlab-allopurinol": [
        "HLA-B*58:01 carriage predicts severe cutaneous adverse reactions with allopurinol.",
        "Allopurinol is contraindicated in HLA-B*58:01 carriers; febuxostat is a common alternative.",
    ],
    "ifnl3-peginterferon": [
        "IFNL3 favorable genotypes predict higher sustained virologic response to peginterferon-based hepatitis C regimens.",
        "IFNL3 genotype informs the likelihood of benefit from peginterferon but does not change the dose.",
    ],
    "mt-rnr1-aminoglycosides": [
        "MT-RNR1 variants such as m.1555A>G predispose to aminoglycoside-induced hearing loss.",
        "Avoid aminoglycosides in MT-RNR1 variant carriers unless no safe alternative exists.",
    ],
    "ryr1-cacna1s-anesthetics": [
        "RYR1 and CACNA1S pathogenic variants confer susceptibility to malignant hyperthermia.",
        "Volatile anesthetic agents and succinylcholine are relatively contraindicated in susceptible patients.",
    ],
    "slco1b1-abcg2-cyp2c9-statins": [
        "SLCO1B1 decreased-function genotypes raise systemic statin exposure and myopathy risk, especially with simvastatin.",
        "Prescribe a lower statin dose or an alternative statin guided by SLCO1B1, ABCG2, and CYP2C9 results.",
    ],
    "tpmt-nudt15-thiopurines": [
        "TPMT and NUDT15 poor metabolizers accumulate cytotoxic thioguanine nucleotides on standard thiopurine doses.",
        "Reduce thiopurine starting doses drastically for poor metabolizers of TPMT or NUDT15.",
    ],
    "ugt1a1-atazanavir": [
        "UGT1A1 poor metabolizers have a high likelihood of bilirubin-associated jaundice on atazanavir.",
        "Discuss an alternative antiretroviral for UGT1A1 poor metabolizers when jaundice would prompt discontinuation.",
    ],
}

TWO_CHUNK_KEYS = {
    "cyp2c19-clopidogrel",
    "sri-antidepressants",
    "opioids-cyp2d6-oprm1-comt",
    "slco1b1-abcg2-cyp2c9-statins",
    "tpmt-nudt15-thiopurines",
    "hla-carbamazepine-oxcarbazepine",
}
THREE_CHUNK_KEY = "cyp2c9-vkorc1-cyp4f2-warfarin"


def drug_phrase(entry: LexiconEntry, i: int = 0) -> str:
    if entry.drugs:
        return entry.drugs[i % len(entry.drugs)]
    return "medications with known hemolysis risk"


def pad_paragraph(sentences: list[str], target_tokens: int, salt: str) -> str:
    parts = list(sentences)
    i = stable_offset(salt)
    while token_count(" ".join(parts)) < target_tokens:
        parts.append(FILLERS[i % len(FILLERS)])
        i += 1
    return " ".join(parts)


IVACAFTOR_PARAGRAPHS = [
    [
        "The CFTR guideline for ivacaftor addresses genotype-guided prescribing in cystic fibrosis.",
        "Determining the appropriate dose of ivacaftor for a patient with compound heterozygosity "
        "for F508del and G551D CFTR mutations begins with confirming a responsive variant.",
    ],
    [
        "Ivacaftor is recommended for cystic fibrosis patients who carry at least one G551D CFTR variant.",
        "For a patient with this genetic profile the presence of G551D, not the F508del allele, "
        "determines the recommendation.",
    ],
    [
        "For patients aged 6 years and older the appropriate dose of ivacaftor is 150 mg every 12 hours.",
        "Ivacaftor is not recommended for patients homozygous for F508del without a responsive "
        "CFTR variant, and dose adjustments apply with strong CYP3A inhibitors or hepatic impairment.",
    ],
]


def cpic_paragraphs(entry: LexiconEntry) -> list[list[str]]:
    if entry.guideline_key == "cftr-ivacaftor":
        return IVACAFTOR_PARAGRAPHS
    genes = ", ".join(entry.genes)
    drug = drug_phrase(entry)
    notes = GUIDELINE_NOTES[entry.guideline_key]
    intro = [
        f"The {entry.label} guideline addresses genotype-guided prescribing of {drug}.",
        f"Variation in {genes} changes drug exposure or response enough to alter treatment decisions.",
        notes[0],
    ]
    phenotype = [
        f"Phenotypes for {genes} are assigned from diplotypes using consensus activity assignments.",
        f"Patients are grouped into normal, intermediate, and poor function categories for {entry.genes[0]}.",
        "Phenotype frequencies differ across biogeographic groups, which affects pretest probability.",
    ]
    recommendation = [
        f"Therapeutic recommendations for {drug} follow directly from the assigned phenotype.",
        notes[1] if len(notes) > 1 else notes[0],
        "Recommendations are graded by strength of evidence and reviewed on a fixed cycle.",
    ]
    monitoring = [
        f"Monitoring after initiating {drug} should target early markers of excessive exposure or treatment failure.",
        f"Follow-up intervals and dose review should be informed by the documented {entry.genes[0]} result.",
    ]
    if entry.guideline_key == THREE_CHUNK_KEY:
        return [
            intro,
            phenotype,
            [
                "Dose selection should use a validated pharmacogenetic algorithm rather than fixed tables alone.",
                notes[1],
            ],
            [
                "Loading strategies must be tempered in carriers of two decreased-function CYP2C9 alleles.",
                "International normalized ratio response appears earlier than steady state in sensitive patients.",
            ],
            [
                "Amiodarone, azole antifungals, and sulfamethoxazole potentiate warfarin and compound genetic sensitivity.",
                "Every interacting medication change warrants a scheduled INR recheck.",
            ],
            monitoring,
            [
                "Pediatric dosing evidence is thinner but supports the same direction of genotype effect.",
                notes[2],
            ],
            [
                "Algorithm performance was validated across multiple cohorts with differing allele frequencies.",
                "Sites without genotype availability should not delay urgent anticoagulation to wait for results.",
            ],
        ]
    if entry.guideline_key in TWO_CHUNK_KEYS:
        return [intro, phenotype, recommendation, monitoring]
    return [intro, phenotype, recommendation]


def build_cpic_documents(lexicon) -> list[Document]:
    docs = []
    for entry in sorted(lexicon.entries, key=lambda e: e.guideline_key):
        if entry.guideline_key in TWO_CHUNK_KEYS or entry.guideline_key == THREE_CHUNK_KEY:
            target = 150
        elif entry.guideline_key == "cftr-ivacaftor":
            # kept lean so its wording dominates the bag-of-words vector;
            # this document anchors the recorded worked example
            target = 40
        else:
            target = 60
        paragraphs = [
            pad_paragraph(leads, target, f"{entry.guideline_key}:{i}")
            for i, leads in enumerate(cpic_paragraphs(entry))
        ]
        docs.append(
            Document(
                doc_id=f"cpic-{entry.guideline_key}",
                source=Source.CPIC,
                guideline_key=entry.guideline_key,
                title=f"Guideline: {entry.label}",
                body="\n\n".join(paragraphs),
                drugs=entry.drugs,
                genes=entry.genes,
            )
        )
    return docs


PHARMGKB_TOPICS = [
    ("clopidogrel", "cyp2c19-clopidogrel"),
    ("warfarin", "cyp2c9-vkorc1-cyp4f2-warfarin"),
    ("tamoxifen", "cyp2d6-tamoxifen"),
    ("tacrolimus", "cyp3a5-tacrolimus"),
    ("abacavir", "hlab-abacavir"),
    ("thiopurines", "tpmt-nudt15-thiopurines"),
    ("ivacaftor", "cftr-ivacaftor"),
    ("peginterferon", "ifnl3-peginterferon"),
]


def build_pharmgkb_documents(lexicon) -> list[Document]:
    docs = []
    for topic, key in PHARMGKB_TOPICS:
        entry = lexicon.by_key[key]
        genes = ", ".join(entry.genes)
        drug = drug_phrase(entry)
        annotations = [
            f"Curated clinical annotations link {genes} variants to {drug} response with assigned evidence levels.",
            f"Level 1A annotations for {drug} summarize replicated associations suitable for clinical use.",
            GUIDELINE_NOTES[key][0],
        ]
        variants = [
            f"Variant-level records describe effect sizes and study populations for each {entry.genes[0]} allele.",
            f"Annotation pages for {drug} cross-reference dosing guidance and primary literature.",
        ]
        body = "\n\n".join(
            pad_paragraph(leads, 80, f"pharmgkb-{topic}:{i}")
            for i, leads in enumerate([annotations, variants])
        )
        docs.append(
            Document(
                doc_id=f"pharmgkb-{topic}",
                source=Source.PHARMGKB,
                guideline_key=key,
                title=f"Annotation database: {drug} ({genes})",
                body=body,
                drugs=entry.drugs,
                genes=entry.genes,
            )
        )
    return docs


def write_corpus(lexicon) -> Path:
    docs = build_cpic_documents(lexicon) + build_pharmgkb_documents(lexicon)
    path = FIXTURES / "sample_corpus.jsonl"
    lines = [json.dumps(d.to_obj(), ensure_ascii=False, sort_keys=True) for d in docs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# query dataset
# --------------------------------------------------------------------------

def query_texts(entry: LexiconEntry) -> list[tuple[str, str]]:
    """Ten (audience, text) rows per guideline: 7 provider, 2 adult, 1 pediatric."""
    gene = entry.genes[0]

    def drug(i: int) -> str:
        return drug_phrase(entry, i)

    rows = [
        ("provider", f"How should {drug(0)} therapy be adjusted for a patient with a high-risk {gene} genotype?"),
        ("provider", f"What {gene} testing does the guideline recommend before starting {drug(1)}?"),
        ("provider", f"Which alternatives to {drug(0)} should be considered when the {gene} result is actionable?"),
        ("provider", f"What dose change of {drug(1)} is recommended for an intermediate-activity {gene} phenotype?"),
        ("provider", f"Which adverse outcomes linked to {gene} variation should be monitored during {drug(0)} treatment?"),
        ("provider", f"How strong is the evidence grading behind the {gene} recommendation for {drug(1)}?"),
        ("provider", f"When is repeat {gene} genotyping worthwhile for a patient already receiving {drug(0)}?"),
        ("adult", f"As an adult patient, what should I know about {gene} testing before taking {drug(0)}?"),
        ("adult", f"I am an adult already taking {drug(1)}; does my {gene} result change my dose?"),
        ("pediatric", f"For a pediatric patient with a {gene} variant, what does the guideline say about {drug(0)} dosing?"),
    ]
    if entry.guideline_key == "cftr-ivacaftor":
        rows[0] = ("provider", PROVIDER_QUESTION_IVACAFTOR)
    return rows


def write_dataset(lexicon) -> Path:
    lines = []
    for entry in sorted(lexicon.entries, key=lambda e: e.guideline_key):
        for i, (audience, text) in enumerate(query_texts(entry), start=1):
            lines.append(
                json.dumps(
                    {
                        "query_id": f"{entry.guideline_key}-q{i:02d}",
                        "guideline_key": entry.guideline_key,
                        "audience": audience,
                        "text": text,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
    path = FIXTURES / "dataset_260.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------------
# annotation fixtures
# --------------------------------------------------------------------------

def annotation_obj(query_id, group, accuracy, relevance, completeness, clarity,
                   tp, fn, fp, timestamp) -> dict:
    obj = {
        "query_id": query_id,
        "group": group,
        "accuracy": accuracy,
        "relevance": relevance,
        "completeness": completeness,
        "clarity": clarity,
        "annotator_id": ANNOTATOR,
        "timestamp": timestamp,
        "tp": tp,
        "fn": fn,
    }
    if fp is not None:
        obj["fp"] = fp
    return obj


def write_phase1_annotations(lexicon) -> Path:
    """Full first-phase pass over all 260 responses.

    Construction targets the published aggregate means exactly:
    accuracy (234*5 + 26*4)/260 = 4.90, completeness (208*5 + 52*4)/260 = 4.80,
    relevance and clarity all fives, recall (234*1.0 + 26*0.9)/260 = 0.99.
    False-positive counts (for precision/F1) exist only for the ten
    IFNL3-guideline queries.
    """
    lines = []
    for entry in sorted(lexicon.entries, key=lambda e: e.guideline_key):
        for i in range(1, 11):
            qid = f"{entry.guideline_key}-q{i:02d}"
            accuracy = 4 if i == 10 else 5
            completeness = 4 if i >= 9 else 5
            tp, fn = (9, 1) if i == 10 else (10, 0)
            fp = None
            if entry.guideline_key == "ifnl3-peginterferon":
                fp = 1 if i <= 5 else 0
            lines.append(
                json.dumps(
                    annotation_obj(qid, "phase1", accuracy, 5, completeness, 5,
                                   tp, fn, fp, PHASE1_TIMESTAMP),
                    ensure_ascii=False, sort_keys=True,
                )
            )
    path = FIXTURES / "phase1_260.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# Per-slot score tables for the 20-query comparison subset.  Slots follow the
# first twenty guideline keys in sorted order, query q01 of each.  Columns:
# accuracy (phase1, phase2, gpt), completeness (p1, p2, gpt), clarity gpt,
# recall counts (tp, fn) per group.
SUBSET_ROWS = [
    # acc_p1 acc_p2 acc_gpt  comp_p1 comp_p2 comp_gpt  clar_gpt  rec_p1    rec_p2    rec_gpt
    (3, 5, 1,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (3, 5, 2,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (4, 5, 2,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (4, 5, 3,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (4, 5, 3,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 4, 5,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 4, 5,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 4, 5,   5, 5, 5,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 5, 4,   5, 5, 4,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 5, 4,   5, 5, 4,   5,   (10, 0), (10, 0), (10, 0)),
    (5, 5, 4,   5, 5, 4,   5,   (10, 0), (10, 0), (7, 3)),
    (5, 5, 5,   5, 5, 4,   5,   (10, 0), (10, 0), (7, 3)),
    (5, 5, 5,   5, 5, 4,   5,   (10, 0), (10, 0), (7, 3)),
    (5, 5, 5,   5, 5, 4,   5,   (10, 0), (10, 0), (7, 3)),
    (5, 5, 5,   5, 5, 4,   5,   (9, 1),  (10, 0), (7, 3)),
    (4, 4, 5,   5, 5, 4,   5,   (9, 1),  (10, 0), (7, 3)),
    (4, 4, 3,   4, 5, 3,   5,   (9, 1),  (10, 0), (7, 3)),
    (4, 4, 4,   4, 5, 3,   5,   (9, 1),  (10, 0), (7, 3)),
    (4, 4, 4,   4, 5, 3,   4,   (9, 1),  (9, 1),  (7, 3)),
    (4, 4, 4,   4, 5, 3,   4,   (9, 1),  (9, 1),  (7, 3)),
]


def subset_query_ids(lexicon) -> list[str]:
    keys = sorted(e.guideline_key for e in lexicon.entries)[:20]
    return [f"{key}-q01" for key in keys]


def write_subset_annotations(lexicon) -> dict[str, Path]:
    qids = subset_query_ids(lexicon)
    groups = {"phase1": [], "phase2": [], "gpt4omini": []}
    for qid, row in zip(qids, SUBSET_ROWS):
        a1, a2, ag, c1, c2, cg, clg, r1, r2, rg = row
        groups["phase1"].append(
            annotation_obj(qid, "phase1", a1, 5, c1, 5, r1[0], r1[1], None, SUBSET_TIMESTAMP))
        groups["phase2"].append(
            annotation_obj(qid, "phase2", a2, 5, c2, 5, r2[0], r2[1], None, SUBSET_TIMESTAMP))
        groups["gpt4omini"].append(
            annotation_obj(qid, "gpt4omini", ag, 5, cg, clg, rg[0], rg[1], None, SUBSET_TIMESTAMP))
    paths = {}
    for group, objs in groups.items():
        path = FIXTURES / f"subset20_{group}.jsonl"
        path.write_text(
            "\n".join(json.dumps(o, ensure_ascii=False, sort_keys=True) for o in objs) + "\n",
            encoding="utf-8",
        )
        paths[group] = path
    return paths


def write_wilcoxon_fixtures(lexicon) -> None:
    qids = subset_query_ids(lexicon)
    p1p2 = {
        "description": "Paired per-query accuracy scores, first phase vs second phase (N=20).",
        "group_a": "phase1",
        "group_b": "phase2",
        "metric": "accuracy",
        "alternative": "greater",
        "query_ids": qids,
        "pairs": [[row[0], row[1]] for row in SUBSET_ROWS],
    }
    p2gpt = {
        "description": "Paired per-query accuracy scores, gpt4omini baseline vs second phase (N=20).",
        "group_a": "gpt4omini",
        "group_b": "phase2",
        "metric": "accuracy",
        "alternative": "greater",
        "query_ids": qids,
        "pairs": [[row[2], row[1]] for row in SUBSET_ROWS],
    }
    (FIXTURES / "wilcoxon_p1p2.json").write_text(
        json.dumps(p1p2, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (FIXTURES / "wilcoxon_p2gpt.json").write_text(
        json.dumps(p2gpt, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# quiz
# --------------------------------------------------------------------------

MULTI_CORRECT_KEY = "cyp2c9-vkorc1-cyp4f2-warfarin"

WRONG_ITEMS = {
    "phase3": {"q07", "q13"},
    "claude37": {"q05", "q09", "q18"},
    "gemini20": {"q03", "q07", "q11", "q19"},
    "gpt4omini": {"q02", "q05", "q08", "q12", "q16", "q20"},
}


def build_quiz(lexicon) -> list[dict]:
    keys = sorted(e.guideline_key for e in lexicon.entries)[:20]
    all_genes = sorted({g for e in lexicon.entries for g in e.genes})
    items = []
    for i, key in enumerate(keys, start=1):
        entry = lexicon.by_key[key]
        drug = drug_phrase(entry)
        if key == MULTI_CORRECT_KEY:
            stem = f"Which genes inform genotype-guided dosing of {drug}? Select any one correct gene."
            correct_genes = ["CYP2C9", "VKORC1"]
        else:
            stem = f"Which gene is central to the guideline recommendation for {drug}?"
            correct_genes = [entry.genes[0]]
        decoys = [g for g in all_genes if g not in entry.genes]
        offset = stable_offset("quiz", key)
        chosen_decoys = [decoys[(offset + j * 7) % len(decoys)] for j in range(8)]
        # dedupe decoys while preserving order
        seen: set[str] = set()
        decoy_list = [g for g in chosen_decoys if not (g in seen or seen.add(g))][: 5 - len(correct_genes)]
        choices = correct_genes + decoy_list
        order = sorted(range(5), key=lambda j: stable_offset("order", key, str(j)))
        shuffled = [choices[j] for j in order]
        correct = sorted(shuffled.index(g) for g in correct_genes)
        items.append(
            {
                "item_id": f"q{i:02d}",
                "stem": stem,
                "choices": shuffled,
                "correct": correct,
            }
        )
    return items


def write_quiz_files(lexicon) -> None:
    items = build_quiz(lexicon)
    (FIXTURES / "quiz20.json").write_text(
        json.dumps({"items": items}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    multi_item = next(i for i in items if len(i["correct"]) > 1)
    for group, wrong in WRONG_ITEMS.items():
        answers = {}
        for item in items:
            correct = item["correct"]
            if item["item_id"] in wrong:
                answers[item["item_id"]] = next(j for j in range(5) if j not in correct)
            elif item is multi_item and group == "claude37":
                # exercise the second keyed choice of the multi-correct item
                answers[item["item_id"]] = correct[1]
            else:
                answers[item["item_id"]] = correct[0]
        obj = {"group": group, "answers": answers}
        (FIXTURES / f"quiz_answers_{group}.json").write_text(
            json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# cassette for the recorded worked example
# --------------------------------------------------------------------------

RECORDED_SUMMARIES = {
    "cpic-cftr-ivacaftor": (
        "Source: cpic-cftr-ivacaftor. Ivacaftor is indicated for cystic fibrosis patients who "
        "carry at least one G551D CFTR variant, which this patient has. For patients aged 6 years "
        "and older the recommended dosage is 150 mg every 12 hours. The compound F508del allele "
        "does not change the recommendation when G551D is present."
    ),
    "pharmgkb-ivacaftor": (
        "Source: pharmgkb-ivacaftor. Clinical annotations tie CFTR gating variants, including "
        "G551D, to ivacaftor response with level 1A evidence. The annotations corroborate the "
        "labeled dosing rather than suggesting an adjustment."
    ),
}

RECORDED_DEFAULT_SUMMARY = (
    "Source: {source}. The document covers genotype-guided prescribing for a different "
    "gene-drug pair and does not bear on ivacaftor dosing. No dosing recommendation relevant "
    "to the query appears in this content."
)

RECORDED_ANSWER = (
    "Here is how to determine the appropriate ivacaftor dose for this 16-year-old patient with "
    "compound heterozygous F508del and G551D CFTR mutations:\n"
    "1. Confirm the genotype: laboratory confirmation of the G551D variant is the actionable "
    "finding; ivacaftor is recommended for patients with at least one G551D allele.\n"
    "2. Check age and weight: at 16 years old the patient is well above the 6-year threshold "
    "studied for full dosing, so no pediatric reduction applies.\n"
    "3. Apply the labeled dose: the recommended dosage for this genotype and age group is 150 mg "
    "taken orally every 12 hours.\n"
    "4. Review interactions and organ function: strong CYP3A inhibitors, hepatic impairment, or "
    "relevant comorbidity would prompt dose interval adjustment per labeling.\n"
    "5. Monitor response: follow sweat chloride and clinical status to confirm benefit.\n"
    "Summary: Genotype: G551D present (responsive variant). Age: 16 years, adult dosing applies. "
    "Recommended dosage: 150 mg every 12 hours. The F508del allele does not alter this "
    "recommendation. Reassess if new interacting medications are started."
)


class ScriptedBackend:
    """Stands in for a remote model while recording the worked-example cassette."""

    tag = "scripted"

    def generate(self, request: GenerationRequest) -> str:
        kind = request.meta.get("kind")
        if kind == "summarize":
            source = request.meta["source"]
            return RECORDED_SUMMARIES.get(source, RECORDED_DEFAULT_SUMMARY.format(source=source))
        if kind == "synthesize":
            return RECORDED_ANSWER
        raise ValueError(f"unexpected request kind {kind!r}")


def write_cassette(corpus_path: Path) -> None:
    cassette_path = FIXTURES / "cassette_ivacaftor.jsonl"
    if cassette_path.exists():
        cassette_path.unlink()
    lexicon = default_lexicon()
    config = PhaseConfig.for_phase(1)
    corpus = load_corpus(corpus_path, expected_sources=config.sources)
    chunks, _ = chunk_corpus(corpus)
    embedder = OfflineEmbedder()
    index = build_index(chunks, embedder)
    generator = CassetteBackend(cassette_path, mode="record", inner=ScriptedBackend())
    pipeline = Pipeline(
        corpus=corpus,
        chunks=chunks,
        index=index,
        config=config,
        embedder=embedder,
        generator=generator,
        templates=load_templates(),
        lexicon=lexicon,
    )
    response = pipeline.answer_query(PROVIDER_QUESTION_IVACAFTOR, "cftr-ivacaftor-q01")
    assert response.answer == RECORDED_ANSWER
    scenario = {
        "query_id": "cftr-ivacaftor-q01",
        "phase": 1,
        "query": PROVIDER_QUESTION_IVACAFTOR,
        "expected_substring": "Recommended dosage: 150 mg every 12 hours",
        "expected_answer": RECORDED_ANSWER,
        "expected_hit_ids": [h.chunk_id for h in response.hits],
    }
    (FIXTURES / "ivacaftor_scenario.json").write_text(
        json.dumps(scenario, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# golden rendered prompts
# --------------------------------------------------------------------------

def write_goldens(corpus_path: Path) -> None:
    templates = load_templates()
    corpus = load_corpus(corpus_path)
    doc = corpus.by_id["cpic-cftr-ivacaftor"]
    from pgxrag.corpus import chunk_document

    first_chunk = chunk_document(doc).chunks[0]
    layer1 = render_prompt(
        templates[TemplateId.LAYER1_USER],
        {
            "source": doc.doc_id,
            "query": PROVIDER_QUESTION_IVACAFTOR,
            "content": first_chunk.text,
        },
    )
    summaries = "\n".join(
        f"{i}. {text}"
        for i, text in enumerate(
            [
                RECORDED_SUMMARIES["cpic-cftr-ivacaftor"],
                RECORDED_DEFAULT_SUMMARY.format(source="cpic-cyp2b6-efavirenz"),
            ],
            start=1,
        )
    )
    layer2 = render_prompt(
        templates[TemplateId.LAYER2_USER],
        {"user_input": PROVIDER_QUESTION_IVACAFTOR, "all_summaries": summaries},
    )
    GOLDEN.mkdir(parents=True, exist_ok=True)
    (GOLDEN / "layer1_user_rendered.txt").write_bytes(layer1.encode("utf-8"))
    (GOLDEN / "layer2_user_rendered.txt").write_bytes(layer2.encode("utf-8"))


# --------------------------------------------------------------------------
# repo-root copies of packaged assets, frontend artifacts
# --------------------------------------------------------------------------

def write_asset_copies() -> None:
    (ROOT / "templates").mkdir(exist_ok=True)
    for tid in TemplateId:
        shutil.copyfile(
            PKG_DATA / "templates" / f"{tid.value}.txt",
            ROOT / "templates" / f"{tid.value}.txt",
        )
    (ROOT / "lexicon").mkdir(exist_ok=True)
    shutil.copyfile(PKG_DATA / "lexicon" / "cpic26.json", ROOT / "lexicon" / "cpic26.json")


def write_frontend_artifacts(lexicon) -> None:
    src_dir = ROOT / "frontend" / "src"
    fixture_dir = ROOT / "frontend" / "test" / "fixtures"
    src_dir.mkdir(parents=True, exist_ok=True)
    fixture_dir.mkdir(parents=True, exist_ok=True)

    rubric = json.loads((PKG_DATA / "rubric" / "likert_rubric.json").read_text("utf-8"))
    literal = json.dumps(rubric["dimensions"], indent=2, ensure_ascii=False)
    rubric_ts = (
        "// GENERATED FILE - do not edit by hand.\n"
        "// Source of truth: src/pgxrag/data/rubric/likert_rubric.json\n"
        "// Regenerate with: python scripts/build_fixtures.py\n"
        "\n"
        "export type RubricMetric = \"accuracy\" | \"relevance\" | \"completeness\" | \"clarity\";\n"
        "\n"
        "export interface RubricDimension {\n"
        "  readonly metric: RubricMetric;\n"
        "  readonly title: string;\n"
        "  readonly question: string;\n"
        "  readonly anchors: Readonly<Record<\"1\" | \"2\" | \"3\" | \"4\" | \"5\", string>>;\n"
        "}\n"
        "\n"
        f"export const RUBRIC_DIMENSIONS: readonly RubricDimension[] = {literal};\n"
    )
    (src_dir / "rubric.ts").write_text(rubric_ts, encoding="utf-8")

    shutil.copyfile(PKG_DATA / "rubric" / "likert_rubric.json", fixture_dir / "likert_rubric.json")

    subset = [
        json.loads(line)
        for line in (FIXTURES / "subset20_phase2.jsonl").read_text("utf-8").splitlines()
        if line.strip()
    ]
    (fixture_dir / "subset20_phase2.json").write_text(
        json.dumps(subset, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    from pgxrag.evaluation import AnnotationRecord, build_comparison

    records = [AnnotationRecord.from_obj(o, i + 1) for i, o in enumerate(subset)]
    report = build_comparison(["phase2"], {"phase2": records})
    (fixture_dir / "phase2_report.json").write_text(
        json.dumps(report.to_obj(), indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8")


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

def verify(corpus_path: Path, dataset_path: Path, lexicon) -> None:
    from pgxrag.evaluation import AnnotationRecord, aggregate_group, load_annotations, load_dataset
    from pgxrag.stats import wilcoxon_signed_rank

    corpus_cpic = load_corpus(corpus_path, expected_sources={Source.CPIC})
    chunks, oversized = chunk_corpus(corpus_cpic)
    assert len(corpus_cpic) == 26, f"CPIC docs: {len(corpus_cpic)}"
    assert corpus_cpic.excluded_count == len(PHARMGKB_TOPICS)
    assert len(chunks) == 34, f"CPIC chunk count: {len(chunks)}"
    assert not oversized, f"unexpected oversized chunks: {oversized}"
    corpus_all = load_corpus(corpus_path, expected_sources={Source.CPIC, Source.PHARMGKB})
    all_chunks, _ = chunk_corpus(corpus_all)
    assert len(all_chunks) == 42, f"phase-2 chunk count: {len(all_chunks)}"

    records = load_dataset(dataset_path)
    report = validate_dataset(records, lexicon)
    assert report.conformant, report.violations

    phase1 = load_annotations(FIXTURES / "phase1_260.jsonl")
    agg = aggregate_group(phase1, "phase1")
    assert round(agg.mean_accuracy, 2) == 4.90, agg.mean_accuracy
    assert round(agg.mean_relevance, 2) == 5.00
    assert round(agg.mean_completeness, 2) == 4.80
    assert round(agg.mean_clarity, 2) == 5.00
    assert round(agg.mean_recall, 2) == 0.99, agg.mean_recall
    assert agg.excluded["precision"] == 250

    expectations = {
        "phase1": (4.4, 4.8, 5.0, 0.97),
        "phase2": (4.6, 5.0, 5.0, 0.99),
        "gpt4omini": (3.9, 4.2, 4.9, 0.85),
    }
    for group, (acc, comp, clar, rec) in expectations.items():
        subset = load_annotations(FIXTURES / f"subset20_{group}.jsonl")
        agg = aggregate_group(subset, group)
        assert round(agg.mean_accuracy, 2) == acc, (group, agg.mean_accuracy)
        assert round(agg.mean_completeness, 2) == comp, (group, agg.mean_completeness)
        assert round(agg.mean_clarity, 2) == clar, (group, agg.mean_clarity)
        assert round(agg.mean_recall, 2) == rec, (group, agg.mean_recall)
        assert round(agg.mean_relevance, 2) == 5.00

    p1p2 = json.loads((FIXTURES / "wilcoxon_p1p2.json").read_text("utf-8"))
    r = wilcoxon_signed_rank([tuple(p) for p in p1p2["pairs"]], "greater")
    assert r.w_statistic == 10.5 and abs(r.p_value - 0.171875) < 1e-12, (r.w_statistic, r.p_value)
    assert r.p_value > 0.05
    p2gpt = json.loads((FIXTURES / "wilcoxon_p2gpt.json").read_text("utf-8"))
    r = wilcoxon_signed_rank([tuple(p) for p in p2gpt["pairs"]], "greater")
    assert r.w_statistic == 18.0 and abs(r.p_value - 0.025390625) < 1e-12, (r.w_statistic, r.p_value)
    assert r.p_value < 0.05

    from pgxrag.evaluation import load_quiz, score_quiz

    items = load_quiz(FIXTURES / "quiz20.json")
    expected_quiz = {"phase3": 18, "gpt4omini": 14, "claude37": 17, "gemini20": 16}
    for group, n_correct in expected_quiz.items():
        obj = json.loads((FIXTURES / f"quiz_answers_{group}.json").read_text("utf-8"))
        result = score_quiz(obj["answers"], items)
        assert result.n_correct == n_correct, (group, result.n_correct)

    # cassette replays through a fresh pipeline
    pipeline, _, _ = assemble_pipeline(
        corpus_path=corpus_path,
        phase=1,
        generation_mode="cassette",
        cassette_path=FIXTURES / "cassette_ivacaftor.jsonl",
    )
    scenario = json.loads((FIXTURES / "ivacaftor_scenario.json").read_text("utf-8"))
    response = pipeline.answer_query(scenario["query"], scenario["query_id"])
    assert response.answer == scenario["expected_answer"]
    assert scenario["expected_substring"] in response.answer


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    lexicon = default_lexicon()
    write_asset_copies()
    corpus_path = write_corpus(lexicon)
    dataset_path = write_dataset(lexicon)
    write_phase1_annotations(lexicon)
    write_subset_annotations(lexicon)
    write_wilcoxon_fixtures(lexicon)
    write_quiz_files(lexicon)
    write_cassette(corpus_path)
    write_goldens(corpus_path)
    write_frontend_artifacts(lexicon)
    verify(corpus_path, dataset_path, lexicon)
    print("fixtures rebuilt and verified")
    print(f"  corpus:  {corpus_path}")
    print(f"  dataset: {dataset_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
