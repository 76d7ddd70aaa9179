"""Bundled synthetic replay fixture.

A 28-question, two-language fire-safety-flavored study plus a response
cassette for two synthetic adapters. Per-question validity labels are
assigned so that every published aggregate (the eight paired
contingency tables and the derived rates) is reproduced exactly; the
question and response texts themselves are synthetic placeholders.

Regenerate the bundled files with `python -m sqare.fixture`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Tuple

from .harness import Cassette, CassetteRecord, fingerprint
from .studydef import CONDITION_ORDER, ConditionKind, Study, build_prompt, study_from_dict

MODEL_A = "gemini-flash-sim"
MODEL_B = "gpt-mini-sim"
N_QUESTIONS = 28
FIXTURE_RECORDED_AT = "2025-06-02T12:00:00Z"

# (a, b, c, d) per (language, condition): a both valid, b model-A-only,
# c model-B-only, d both invalid.
TABLES: Dict[Tuple[str, ConditionKind], Tuple[int, int, int, int]] = {
    ("de", ConditionKind.COMPLETE): (28, 0, 0, 0),
    ("de", ConditionKind.INCOMPLETE): (10, 4, 8, 6),
    ("de", ConditionKind.CONFLICTING): (2, 0, 1, 25),
    ("de", ConditionKind.NO_CONTEXT): (24, 2, 2, 0),
    ("en", ConditionKind.COMPLETE): (28, 0, 0, 0),
    ("en", ConditionKind.INCOMPLETE): (27, 1, 0, 0),
    ("en", ConditionKind.CONFLICTING): (2, 1, 1, 24),
    ("en", ConditionKind.NO_CONTEXT): (14, 0, 9, 5),
}


def labels(language: str, condition: ConditionKind, question_index: int) -> Tuple[bool, bool]:
    """(model A valid, model B valid) for the question at 0-based index."""
    a, b, c, d = TABLES[(language, condition)]
    if question_index < a:
        return True, True
    if question_index < a + b:
        return True, False
    if question_index < a + b + c:
        return False, True
    return False, False


def _qid(i: int) -> str:
    return f"q{i:02d}"


def build_study_dict() -> dict:
    materials = [
        {
            "id": "m1",
            "title": {"en": "Evacuation handbook", "de": "Evakuierungshandbuch"},
            "body": {
                "en": "General guidance on evacuation routes and assembly points.",
                "de": "Allgemeine Hinweise zu Fluchtwegen und Sammelplätzen.",
            },
            "source": "urn:fixture:material:m1",
        },
        {
            "id": "m2",
            "title": {"en": "Extinguisher reference", "de": "Feuerlöscher-Referenz"},
            "body": {
                "en": "Reference sheet on extinguisher classes and their use.",
                "de": "Referenzblatt zu Löschmittelklassen und ihrer Anwendung.",
            },
            "source": "urn:fixture:material:m2",
        },
    ]
    questions = []
    for i in range(1, N_QUESTIONS + 1):
        qid = _qid(i)
        fact_en, fact_de = f"FACT-{qid}", f"FAKT-{qid}"
        conflict_en, conflict_de = f"CONFLICT-{qid}", f"KONFLIKT-{qid}"
        questions.append(
            {
                "id": qid,
                "text": {
                    "en": f"What is the required procedure in fire scenario {i}?",
                    "de": f"Welches Verfahren ist in Brandszenario {i} vorgeschrieben?",
                },
                "factual_patterns": {
                    "en": {"any_of": [fact_en]},
                    "de": {"any_of": [fact_de]},
                },
                "abstention_patterns": {
                    "en": {"any_of": ["cannot determine", "not enough information"]},
                    "de": {"any_of": ["kann ich nicht bestimmen", "nicht genügend informationen"]},
                },
                "contexts": {
                    "complete": {
                        "en": {
                            "body": f"Procedure note: the verified procedure for scenario {i} is {fact_en}.",
                            "claim_patterns": {"any_of": [fact_en]},
                        },
                        "de": {
                            "body": f"Verfahrenshinweis: das geprüfte Verfahren für Szenario {i} ist {fact_de}.",
                            "claim_patterns": {"any_of": [fact_de]},
                        },
                    },
                    "incomplete": {
                        "en": {
                            "body": f"Procedure note: scenario {i} falls under the general code; "
                            "the specific procedure is pending review.",
                        },
                        "de": {
                            "body": f"Verfahrenshinweis: Szenario {i} fällt unter die allgemeine Vorschrift; "
                            "das konkrete Verfahren ist in Prüfung.",
                        },
                    },
                    "conflicting": {
                        "en": {
                            "body": f"Procedure note: the verified procedure for scenario {i} is {conflict_en}.",
                            "claim_patterns": {"any_of": [conflict_en]},
                        },
                        "de": {
                            "body": f"Verfahrenshinweis: das geprüfte Verfahren für Szenario {i} ist {conflict_de}.",
                            "claim_patterns": {"any_of": [conflict_de]},
                        },
                    },
                },
                "material_ids": ["m1" if i % 2 else "m2"],
                "probes": {
                    "en": [f"The required procedure is {fact_en}.", f"The required procedure is {conflict_en}."],
                    "de": [f"Das vorgeschriebene Verfahren ist {fact_de}.", f"Das vorgeschriebene Verfahren ist {conflict_de}."],
                },
            }
        )
    return {
        "id": "fire-safety-replay",
        "base_iri": "https://example.org/sqare/fire-safety",
        "languages": ["de", "en"],
        "materials": materials,
        "questions": questions,
    }


def build_study() -> Study:
    return study_from_dict(build_study_dict())


def response_text(language: str, condition: ConditionKind, question_index: int, valid: bool) -> str:
    qid = _qid(question_index + 1)
    if valid:
        if language == "de":
            return f"Das vorgeschriebene Verfahren ist FAKT-{qid}."
        return f"The required procedure is FACT-{qid}."
    if condition == ConditionKind.CONFLICTING:
        if language == "de":
            return f"Laut dem bereitgestellten Kontext ist das Verfahren KONFLIKT-{qid}."
        return f"According to the provided context, the procedure is CONFLICT-{qid}."
    if language == "de":
        return "Das kann ich nicht bestimmen."
    return "I cannot determine the required procedure."


def build_cassette(study: Study) -> Cassette:
    cassette = Cassette()
    for qi, question in enumerate(study.questions):
        for language in study.languages:
            for condition in CONDITION_ORDER:
                valid_a, valid_b = labels(language, condition, qi)
                prompt = build_prompt(study, question.id, condition, language)
                for model, valid in ((MODEL_A, valid_a), (MODEL_B, valid_b)):
                    fp = fingerprint(model, language, condition, question.id, prompt.full_text())
                    cassette.put(
                        CassetteRecord(
                            fp=fp,
                            model=model,
                            lang=language,
                            condition=condition.value,
                            question=question.id,
                            response=response_text(language, condition, qi, valid),
                            latency_ms=100 + (qi * 7) % 50,
                            recorded_at=FIXTURE_RECORDED_AT,
                        )
                    )
    return cassette


FIXTURE_DIR = Path(__file__).parent / "fixtures"
STUDY_PATH = FIXTURE_DIR / "fire_safety_study.json"
CASSETTE_PATH = FIXTURE_DIR / "fire_safety_cassette.jsonl"


def write_fixture_files() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    STUDY_PATH.write_text(
        json.dumps(build_study_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    build_cassette(build_study()).save(CASSETTE_PATH)


if __name__ == "__main__":
    write_fixture_files()
    print(f"wrote {STUDY_PATH}")
    print(f"wrote {CASSETTE_PATH}")
