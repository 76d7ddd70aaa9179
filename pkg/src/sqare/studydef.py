"""Study definition: questions, materials, context fragments, prompts.

A study is loaded from a UTF-8 JSON file (see README for the format),
checked against its invariants, and then immutable. All text matching
(factual patterns, claim patterns, abstention patterns) happens on
normalized text: Unicode NFC, case-folded, whitespace collapsed — the
same normalization the judge applies to model responses.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union


class StudyError(ValueError):
    """Raised for unparsable or invariant-violating study definitions."""


class ConditionKind(str, Enum):
    COMPLETE = "complete"
    INCOMPLETE = "incomplete"
    CONFLICTING = "conflicting"
    NO_CONTEXT = "no_context"

    @classmethod
    def with_context(cls) -> Tuple["ConditionKind", ...]:
        return (cls.COMPLETE, cls.INCOMPLETE, cls.CONFLICTING)


CONDITION_ORDER = (
    ConditionKind.COMPLETE,
    ConditionKind.INCOMPLETE,
    ConditionKind.CONFLICTING,
    ConditionKind.NO_CONTEXT,
)


def normalize_text(text: str) -> str:
    """NFC, case-fold, collapse all whitespace runs to single spaces."""
    text = unicodedata.normalize("NFC", text)
    text = text.casefold()
    return " ".join(text.split())


@dataclass(frozen=True)
class MatchRule:
    """Substring/regex matcher over normalized text.

    Matches iff: any `any_of` substring occurs (or any_of is empty),
    AND every `all_of` substring occurs, AND any `regex` matches (or
    regex is empty). A rule with no clauses at all matches nothing.
    """

    any_of: Tuple[str, ...] = ()
    all_of: Tuple[str, ...] = ()
    regex: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "any_of", tuple(normalize_text(s) for s in self.any_of))
        object.__setattr__(self, "all_of", tuple(normalize_text(s) for s in self.all_of))
        for pattern in self.regex:
            try:
                re.compile(pattern)
            except re.error as exc:
                raise StudyError(f"bad regex {pattern!r}: {exc}") from exc

    def is_empty(self) -> bool:
        return not (self.any_of or self.all_of or self.regex)

    def matches(self, text: str) -> bool:
        if self.is_empty():
            return False
        norm = normalize_text(text)
        if self.any_of and not any(s in norm for s in self.any_of):
            return False
        if any(s not in norm for s in self.all_of):
            return False
        if self.regex and not any(re.search(p, norm) for p in self.regex):
            return False
        return True

    @classmethod
    def from_json(cls, data: Optional[dict], where: str) -> "MatchRule":
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise StudyError(f"{where}: match rule must be an object")
        return cls(
            any_of=tuple(data.get("any_of", [])),
            all_of=tuple(data.get("all_of", [])),
            regex=tuple(data.get("regex", [])),
        )


@dataclass(frozen=True)
class ContextFragment:
    body: str
    claim_patterns: MatchRule = field(default_factory=MatchRule)

    def __post_init__(self) -> None:
        if not self.body.strip():
            raise StudyError("context fragment body must be non-empty")


@dataclass(frozen=True)
class MaterialSpec:
    id: str
    title: Dict[str, str]
    body: Dict[str, str]
    source: Optional[str] = None


@dataclass(frozen=True)
class QuestionSpec:
    id: str
    text: Dict[str, str]
    factual_patterns: Dict[str, MatchRule]
    abstention_patterns: Dict[str, MatchRule]
    contexts: Dict[ConditionKind, Dict[str, ContextFragment]]
    material_ids: Tuple[str, ...] = ()
    probes: Dict[str, Tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class PromptTemplate:
    system_text: Dict[str, str]
    user_text: Dict[str, str]

    def __post_init__(self) -> None:
        for lang, text in self.system_text.items():
            if text.count("{context}") != 1:
                raise StudyError(f"system template ({lang}) must contain {{context}} exactly once")
        for lang, text in self.user_text.items():
            if text.count("{question}") != 1:
                raise StudyError(f"user template ({lang}) must contain {{question}} exactly once")


DEFAULT_TEMPLATE = PromptTemplate(
    system_text={
        "en": "You are a careful domain expert.\n\n"
        "Answer the question using only the context below.\nContext:\n{context}",
        "de": "Du bist ein sorgfältiger Fachexperte.\n\n"
        "Beantworte die Frage ausschließlich anhand des folgenden Kontexts.\nKontext:\n{context}",
    },
    user_text={"en": "{question}", "de": "{question}"},
)


@dataclass(frozen=True)
class PromptInput:
    """Ordered chat messages; system always precedes user."""

    system: str
    user: str

    def messages(self) -> List[Dict[str, str]]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]

    def full_text(self) -> str:
        return f"[system]\n{self.system}\n[user]\n{self.user}"


@dataclass(frozen=True)
class TrialKey:
    question_id: str
    model: str
    language: str
    condition: ConditionKind


@dataclass(frozen=True)
class Study:
    id: str
    base_iri: str
    languages: Tuple[str, ...]
    questions: Tuple[QuestionSpec, ...]
    materials: Tuple[MaterialSpec, ...]
    prompt_template: PromptTemplate

    def question(self, question_id: str) -> QuestionSpec:
        for q in self.questions:
            if q.id == question_id:
                return q
        raise StudyError(f"unknown question id: {question_id!r}")

    def material(self, material_id: str) -> MaterialSpec:
        for m in self.materials:
            if m.id == material_id:
                return m
        raise StudyError(f"unknown material id: {material_id!r}")


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise StudyError(f"{where}: missing required key {key!r}")
    return data[key]


def _lang_map(data: dict, languages: Sequence[str], where: str) -> Dict[str, str]:
    out = {}
    for lang in languages:
        if lang not in data:
            raise StudyError(f"{where}: missing text for language {lang!r}")
        out[lang] = data[lang]
    return out


def study_from_dict(data: dict) -> Study:
    languages = tuple(str(lang).lower() for lang in _require(data, "languages", "study"))
    if not languages:
        raise StudyError("study: must declare at least one language")
    study_id = str(_require(data, "id", "study")).strip()
    base_iri = str(_require(data, "base_iri", "study")).rstrip("/")

    template_data = data.get("prompt_template")
    if template_data is None:
        template = DEFAULT_TEMPLATE
    else:
        template = PromptTemplate(
            system_text=_lang_map(template_data.get("system", {}), languages, "prompt_template.system"),
            user_text=_lang_map(template_data.get("user", {}), languages, "prompt_template.user"),
        )
    for lang in languages:
        if lang not in template.system_text or lang not in template.user_text:
            raise StudyError(f"prompt_template: missing language {lang!r}")

    materials = []
    seen_material_ids = set()
    for m in data.get("materials", []):
        mid = str(_require(m, "id", "material")).strip()
        if mid in seen_material_ids:
            raise StudyError(f"material: duplicate id {mid!r}")
        seen_material_ids.add(mid)
        materials.append(
            MaterialSpec(
                id=mid,
                title=_lang_map(m.get("title", {}), languages, f"material {mid}: title"),
                body=_lang_map(m.get("body", {}), languages, f"material {mid}: body"),
                source=m.get("source"),
            )
        )

    questions = []
    seen_question_ids = set()
    for q in _require(data, "questions", "study"):
        qid = str(_require(q, "id", "question")).strip()
        where = f"question {qid}"
        if qid in seen_question_ids:
            raise StudyError(f"{where}: duplicate id")
        seen_question_ids.add(qid)
        text = _lang_map(_require(q, "text", where), languages, f"{where}: text")
        factual = {
            lang: MatchRule.from_json(q.get("factual_patterns", {}).get(lang), f"{where}: factual_patterns.{lang}")
            for lang in languages
        }
        abstention = {
            lang: MatchRule.from_json(q.get("abstention_patterns", {}).get(lang), f"{where}: abstention_patterns.{lang}")
            for lang in languages
        }
        contexts: Dict[ConditionKind, Dict[str, ContextFragment]] = {}
        raw_contexts = _require(q, "contexts", where)
        for kind in ConditionKind.with_context():
            if kind.value not in raw_contexts:
                raise StudyError(f"{where}: missing context for condition {kind.value!r}")
            per_lang = {}
            for lang in languages:
                frag = raw_contexts[kind.value].get(lang)
                if frag is None:
                    raise StudyError(f"{where}: missing {kind.value} context for language {lang!r}")
                per_lang[lang] = ContextFragment(
                    body=_require(frag, "body", f"{where}: {kind.value}.{lang}"),
                    claim_patterns=MatchRule.from_json(
                        frag.get("claim_patterns"), f"{where}: {kind.value}.{lang}.claim_patterns"
                    ),
                )
            contexts[kind] = per_lang
        if ConditionKind.NO_CONTEXT.value in raw_contexts:
            raise StudyError(f"{where}: no_context must not declare a context fragment")
        for kind, per_lang in contexts.items():
            if kind == ConditionKind.CONFLICTING:
                for lang, frag in per_lang.items():
                    if frag.claim_patterns.is_empty():
                        raise StudyError(f"{where}: conflicting.{lang} must declare claim_patterns")
        material_ids = tuple(str(x) for x in q.get("material_ids", []))
        for mid in material_ids:
            if mid not in seen_material_ids:
                raise StudyError(f"{where}: references unknown material {mid!r}")
        probes = {lang: tuple(q.get("probes", {}).get(lang, [])) for lang in languages}
        spec = QuestionSpec(
            id=qid,
            text=text,
            factual_patterns=factual,
            abstention_patterns=abstention,
            contexts=contexts,
            material_ids=material_ids,
            probes=probes,
        )
        _check_claim_disjointness(spec, languages)
        questions.append(spec)

    if not questions:
        raise StudyError("study: must declare at least one question")

    return Study(
        id=study_id,
        base_iri=base_iri,
        languages=languages,
        questions=tuple(questions),
        materials=tuple(materials),
        prompt_template=template,
    )


def _check_claim_disjointness(question: QuestionSpec, languages: Sequence[str]) -> None:
    # A conflicting claim pattern must never fire on a factually correct
    # answer, checked over the question's declared probe strings.
    for lang in languages:
        claim = question.contexts[ConditionKind.CONFLICTING][lang].claim_patterns
        factual = question.factual_patterns[lang]
        for probe in question.probes.get(lang, ()):
            if factual.matches(probe) and claim.matches(probe):
                raise StudyError(
                    f"question {question.id}: conflicting claim pattern ({lang}) also "
                    f"matches factual probe {probe!r}"
                )


def load_study(path: Union[str, Path]) -> Study:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StudyError(f"cannot read study file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise StudyError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return study_from_dict(data)


def build_prompt(
    study: Study, question_id: str, condition: ConditionKind, language: str
) -> PromptInput:
    """Deterministic prompt for one trial; system message first.

    For no_context, the paragraph of the system template containing the
    {context} placeholder (its scaffold) is dropped entirely.
    """
    if language not in study.languages:
        raise StudyError(f"unknown language: {language!r}")
    if not isinstance(condition, ConditionKind):
        raise StudyError(f"unknown condition: {condition!r}")
    question = study.question(question_id)

    system_template = study.prompt_template.system_text[language]
    if condition == ConditionKind.NO_CONTEXT:
        blocks = [b for b in system_template.split("\n\n") if "{context}" not in b]
        system = "\n\n".join(blocks).strip()
    else:
        fragment = question.contexts[condition][language]
        parts = [fragment.body]
        for mid in question.material_ids:
            parts.append(study.material(mid).body[language])
        system = system_template.replace("{context}", "\n\n".join(parts)).strip()

    user = study.prompt_template.user_text[language].replace("{question}", question.text[language])
    return PromptInput(system=system, user=user)


def enumerate_trials(
    study: Study,
    models: Sequence[str],
    conditions: Sequence[ConditionKind] = CONDITION_ORDER,
    languages: Optional[Sequence[str]] = None,
) -> List[TrialKey]:
    """Cross product in fixed (question, model, language, condition) order."""
    if not models:
        raise StudyError("at least one model required")
    languages = tuple(languages) if languages is not None else study.languages
    for lang in languages:
        if lang not in study.languages:
            raise StudyError(f"language {lang!r} not in study")
    conditions = tuple(conditions)
    for cond in conditions:
        if not isinstance(cond, ConditionKind):
            raise StudyError(f"unknown condition: {cond!r}")
    return [
        TrialKey(q.id, model, lang, cond)
        for q in study.questions
        for model in models
        for lang in languages
        for cond in conditions
    ]
