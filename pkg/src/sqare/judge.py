"""Correctness judging: automatic pattern-based judgments and human
overrides, materialized as ValidationResult nodes.

Judging a single record is pure; graph materialization replaces any
prior result for the same answer, so every Answer carries exactly one
ValidationResult no matter how often it is re-judged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from . import vocab
from .rdf import (
    RDF_TYPE,
    Graph,
    Iri,
    Literal,
    Triple,
    TriplePattern,
    boolean,
)
from .harness import TrialRecord
from .studydef import ConditionKind, QuestionSpec


class JudgeError(ValueError):
    pass


class ValidityPolicy(str, Enum):
    FACTUAL = "factual"
    ABSTENTION_AWARE = "abstention-aware"


@dataclass(frozen=True)
class Judgment:
    answer_iri: Iri
    is_valid: bool
    matches_factual: bool
    matches_context: Optional[bool]  # absent for no_context
    leakage: Optional[bool]  # present iff condition = conflicting
    method: str  # "auto" or "human"
    policy: ValidityPolicy
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.leakage is not None and self.matches_context is not None:
            expected = self.matches_factual and not self.matches_context
            if self.leakage != expected:
                raise JudgeError("leakage must equal matches_factual and not matches_context")


def auto_judge(
    record: TrialRecord,
    question: QuestionSpec,
    policy: ValidityPolicy,
    answer_iri: Iri,
) -> Judgment:
    """Pattern-based judgment of one trial's response text."""
    condition = record.key.condition
    lang = record.key.language
    response = record.response_text

    factual_rule = question.factual_patterns[lang]
    matches_factual = factual_rule.matches(response)
    fired: List[str] = []
    if matches_factual:
        fired.append("factual")

    matches_context: Optional[bool] = None
    if condition != ConditionKind.NO_CONTEXT:
        claim_rule = question.contexts[condition][lang].claim_patterns
        matches_context = claim_rule.matches(response)
        if matches_context:
            fired.append("claim")

    leakage: Optional[bool] = None
    if condition == ConditionKind.CONFLICTING:
        leakage = matches_factual and not bool(matches_context)

    abstained = question.abstention_patterns[lang].matches(response)
    if abstained:
        fired.append("abstention")

    if policy == ValidityPolicy.FACTUAL:
        is_valid = matches_factual
    else:
        is_valid = matches_factual or (condition == ConditionKind.INCOMPLETE and abstained)

    rationale = "patterns fired: " + (", ".join(fired) if fired else "none")
    return Judgment(
        answer_iri=answer_iri,
        is_valid=is_valid,
        matches_factual=matches_factual,
        matches_context=matches_context,
        leakage=leakage,
        method="auto",
        policy=policy,
        rationale=rationale,
    )


def validation_iri(answer_iri: Iri) -> Iri:
    return Iri(answer_iri.value + "/validation")


def clear_judgment(graph: Graph, answer_iri: Iri) -> None:
    node = validation_iri(answer_iri)
    for t in graph.match(TriplePattern(subject=node)):
        graph.remove(t)
    link = Triple(answer_iri, vocab.term("hasValidationResult"), node)
    graph.remove(link)


def materialize_judgment(graph: Graph, judgment: Judgment) -> Iri:
    """Mint/replace the answer's single ValidationResult node."""
    t = vocab.term
    answer = judgment.answer_iri
    if Triple(answer, RDF_TYPE, t("Answer")) not in graph:
        raise JudgeError(f"no Answer node {answer.value} in graph")
    clear_judgment(graph, answer)
    node = validation_iri(answer)
    graph.add(answer, t("hasValidationResult"), node)
    graph.add(node, RDF_TYPE, t("ValidationResult"))
    graph.add(node, t("isValid"), boolean(judgment.is_valid))
    graph.add(node, t("matchesFactual"), boolean(judgment.matches_factual))
    if judgment.matches_context is not None:
        graph.add(node, t("matchesContext"), boolean(judgment.matches_context))
    if judgment.leakage is not None:
        graph.add(node, t("hasLeakage"), boolean(judgment.leakage))
    graph.add(node, t("hasJudgmentMethod"), Literal(judgment.method))
    graph.add(node, t("hasValidityPolicy"), Literal(judgment.policy.value))
    if judgment.rationale:
        graph.add(node, t("hasRationale"), Literal(judgment.rationale))
    return node


def _parse_flag(field: str, row: int, name: str) -> Optional[bool]:
    if field == "-":
        return None
    if field in ("true", "1"):
        return True
    if field in ("false", "0"):
        return False
    raise JudgeError(f"row {row}: bad {name} value {field!r} (expected true/false/-)")


def ingest_judgments(graph: Graph, path: Union[str, Path], policy: ValidityPolicy = ValidityPolicy.FACTUAL) -> int:
    """Apply human-judgment TSV overrides; returns the override count.

    Row format: answer_iri, is_valid, matches_factual, matches_context,
    rationale — `-` for absent flags. Leakage is recomputed for
    conflicting answers from the supplied flags.
    """
    t = vocab.term
    content = Path(path).read_text(encoding="utf-8")
    count = 0
    for row_no, line in enumerate(content.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 5:
            raise JudgeError(f"row {row_no}: expected 5 tab-separated fields, got {len(fields)}")
        iri_text, is_valid_f, matches_factual_f, matches_context_f, rationale = fields
        answer = Iri(iri_text)
        if Triple(answer, RDF_TYPE, t("Answer")) not in graph:
            raise JudgeError(f"row {row_no}: unknown answer IRI {iri_text}")
        is_valid = _parse_flag(is_valid_f, row_no, "is_valid")
        matches_factual = _parse_flag(matches_factual_f, row_no, "matches_factual")
        if is_valid is None or matches_factual is None:
            raise JudgeError(f"row {row_no}: is_valid and matches_factual are required")
        matches_context = _parse_flag(matches_context_f, row_no, "matches_context")

        setting = graph.value(answer, t("hasCondition"))
        kind = graph.value(setting, t("hasConditionKind")) if setting is not None else None
        conflicting = isinstance(kind, Literal) and kind.lexical == ConditionKind.CONFLICTING.value
        leakage = (matches_factual and not bool(matches_context)) if conflicting else None

        judgment = Judgment(
            answer_iri=answer,
            is_valid=is_valid,
            matches_factual=matches_factual,
            matches_context=matches_context,
            leakage=leakage,
            method="human",
            policy=policy,
            rationale=rationale,
        )
        materialize_judgment(graph, judgment)
        count += 1
    return count
