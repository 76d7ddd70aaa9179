"""Aggregate metrics over the judged evaluation graph.

All metrics are pure read-only functions of the graph, implemented as
fixed triple-pattern join plans (no SPARQL engine). Semantically
equivalent SPARQL 1.1 query texts can be exported for external engines
via emit_sparql_queries().
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import shapes, vocab
from .rdf import (
    DCTERMS_NS,
    RDF_TYPE,
    XSD_BOOLEAN,
    Graph,
    Iri,
    Literal,
    Term,
    TriplePattern,
)
from .stats import ContingencyTable
from .studydef import CONDITION_ORDER, ConditionKind

DCT_LANGUAGE = Iri(DCTERMS_NS + "language")


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class AnswerRow:
    """Flattened view of one Answer node and its validation flags."""

    answer: Iri
    question_id: str
    model: str
    language: str
    condition: ConditionKind
    is_valid: Optional[bool]
    matches_factual: Optional[bool]
    matches_context: Optional[bool]
    leakage: Optional[bool]


def _lexical(term: Optional[Term]) -> Optional[str]:
    return term.lexical if isinstance(term, Literal) else None


def _flag(graph: Graph, node, prop: Iri) -> Optional[bool]:
    value = graph.value(node, prop)
    if isinstance(value, Literal) and value.datatype == XSD_BOOLEAN:
        return value.lexical == "true"
    return None


def answer_rows(graph: Graph) -> List[AnswerRow]:
    """The core join plan: Answer -> question/model/condition/validation."""
    t = vocab.term
    rows: List[AnswerRow] = []
    for answer in graph.subjects(RDF_TYPE, t("Answer")):
        question = graph.value(answer, t("hasGivenFor"))
        question_id = _lexical(graph.value(question, t("hasQuestionId"))) if question is not None else None
        model_node = graph.value(answer, t("hasModel"))
        model = _lexical(graph.value(model_node, t("hasModelName"))) if model_node is not None else None
        language = _lexical(graph.value(answer, DCT_LANGUAGE))
        setting = graph.value(answer, t("hasCondition"))
        kind = _lexical(graph.value(setting, t("hasConditionKind"))) if setting is not None else None
        if question_id is None or model is None or language is None or kind is None:
            raise AnalysisError(f"answer {answer.n3()} lacks question/model/language/condition")
        validation = graph.value(answer, t("hasValidationResult"))
        rows.append(
            AnswerRow(
                answer=answer,  # type: ignore[arg-type]
                question_id=question_id,
                model=model,
                language=language,
                condition=ConditionKind(kind),
                is_valid=_flag(graph, validation, t("isValid")) if validation is not None else None,
                matches_factual=_flag(graph, validation, t("matchesFactual")) if validation is not None else None,
                matches_context=_flag(graph, validation, t("matchesContext")) if validation is not None else None,
                leakage=_flag(graph, validation, t("hasLeakage")) if validation is not None else None,
            )
        )
    rows.sort(key=lambda r: (r.question_id, r.model, r.language, r.condition.value))
    return rows


def _require_shape_clean(graph: Graph) -> None:
    violations = shapes.validate(graph, shapes.builtin_shapes())
    if violations:
        raise AnalysisError(
            f"graph has {len(violations)} shape violation(s); run `sqare validate` for details"
        )


@dataclass(frozen=True)
class AccuracyCell:
    model: str
    language: str
    condition: ConditionKind
    valid_count: int
    total: int

    @property
    def accuracy(self) -> Fraction:
        return Fraction(self.valid_count, self.total)


def accuracy_matrix(graph: Graph, check_shapes: bool = True) -> List[AccuracyCell]:
    """One cell per (model, language, condition) present in the graph."""
    if check_shapes:
        _require_shape_clean(graph)
    counts: Dict[Tuple[str, str, ConditionKind], Tuple[int, int]] = {}
    for row in answer_rows(graph):
        key = (row.model, row.language, row.condition)
        valid, total = counts.get(key, (0, 0))
        counts[key] = (valid + (1 if row.is_valid else 0), total + 1)
    cells = [
        AccuracyCell(model, language, condition, valid, total)
        for (model, language, condition), (valid, total) in counts.items()
    ]
    cells.sort(key=lambda c: (c.model, c.language, CONDITION_ORDER.index(c.condition)))
    return cells


def _conflicting_rows(graph: Graph, model: str, language: str) -> List[AnswerRow]:
    rows = [
        r
        for r in answer_rows(graph)
        if r.model == model and r.language == language and r.condition == ConditionKind.CONFLICTING
    ]
    if not rows:
        raise AnalysisError(f"no conflicting-condition answers for ({model}, {language})")
    return rows


def error_replication_rate(graph: Graph, model: str, language: str) -> Fraction:
    """Fraction of conflicting answers repeating the planted claim."""
    rows = _conflicting_rows(graph, model, language)
    replicated = sum(1 for r in rows if r.matches_context and not r.matches_factual)
    return Fraction(replicated, len(rows))


def leakage_rate(graph: Graph, model: str, language: str) -> Fraction:
    """Fraction of conflicting answers favoring training knowledge."""
    rows = _conflicting_rows(graph, model, language)
    leaked = sum(1 for r in rows if r.leakage)
    return Fraction(leaked, len(rows))


def crosslingual_consistency(
    graph: Graph, model: str, condition: ConditionKind, languages: Tuple[str, str] = ("de", "en")
) -> Fraction:
    """Fraction of questions whose validity label agrees across both languages."""
    lang_a, lang_b = languages
    labels: Dict[str, Dict[str, bool]] = {}
    for row in answer_rows(graph):
        if row.model == model and row.condition == condition and row.language in languages:
            labels.setdefault(row.question_id, {})[row.language] = bool(row.is_valid)
    if not labels:
        raise AnalysisError(f"no answers for ({model}, {condition.value})")
    for qid, per_lang in labels.items():
        if lang_a not in per_lang or lang_b not in per_lang:
            raise AnalysisError(f"question {qid} lacks coverage in both languages for {model}")
    agree = sum(1 for per_lang in labels.values() if per_lang[lang_a] == per_lang[lang_b])
    return Fraction(agree, len(labels))


def build_contingency(
    graph: Graph, model_a: str, model_b: str, language: str, condition: ConditionKind
) -> ContingencyTable:
    """Paired 2x2 table; model_a occupies rows a,b. Strict pairing by question."""
    labels: Dict[str, Dict[str, bool]] = {}
    for row in answer_rows(graph):
        if row.language == language and row.condition == condition and row.model in (model_a, model_b):
            labels.setdefault(row.question_id, {})[row.model] = bool(row.is_valid)
    missing = [
        (qid, model)
        for qid, per_model in sorted(labels.items())
        for model in (model_a, model_b)
        if model not in per_model
    ]
    if missing:
        raise AnalysisError(f"unpaired cells (question, model): {missing}")
    if not labels:
        raise AnalysisError(f"no answers for ({language}, {condition.value})")
    a = b = c = d = 0
    for per_model in labels.values():
        va, vb = per_model[model_a], per_model[model_b]
        if va and vb:
            a += 1
        elif va:
            b += 1
        elif vb:
            c += 1
        else:
            d += 1
    return ContingencyTable(a, b, c, d)


@dataclass(frozen=True)
class MetricReport:
    accuracy: List[AccuracyCell]
    leakage: Dict[Tuple[str, str], Fraction]
    error_replication: Dict[Tuple[str, str], Fraction]
    consistency: Dict[Tuple[str, ConditionKind], Fraction]


def metric_report(graph: Graph, check_shapes: bool = True) -> MetricReport:
    cells = accuracy_matrix(graph, check_shapes=check_shapes)
    models = sorted({c.model for c in cells})
    languages = sorted({c.language for c in cells})
    leakage: Dict[Tuple[str, str], Fraction] = {}
    replication: Dict[Tuple[str, str], Fraction] = {}
    for model in models:
        for language in languages:
            try:
                leakage[(model, language)] = leakage_rate(graph, model, language)
                replication[(model, language)] = error_replication_rate(graph, model, language)
            except AnalysisError:
                continue
    consistency: Dict[Tuple[str, ConditionKind], Fraction] = {}
    if len(languages) == 2:
        pair = (languages[0], languages[1])
        for model in models:
            for condition in CONDITION_ORDER:
                try:
                    consistency[(model, condition)] = crosslingual_consistency(
                        graph, model, condition, pair
                    )
                except AnalysisError:
                    continue
    return MetricReport(cells, leakage, replication, consistency)


def _pct(value: Fraction) -> str:
    return f"{float(value) * 100:.1f}%"


def format_metric_report(report: MetricReport) -> str:
    lines: List[str] = ["Accuracy (valid/total):"]
    for cell in report.accuracy:
        lines.append(
            f"  {cell.model}  {cell.language}  {cell.condition.value:<12}"
            f"{cell.valid_count}/{cell.total}  ({_pct(cell.accuracy)})"
        )
    lines.append("")
    lines.append("Conflicting-condition rates:")
    for (model, language), rate in sorted(report.error_replication.items()):
        leak = report.leakage.get((model, language))
        lines.append(
            f"  {model}  {language}  error-replication {_pct(rate)}  "
            f"leakage {_pct(leak) if leak is not None else 'n/a'}"
        )
    if report.consistency:
        lines.append("")
        lines.append("Cross-lingual consistency (agreeing questions):")
        for (model, condition), rate in sorted(
            report.consistency.items(), key=lambda kv: (kv[0][0], CONDITION_ORDER.index(kv[0][1]))
        ):
            lines.append(f"  {model}  {condition.value:<12}{_pct(rate)}")
    return "".join(line + "\n" for line in lines)


def metric_report_tsv(report: MetricReport) -> str:
    lines = ["section\tmodel\tlanguage\tcondition\tvalue\tvalid\ttotal"]
    for cell in report.accuracy:
        lines.append(
            f"accuracy\t{cell.model}\t{cell.language}\t{cell.condition.value}\t"
            f"{repr(float(cell.accuracy))}\t{cell.valid_count}\t{cell.total}"
        )
    for (model, language), rate in sorted(report.error_replication.items()):
        lines.append(f"error_replication\t{model}\t{language}\t-\t{repr(float(rate))}\t\t")
    for (model, language), rate in sorted(report.leakage.items()):
        lines.append(f"leakage\t{model}\t{language}\t-\t{repr(float(rate))}\t\t")
    for (model, condition), rate in sorted(
        report.consistency.items(), key=lambda kv: (kv[0][0], CONDITION_ORDER.index(kv[0][1]))
    ):
        lines.append(f"consistency\t{model}\t-\t{condition.value}\t{repr(float(rate))}\t\t")
    return "".join(line + "\n" for line in lines)


_SPARQL_PREAMBLE = """\
PREFIX sqare: <http://purl.org/sqare#>
PREFIX prov: <http://www.w3.org/ns/prov#>
PREFIX dcterms: <http://purl.org/dc/terms/>
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
"""

_QUERIES: Dict[str, str] = {
    "accuracy.rq": _SPARQL_PREAMBLE
    + """\
# Accuracy per (model, language, condition).
SELECT ?modelName ?language ?conditionKind
       (SUM(IF(?isValid = true, 1, 0)) AS ?validCount)
       (COUNT(?answer) AS ?total)
WHERE {
  ?answer a sqare:Answer ;
          sqare:hasModel ?model ;
          dcterms:language ?language ;
          sqare:hasCondition ?setting ;
          sqare:hasValidationResult ?validation .
  ?model sqare:hasModelName ?modelName .
  ?setting sqare:hasConditionKind ?conditionKind .
  ?validation sqare:isValid ?isValid .
}
GROUP BY ?modelName ?language ?conditionKind
ORDER BY ?modelName ?language ?conditionKind
""",
    "leakage_rate.rq": _SPARQL_PREAMBLE
    + """\
# Leakage rate per (model, language) over conflicting-condition answers:
# answers with sqare:matchesFactual true but sqare:matchesContext false.
SELECT ?modelName ?language
       (SUM(IF(?leakage = true, 1, 0)) / COUNT(?answer) AS ?leakageRate)
WHERE {
  ?answer a sqare:Answer ;
          sqare:hasModel ?model ;
          dcterms:language ?language ;
          sqare:hasCondition ?setting ;
          sqare:hasValidationResult ?validation .
  ?model sqare:hasModelName ?modelName .
  ?setting sqare:hasConditionKind "conflicting" .
  ?validation sqare:hasLeakage ?leakage ;
              sqare:matchesFactual ?matchesFactual .
}
GROUP BY ?modelName ?language
ORDER BY ?modelName ?language
""",
    "error_replication.rq": _SPARQL_PREAMBLE
    + """\
# Error-replication rate per (model, language): conflicting answers that
# repeat the planted claim (matchesContext true, matchesFactual false).
SELECT ?modelName ?language
       (SUM(IF(?matchesContext = true && ?matchesFactual = false, 1, 0)) / COUNT(?answer)
        AS ?replicationRate)
WHERE {
  ?answer a sqare:Answer ;
          sqare:hasModel ?model ;
          dcterms:language ?language ;
          sqare:hasCondition ?setting ;
          sqare:hasValidationResult ?validation .
  ?model sqare:hasModelName ?modelName .
  ?setting sqare:hasConditionKind "conflicting" .
  ?validation sqare:matchesContext ?matchesContext ;
              sqare:matchesFactual ?matchesFactual .
}
GROUP BY ?modelName ?language
ORDER BY ?modelName ?language
""",
    "crosslingual_consistency.rq": _SPARQL_PREAMBLE
    + """\
# Cross-lingual agreement per (model, condition). Substitution variables:
# $LANG_A and $LANG_B (the two study language tags).
SELECT ?modelName ?conditionKind
       (SUM(IF(?validA = ?validB, 1, 0)) / COUNT(?question) AS ?consistency)
WHERE {
  ?answerA a sqare:Answer ;
           sqare:hasGivenFor ?question ;
           sqare:hasModel ?model ;
           dcterms:language "$LANG_A" ;
           sqare:hasCondition ?setting ;
           sqare:hasValidationResult ?validationA .
  ?answerB a sqare:Answer ;
           sqare:hasGivenFor ?question ;
           sqare:hasModel ?model ;
           dcterms:language "$LANG_B" ;
           sqare:hasCondition ?setting ;
           sqare:hasValidationResult ?validationB .
  ?model sqare:hasModelName ?modelName .
  ?setting sqare:hasConditionKind ?conditionKind .
  ?validationA sqare:isValid ?validA .
  ?validationB sqare:isValid ?validB .
}
GROUP BY ?modelName ?conditionKind
ORDER BY ?modelName ?conditionKind
""",
    "contingency.rq": _SPARQL_PREAMBLE
    + """\
# Per-question paired validity labels for two models. Substitution
# variables: $MODEL_A, $MODEL_B (model names), $LANG, $CONDITION.
# The 2x2 cells follow by counting (?validA, ?validB) combinations.
SELECT ?questionId ?validA ?validB
WHERE {
  ?answerA a sqare:Answer ;
           sqare:hasGivenFor ?question ;
           sqare:hasModel ?modelA ;
           dcterms:language "$LANG" ;
           sqare:hasCondition ?setting ;
           sqare:hasValidationResult ?validationA .
  ?answerB a sqare:Answer ;
           sqare:hasGivenFor ?question ;
           sqare:hasModel ?modelB ;
           dcterms:language "$LANG" ;
           sqare:hasCondition ?setting ;
           sqare:hasValidationResult ?validationB .
  ?question sqare:hasQuestionId ?questionId .
  ?modelA sqare:hasModelName "$MODEL_A" .
  ?modelB sqare:hasModelName "$MODEL_B" .
  ?setting sqare:hasConditionKind "$CONDITION" .
  ?validationA sqare:isValid ?validA .
  ?validationB sqare:isValid ?validB .
}
ORDER BY ?questionId
""",
}


def emit_sparql_queries(directory: Union[str, Path]) -> List[Path]:
    """Write the static .rq query texts; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(_QUERIES):
        path = directory / name
        path.write_text(_QUERIES[name], encoding="utf-8")
        written.append(path)
    return written
