"""SHACL-style integrity validation of the evaluation graph.

Shapes are plain data validated natively; export_shacl() renders them
with SHACL vocabulary IRIs for interoperability with external tooling.
Validation is pure and read-only, so concurrent invocation is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import vocab
from .rdf import (
    DCTERMS_NS,
    PROV_NS,
    RDF_TYPE,
    SHACL_NS,
    SQARE_NS,
    XSD_BOOLEAN,
    XSD_DATETIME,
    BlankNode,
    Graph,
    Iri,
    Literal,
    Term,
    Triple,
    TriplePattern,
    integer,
)

GENERATED_AT = Iri(PROV_NS + "generatedAtTime")
DCT_LANGUAGE = Iri(DCTERMS_NS + "language")


@dataclass(frozen=True)
class Cardinality:
    prop: Iri
    min: int
    max: Optional[int]  # None = unbounded

    def __post_init__(self) -> None:
        if self.max is not None and self.min > self.max:
            raise ValueError("cardinality min > max")

    def describe(self) -> str:
        upper = "*" if self.max is None else str(self.max)
        return f"cardinality of <{self.prop.value}> must be in [{self.min}, {upper}]"


@dataclass(frozen=True)
class Datatype:
    prop: Iri
    datatype: str

    def describe(self) -> str:
        return f"values of <{self.prop.value}> must be literals of datatype <{self.datatype}>"


@dataclass(frozen=True)
class LanguageTagIn:
    """Every value must be a language-tagged literal with an allowed tag."""

    prop: Iri
    allowed: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.allowed:
            raise ValueError("allowed tags must be non-empty")

    def describe(self) -> str:
        return f"values of <{self.prop.value}> must carry a language tag in {{{', '.join(self.allowed)}}}"


@dataclass(frozen=True)
class OnePerLanguage:
    """Exactly one value per required language tag."""

    prop: Iri
    tags: Tuple[str, ...]

    def describe(self) -> str:
        return f"<{self.prop.value}> must have exactly one value per language in {{{', '.join(self.tags)}}}"


@dataclass(frozen=True)
class LanguageMatchesProperty:
    """Language tag of prop values must equal the node's recorded language."""

    prop: Iri
    language_prop: Iri

    def describe(self) -> str:
        return (
            f"language tag of <{self.prop.value}> must equal the value of "
            f"<{self.language_prop.value}>"
        )


@dataclass(frozen=True)
class ObjectClass:
    prop: Iri
    required_class: Iri

    def describe(self) -> str:
        return f"objects of <{self.prop.value}> must be nodes of class <{self.required_class.value}>"


@dataclass(frozen=True)
class ConditionalAbsence:
    """prop must be absent when guard holds and present (>= 1) otherwise."""

    prop: Iri
    guard_prop: Iri
    guard_value: Term

    def describe(self) -> str:
        return (
            f"<{self.prop.value}> must be absent when <{self.guard_prop.value}> = "
            f"{self.guard_value.n3()} and present otherwise"
        )


Constraint = Union[
    Cardinality,
    Datatype,
    LanguageTagIn,
    OnePerLanguage,
    LanguageMatchesProperty,
    ObjectClass,
    ConditionalAbsence,
]


@dataclass(frozen=True)
class Shape:
    id: str
    target_class: Iri
    constraints: Tuple[Constraint, ...]


@dataclass(frozen=True)
class Violation:
    shape_id: str
    focus: str
    message: str
    observed: str = ""

    def as_tsv(self) -> str:
        return f"{self.shape_id}\t{self.focus}\t{self.message}"


def builtin_shapes(languages: Sequence[str] = ("de", "en")) -> List[Shape]:
    """Shapes for the core evaluation graph; deterministic across calls."""
    t = vocab.term
    no_context_iri_suffix = "/condition/no_context"
    answer = Shape(
        id="AnswerShape",
        target_class=t("Answer"),
        constraints=(
            Cardinality(t("hasGivenFor"), 1, 1),
            ObjectClass(t("hasGivenFor"), t("Question")),
            Cardinality(t("hasText"), 1, 1),
            LanguageMatchesProperty(t("hasText"), DCT_LANGUAGE),
            Cardinality(t("hasValidationResult"), 1, 1),
            ObjectClass(t("hasValidationResult"), t("ValidationResult")),
            Cardinality(GENERATED_AT, 1, 1),
            Datatype(GENERATED_AT, XSD_DATETIME),
            Cardinality(t("hasCondition"), 1, 1),
            ObjectClass(t("hasCondition"), t("ContextSetting")),
            _material_exclusion(),
        ),
    )
    question = Shape(
        id="QuestionShape",
        target_class=t("Question"),
        constraints=(OnePerLanguage(t("hasText"), tuple(languages)),),
    )
    validation = Shape(
        id="ValidationResultShape",
        target_class=t("ValidationResult"),
        constraints=(
            Cardinality(t("isValid"), 1, 1),
            Datatype(t("isValid"), XSD_BOOLEAN),
            Cardinality(t("matchesFactual"), 1, 1),
            Datatype(t("matchesFactual"), XSD_BOOLEAN),
            Datatype(t("matchesContext"), XSD_BOOLEAN),
            Datatype(t("hasLeakage"), XSD_BOOLEAN),
        ),
    )
    return [answer, question, validation]


def _material_exclusion() -> ConditionalAbsence:
    # Guard compares the ContextSetting's recorded kind, so the shape works
    # for any study base IRI.
    return ConditionalAbsence(
        prop=vocab.term("hasUsedMaterial"),
        guard_prop=vocab.term("hasCondition"),
        guard_value=Literal("no_context"),
    )


def _condition_kind(graph: Graph, focus: Term) -> Optional[str]:
    setting = graph.value(focus, vocab.term("hasCondition"))
    if setting is None:
        return None
    kind = graph.value(setting, vocab.term("hasConditionKind"))
    if isinstance(kind, Literal):
        return kind.lexical
    return None


def _check(graph: Graph, shape: Shape, focus, constraint: Constraint) -> List[Violation]:
    values = graph.objects(focus, getattr(constraint, "prop"))
    out: List[Violation] = []

    def viol(observed: str = "") -> None:
        out.append(Violation(shape.id, focus.n3(), constraint.describe(), observed))

    if isinstance(constraint, Cardinality):
        n = len(values)
        if n < constraint.min or (constraint.max is not None and n > constraint.max):
            viol(f"count={n}")
    elif isinstance(constraint, Datatype):
        for v in values:
            if not isinstance(v, Literal) or v.datatype != constraint.datatype:
                viol(v.n3())
    elif isinstance(constraint, LanguageTagIn):
        for v in values:
            if not isinstance(v, Literal) or v.lang not in constraint.allowed:
                viol(v.n3())
    elif isinstance(constraint, OnePerLanguage):
        counts = {tag: 0 for tag in constraint.tags}
        for v in values:
            if isinstance(v, Literal) and v.lang in counts:
                counts[v.lang] += 1
        for tag, n in counts.items():
            if n != 1:
                viol(f"lang={tag} count={n}")
    elif isinstance(constraint, LanguageMatchesProperty):
        recorded = graph.value(focus, constraint.language_prop)
        expected = recorded.lexical.lower() if isinstance(recorded, Literal) else None
        for v in values:
            if not isinstance(v, Literal) or v.lang != expected:
                viol(f"{v.n3()} expected @{expected}")
    elif isinstance(constraint, ObjectClass):
        for v in values:
            if isinstance(v, Literal) or Triple(v, RDF_TYPE, constraint.required_class) not in graph:
                viol(v.n3())
    elif isinstance(constraint, ConditionalAbsence):
        kind = _condition_kind(graph, focus)
        guard_holds = kind is not None and kind == getattr(constraint.guard_value, "lexical", None)
        if guard_holds and values:
            viol(f"count={len(values)}")
        elif kind is not None and not guard_holds and not values:
            viol("count=0")
    return out


def validate(graph: Graph, shapes: Sequence[Shape]) -> List[Violation]:
    """All violations, sorted by (shape id, focus node)."""
    violations: List[Violation] = []
    for shape in shapes:
        for focus in graph.subjects(RDF_TYPE, shape.target_class):
            for constraint in shape.constraints:
                violations.extend(_check(graph, shape, focus, constraint))
    violations.sort(key=lambda v: (v.shape_id, v.focus, v.message))
    return violations


_SH = SHACL_NS


def export_shacl(shapes: Sequence[Shape]) -> Graph:
    """Render shapes with SHACL vocabulary IRIs (informative export)."""
    g = Graph()
    sh = lambda local: Iri(_SH + local)
    for shape in shapes:
        shape_iri = Iri(SQARE_NS + "shape/" + shape.id)
        g.add(shape_iri, RDF_TYPE, sh("NodeShape"))
        g.add(shape_iri, sh("targetClass"), shape.target_class)
        for i, constraint in enumerate(shape.constraints):
            prop_iri = Iri(f"{shape_iri.value}/property/{i}")
            g.add(shape_iri, sh("property"), prop_iri)
            g.add(prop_iri, sh("path"), getattr(constraint, "prop"))
            if isinstance(constraint, Cardinality):
                g.add(prop_iri, sh("minCount"), integer(constraint.min))
                if constraint.max is not None:
                    g.add(prop_iri, sh("maxCount"), integer(constraint.max))
            elif isinstance(constraint, Datatype):
                g.add(prop_iri, sh("datatype"), Iri(constraint.datatype))
            elif isinstance(constraint, (LanguageTagIn, OnePerLanguage)):
                tags = getattr(constraint, "allowed", None) or getattr(constraint, "tags")
                for tag in tags:
                    g.add(prop_iri, sh("languageIn"), Literal(tag))
                if isinstance(constraint, OnePerLanguage):
                    g.add(prop_iri, sh("uniqueLang"), Literal("true", datatype=XSD_BOOLEAN))
            elif isinstance(constraint, ObjectClass):
                g.add(prop_iri, sh("class"), constraint.required_class)
            elif isinstance(constraint, (LanguageMatchesProperty, ConditionalAbsence)):
                g.add(prop_iri, sh("description"), Literal(constraint.describe(), lang="en"))
    return g
