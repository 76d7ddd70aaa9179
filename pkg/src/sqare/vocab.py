"""Evaluation vocabulary: term registry and T-Box emission.

The vocabulary lives in the http://purl.org/sqare# namespace. The
registry ships 14 classes and 57 properties; only a handful of those
names are fixed by the published schema description (Question, Answer,
ValidationResult, Material, hasText, hasGivenFor, hasUsedMaterial,
hasValidationResult, isValid, matchesFactual) — the remainder are this
toolkit's reconstruction, covering everything the harness and judge
record. The registry is immutable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .rdf import (
    DCTERMS_NS,
    OWL_NS,
    PROV_NS,
    RDF_LANGSTRING,
    RDF_NS,
    RDF_TYPE,
    RDFS_NS,
    SQARE_NS,
    XSD_ANYURI,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_NS,
    XSD_STRING,
    Graph,
    Iri,
    Literal,
    Triple,
)

CLASS = "class"
OBJECT_PROPERTY = "object-property"
DATATYPE_PROPERTY = "datatype-property"

PREFIXES: Dict[str, str] = {
    "sqare": SQARE_NS,
    "prov": PROV_NS,
    "dcterms": DCTERMS_NS,
    "xsd": XSD_NS,
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "owl": OWL_NS,
}


class UnknownTermError(KeyError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown vocabulary term: {name!r}")
        self.name = name


@dataclass(frozen=True)
class VocabTerm:
    iri: Iri
    kind: str
    label_en: str
    label_de: str
    comment_en: str = ""
    comment_de: str = ""
    domain: Optional[Iri] = None
    range: Optional[Iri] = None

    @property
    def local(self) -> str:
        return self.iri.value[len(SQARE_NS) :]


@dataclass(frozen=True)
class VocabRegistry:
    terms: Tuple[VocabTerm, ...]
    prefixes: Dict[str, str] = field(default_factory=lambda: dict(PREFIXES))

    def __post_init__(self) -> None:
        iris = [t.iri.value for t in self.terms]
        if len(iris) != len(set(iris)):
            raise ValueError("duplicate term IRIs in registry")

    def classes(self) -> List[VocabTerm]:
        return [t for t in self.terms if t.kind == CLASS]

    def properties(self) -> List[VocabTerm]:
        return [t for t in self.terms if t.kind != CLASS]

    def by_local(self) -> Dict[str, VocabTerm]:
        return {t.local: t for t in self.terms}


def _c(name: str) -> Iri:
    return Iri(SQARE_NS + name)


def _cls(name: str, label_en: str, label_de: str, comment_en: str = "", comment_de: str = "") -> VocabTerm:
    return VocabTerm(_c(name), CLASS, label_en, label_de, comment_en, comment_de)


def _obj(name: str, label_en: str, label_de: str, domain: str, range_: str) -> VocabTerm:
    return VocabTerm(_c(name), OBJECT_PROPERTY, label_en, label_de, domain=_c(domain), range=_c(range_))


def _dt(name: str, label_en: str, label_de: str, domain: str, range_iri: str) -> VocabTerm:
    return VocabTerm(_c(name), DATATYPE_PROPERTY, label_en, label_de, domain=_c(domain), range=Iri(range_iri))


_CLASSES = (
    _cls("Question", "Question", "Frage",
         "A question posed to a model.", "Eine an ein Modell gestellte Frage."),
    _cls("Answer", "Answer", "Antwort",
         "A model response to a question under one context condition.",
         "Eine Modellantwort auf eine Frage unter einer Kontextbedingung."),
    _cls("ValidationResult", "Validation result", "Validierungsergebnis",
         "Correctness and context-adherence flags for one answer.",
         "Korrektheits- und Kontexttreue-Kennzeichen einer Antwort."),
    _cls("Material", "Material", "Material",
         "A supporting material a context may draw on.",
         "Ein Material, auf das sich ein Kontext stützen kann."),
    _cls("Model", "Model", "Modell"),
    _cls("ExperimentRun", "Experiment run", "Experimentlauf"),
    _cls("ContextSetting", "Context setting", "Kontexteinstellung"),
    _cls("PromptRecord", "Prompt record", "Prompt-Aufzeichnung"),
    _cls("Judgment", "Judgment", "Beurteilung"),
    _cls("Study", "Study", "Studie"),
    _cls("QuestionSet", "Question set", "Fragensatz"),
    _cls("MaterialCollection", "Material collection", "Materialsammlung"),
    _cls("LanguageProfile", "Language profile", "Sprachprofil"),
    _cls("MetricResult", "Metric result", "Metrikergebnis"),
)

_OBJECT_PROPERTIES = (
    _obj("hasGivenFor", "has given for", "gegeben für", "Answer", "Question"),
    _obj("hasUsedMaterial", "has used material", "hat Material verwendet", "Answer", "Material"),
    _obj("hasValidationResult", "has validation result", "hat Validierungsergebnis", "Answer", "ValidationResult"),
    _obj("hasCondition", "has condition", "hat Bedingung", "Answer", "ContextSetting"),
    _obj("hasModel", "has model", "hat Modell", "Answer", "Model"),
    _obj("inRun", "in run", "in Lauf", "Answer", "ExperimentRun"),
    _obj("hasPromptRecord", "has prompt record", "hat Prompt-Aufzeichnung", "Answer", "PromptRecord"),
    _obj("hasJudgment", "has judgment", "hat Beurteilung", "ValidationResult", "Judgment"),
    _obj("judgedAnswer", "judged answer", "beurteilte Antwort", "Judgment", "Answer"),
    _obj("hasQuestion", "has question", "hat Frage", "QuestionSet", "Question"),
    _obj("hasQuestionSet", "has question set", "hat Fragensatz", "Study", "QuestionSet"),
    _obj("hasMaterialCollection", "has material collection", "hat Materialsammlung", "Study", "MaterialCollection"),
    _obj("hasMaterial", "has material", "hat Material", "MaterialCollection", "Material"),
    _obj("hasLanguageProfile", "has language profile", "hat Sprachprofil", "Study", "LanguageProfile"),
    _obj("hasMetricResult", "has metric result", "hat Metrikergebnis", "ExperimentRun", "MetricResult"),
    _obj("usesModel", "uses model", "verwendet Modell", "ExperimentRun", "Model"),
    _obj("partOfStudy", "part of study", "Teil der Studie", "Question", "Study"),
    _obj("refersToMaterial", "refers to material", "verweist auf Material", "Question", "Material"),
    _obj("hasContextSetting", "has context setting", "hat Kontexteinstellung", "ExperimentRun", "ContextSetting"),
    _obj("resultOfRun", "result of run", "Ergebnis des Laufs", "MetricResult", "ExperimentRun"),
    _obj("aboutModel", "about model", "über Modell", "MetricResult", "Model"),
)

_DATATYPE_PROPERTIES = (
    _dt("hasText", "has text", "hat Text", "Question", RDF_LANGSTRING),
    _dt("isValid", "is valid", "ist gültig", "ValidationResult", XSD_BOOLEAN),
    _dt("matchesFactual", "matches factual", "entspricht Faktum", "ValidationResult", XSD_BOOLEAN),
    _dt("matchesContext", "matches context", "entspricht Kontext", "ValidationResult", XSD_BOOLEAN),
    _dt("hasLeakage", "has leakage", "hat Leckage", "ValidationResult", XSD_BOOLEAN),
    _dt("abstained", "abstained", "enthielt sich", "ValidationResult", XSD_BOOLEAN),
    _dt("isErrorTrial", "is error trial", "ist Fehlversuch", "Answer", XSD_BOOLEAN),
    _dt("hasErrorMessage", "has error message", "hat Fehlermeldung", "Answer", XSD_STRING),
    _dt("hasLatencyMs", "has latency (ms)", "hat Latenz (ms)", "Answer", XSD_INTEGER),
    _dt("hasRunId", "has run id", "hat Lauf-Id", "ExperimentRun", XSD_STRING),
    _dt("hasAdapterName", "has adapter name", "hat Adaptername", "Answer", XSD_STRING),
    _dt("hasConditionKind", "has condition kind", "hat Bedingungsart", "ContextSetting", XSD_STRING),
    _dt("hasModelName", "has model name", "hat Modellname", "Model", XSD_STRING),
    _dt("hasQuestionId", "has question id", "hat Fragen-Id", "Question", XSD_STRING),
    _dt("hasMaterialId", "has material id", "hat Material-Id", "Material", XSD_STRING),
    _dt("hasTitle", "has title", "hat Titel", "Material", RDF_LANGSTRING),
    _dt("hasBody", "has body", "hat Inhalt", "Material", RDF_LANGSTRING),
    _dt("hasLanguageTag", "has language tag", "hat Sprachkennung", "LanguageProfile", XSD_STRING),
    _dt("hasJudgmentMethod", "has judgment method", "hat Beurteilungsmethode", "ValidationResult", XSD_STRING),
    _dt("hasValidityPolicy", "has validity policy", "hat Gültigkeitsrichtlinie", "ValidationResult", XSD_STRING),
    _dt("hasRationale", "has rationale", "hat Begründung", "ValidationResult", XSD_STRING),
    _dt("hasMetricName", "has metric name", "hat Metrikname", "MetricResult", XSD_STRING),
    _dt("hasMetricValue", "has metric value", "hat Metrikwert", "MetricResult", XSD_DECIMAL),
    _dt("hasCount", "has count", "hat Anzahl", "MetricResult", XSD_INTEGER),
    _dt("hasTotal", "has total", "hat Gesamtzahl", "MetricResult", XSD_INTEGER),
    _dt("hasPromptSystemText", "has prompt system text", "hat System-Prompttext", "PromptRecord", RDF_LANGSTRING),
    _dt("hasPromptUserText", "has prompt user text", "hat Nutzer-Prompttext", "PromptRecord", RDF_LANGSTRING),
    _dt("hasTemperature", "has temperature", "hat Temperatur", "Answer", XSD_DECIMAL),
    _dt("hasFingerprint", "has fingerprint", "hat Fingerabdruck", "Answer", XSD_STRING),
    _dt("recordedAt", "recorded at", "aufgezeichnet am", "Answer", XSD_DATETIME),
    _dt("hasStudyId", "has study id", "hat Studien-Id", "Study", XSD_STRING),
    _dt("hasBaseIri", "has base IRI", "hat Basis-IRI", "Study", XSD_ANYURI),
    _dt("hasResponseRaw", "has raw response", "hat Rohantwort", "Answer", XSD_STRING),
    _dt("hasSource", "has source", "hat Quelle", "Material", XSD_ANYURI),
    _dt("hasClaimText", "has claim text", "hat Behauptungstext", "ContextSetting", RDF_LANGSTRING),
    _dt("hasFactualAnswer", "has factual answer", "hat faktische Antwort", "Question", RDF_LANGSTRING),
)

_REGISTRY = VocabRegistry(terms=_CLASSES + _OBJECT_PROPERTIES + _DATATYPE_PROPERTIES)
_BY_LOCAL = _REGISTRY.by_local()


def builtin_registry() -> VocabRegistry:
    """The fixed shipped registry: 14 classes, 57 properties."""
    return _REGISTRY


def term(name: str) -> Iri:
    """IRI of a registered local name in the sqare namespace."""
    try:
        return _BY_LOCAL[name].iri
    except KeyError:
        raise UnknownTermError(name) from None


ONTOLOGY_IRI = Iri("http://purl.org/sqare")

_RDFS_LABEL = Iri(RDFS_NS + "label")
_RDFS_COMMENT = Iri(RDFS_NS + "comment")
_RDFS_DOMAIN = Iri(RDFS_NS + "domain")
_RDFS_RANGE = Iri(RDFS_NS + "range")
_OWL_CLASS = Iri(OWL_NS + "Class")
_OWL_ONTOLOGY = Iri(OWL_NS + "Ontology")
_OWL_OBJECT_PROPERTY = Iri(OWL_NS + "ObjectProperty")
_OWL_DATATYPE_PROPERTY = Iri(OWL_NS + "DatatypeProperty")

_KIND_TO_TYPE = {
    CLASS: _OWL_CLASS,
    OBJECT_PROPERTY: _OWL_OBJECT_PROPERTY,
    DATATYPE_PROPERTY: _OWL_DATATYPE_PROPERTY,
}


def emit_tbox(registry: VocabRegistry) -> Graph:
    """Materialize the registry as an OWL T-Box graph with header metadata."""
    g = Graph()
    g.add(ONTOLOGY_IRI, RDF_TYPE, _OWL_ONTOLOGY)
    g.add(ONTOLOGY_IRI, Iri(DCTERMS_NS + "title"), Literal("LLM evaluation vocabulary", lang="en"))
    g.add(ONTOLOGY_IRI, Iri(DCTERMS_NS + "creator"), Literal("sqare toolkit"))
    g.add(ONTOLOGY_IRI, Iri(DCTERMS_NS + "created"), Literal("2025-01-01", datatype=XSD_DATE))
    g.add(ONTOLOGY_IRI, Iri(DCTERMS_NS + "license"),
          Iri("https://creativecommons.org/licenses/by/4.0/"))
    for t in registry.terms:
        g.add(t.iri, RDF_TYPE, _KIND_TO_TYPE[t.kind])
        g.add(t.iri, _RDFS_LABEL, Literal(t.label_en, lang="en"))
        g.add(t.iri, _RDFS_LABEL, Literal(t.label_de, lang="de"))
        if t.comment_en:
            g.add(t.iri, _RDFS_COMMENT, Literal(t.comment_en, lang="en"))
        if t.comment_de:
            g.add(t.iri, _RDFS_COMMENT, Literal(t.comment_de, lang="de"))
        if t.domain is not None:
            g.add(t.iri, _RDFS_DOMAIN, t.domain)
        if t.range is not None:
            g.add(t.iri, _RDFS_RANGE, t.range)
    return g
