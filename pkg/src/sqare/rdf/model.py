"""RDF term and triple model.

Terms are immutable; literals carry either a datatype IRI or a BCP47
language tag (in which case the datatype is rdf:langString). Language
tags are normalized to lowercase on construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
SHACL_NS = "http://www.w3.org/ns/shacl#"
PROV_NS = "http://www.w3.org/ns/prov#"
DCTERMS_NS = "http://purl.org/dc/terms/"
SQARE_NS = "http://purl.org/sqare#"

RDF_LANGSTRING = RDF_NS + "langString"
XSD_STRING = XSD_NS + "string"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_DATE = XSD_NS + "date"
XSD_DATETIME = XSD_NS + "dateTime"
XSD_ANYURI = XSD_NS + "anyURI"

_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_LANG_TAG = re.compile(r"^[a-zA-Z]{1,8}(-[a-zA-Z0-9]{1,8})*$")
_BNODE_ID = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$")


class TermError(ValueError):
    """Raised for malformed RDF terms."""


@dataclass(frozen=True, order=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if ":" not in self.value:
            raise TermError(f"IRI is not absolute: {self.value!r}")
        if _IRI_FORBIDDEN.search(self.value):
            raise TermError(f"IRI contains forbidden character: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, order=True)
class BlankNode:
    id: str

    def __post_init__(self) -> None:
        if not _BNODE_ID.match(self.id):
            raise TermError(f"invalid blank node id: {self.id!r}")

    def n3(self) -> str:
        return f"_:{self.id}"


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    lang: Optional[str] = None

    def __post_init__(self) -> None:
        if self.lang is not None:
            if not _LANG_TAG.match(self.lang):
                raise TermError(f"invalid language tag: {self.lang!r}")
            object.__setattr__(self, "lang", self.lang.lower())
            object.__setattr__(self, "datatype", RDF_LANGSTRING)
        elif self.datatype == RDF_LANGSTRING:
            raise TermError("rdf:langString literal requires a language tag")

    def n3(self) -> str:
        body = f'"{escape_string(self.lexical)}"'
        if self.lang is not None:
            return f"{body}@{self.lang}"
        if self.datatype != XSD_STRING:
            return f"{body}^^<{self.datatype}>"
        return body


Term = Union[Iri, BlankNode, Literal]
Subject = Union[Iri, BlankNode]

_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


def escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append("\\u%04X" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def term_key(term: Term) -> str:
    """Stable sort key: the N-Triples rendering of the term."""
    return term.n3()


@dataclass(frozen=True, order=True)
class Triple:
    subject: Subject
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if isinstance(self.subject, Literal):
            raise TermError("literal subject not allowed")
        if not isinstance(self.predicate, Iri):
            raise TermError("predicate must be an IRI")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def boolean(value: bool) -> Literal:
    return Literal("true" if value else "false", datatype=XSD_BOOLEAN)


def integer(value: int) -> Literal:
    return Literal(str(value), datatype=XSD_INTEGER)


def text(value: str, lang: str) -> Literal:
    return Literal(value, lang=lang)


RDF_TYPE = Iri(RDF_NS + "type")
