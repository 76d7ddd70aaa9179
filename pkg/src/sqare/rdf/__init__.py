from .model import (
    DCTERMS_NS,
    OWL_NS,
    PROV_NS,
    RDF_LANGSTRING,
    RDF_NS,
    RDF_TYPE,
    RDFS_NS,
    SHACL_NS,
    SQARE_NS,
    XSD_ANYURI,
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DATETIME,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_NS,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Term,
    TermError,
    Triple,
    boolean,
    integer,
    text,
)
from .store import Graph, TriplePattern
from .ntriples import NTriplesParseError, parse_ntriples, write_ntriples
from .turtle import TurtleParseError, UnsupportedConstructError, parse_turtle, write_turtle
from .iso import IsomorphismBoundError, isomorphic

__all__ = [
    "BlankNode",
    "Graph",
    "Iri",
    "IsomorphismBoundError",
    "Literal",
    "NTriplesParseError",
    "Term",
    "TermError",
    "Triple",
    "TriplePattern",
    "TurtleParseError",
    "UnsupportedConstructError",
    "boolean",
    "integer",
    "isomorphic",
    "parse_ntriples",
    "parse_turtle",
    "text",
    "write_ntriples",
    "write_turtle",
    "RDF_NS",
    "RDFS_NS",
    "OWL_NS",
    "XSD_NS",
    "SHACL_NS",
    "PROV_NS",
    "DCTERMS_NS",
    "SQARE_NS",
    "RDF_TYPE",
    "RDF_LANGSTRING",
    "XSD_STRING",
    "XSD_BOOLEAN",
    "XSD_INTEGER",
    "XSD_DECIMAL",
    "XSD_DATE",
    "XSD_DATETIME",
    "XSD_ANYURI",
]
