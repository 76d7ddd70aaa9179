"""N-Triples reader and canonical writer.

The writer emits one escaped statement per line, sorted, so output is
canonical: write(parse(write(g))) == write(g) byte for byte.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from .model import (
    RDF_LANGSTRING,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Subject,
    Term,
    Triple,
)
from .store import Graph


class NTriplesParseError(ValueError):
    def __init__(self, message: str, line: int, token: str = "") -> None:
        detail = f"line {line}: {message}"
        if token:
            detail += f" at {token!r}"
        super().__init__(detail)
        self.line = line
        self.token = token


_UCHAR = re.compile(r"\\u([0-9A-Fa-f]{4})|\\U([0-9A-Fa-f]{8})")
_STRING_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


def unescape_string(raw: str, line: int) -> str:
    out = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise NTriplesParseError("dangling escape", line, raw[i:])
        nxt = raw[i + 1]
        if nxt in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[nxt])
            i += 2
        elif nxt == "u":
            hexpart = raw[i + 2 : i + 6]
            if len(hexpart) != 4 or not re.fullmatch(r"[0-9A-Fa-f]{4}", hexpart):
                raise NTriplesParseError("bad \\u escape", line, raw[i : i + 6])
            out.append(chr(int(hexpart, 16)))
            i += 6
        elif nxt == "U":
            hexpart = raw[i + 2 : i + 10]
            if len(hexpart) != 8 or not re.fullmatch(r"[0-9A-Fa-f]{8}", hexpart):
                raise NTriplesParseError("bad \\U escape", line, raw[i : i + 10])
            out.append(chr(int(hexpart, 16)))
            i += 10
        else:
            raise NTriplesParseError("unknown escape", line, raw[i : i + 2])
    return "".join(out)


class _LineScanner:
    def __init__(self, text: str, lineno: int) -> None:
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def fail(self, message: str) -> NTriplesParseError:
        return NTriplesParseError(message, self.lineno, self.text[self.pos : self.pos + 20])

    def read_iri(self) -> Iri:
        self.skip_ws()
        if self.peek() != "<":
            raise self.fail("expected '<'")
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            raise self.fail("unterminated IRI")
        raw = self.text[self.pos + 1 : end]
        self.pos = end + 1
        return Iri(unescape_string(raw, self.lineno))

    def read_bnode(self) -> BlankNode:
        self.skip_ws()
        m = re.match(r"_:([A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)", self.text[self.pos :])
        if not m:
            raise self.fail("expected blank node label")
        self.pos += m.end()
        return BlankNode(m.group(1))

    def read_quoted(self) -> str:
        # Returns the raw (still escaped) string body.
        if self.peek() != '"':
            raise self.fail("expected '\"'")
        i = self.pos + 1
        while i < len(self.text):
            if self.text[i] == "\\":
                i += 2
                continue
            if self.text[i] == '"':
                raw = self.text[self.pos + 1 : i]
                self.pos = i + 1
                return raw
            i += 1
        raise self.fail("unterminated string literal")

    def read_literal(self) -> Literal:
        raw = self.read_quoted()
        lexical = unescape_string(raw, self.lineno)
        rest = self.text[self.pos :]
        m = re.match(r"@([a-zA-Z]{1,8}(?:-[a-zA-Z0-9]{1,8})*)", rest)
        if m:
            self.pos += m.end()
            return Literal(lexical, lang=m.group(1))
        if rest.startswith("^^"):
            self.pos += 2
            dt = self.read_iri()
            if dt.value == RDF_LANGSTRING:
                raise self.fail("rdf:langString requires a language tag")
            return Literal(lexical, datatype=dt.value)
        return Literal(lexical, datatype=XSD_STRING)

    def read_subject(self) -> Subject:
        ch = self.peek()
        if ch == "<":
            return self.read_iri()
        if ch == "_":
            return self.read_bnode()
        raise self.fail("expected IRI or blank node subject")

    def read_object(self) -> Term:
        ch = self.peek()
        if ch == "<":
            return self.read_iri()
        if ch == "_":
            return self.read_bnode()
        if ch == '"':
            return self.read_literal()
        raise self.fail("expected IRI, blank node, or literal object")

    def expect_dot(self) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ".":
            raise self.fail("expected '.'")
        self.pos += 1


def parse_ntriples(text: str) -> Graph:
    graph = Graph()
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        scanner = _LineScanner(line, lineno)
        subject = scanner.read_subject()
        predicate = scanner.read_iri()
        obj = scanner.read_object()
        scanner.expect_dot()
        if not scanner.at_end():
            raise scanner.fail("trailing content after '.'")
        graph.insert(Triple(subject, predicate, obj))
    return graph


def write_ntriples(graph: Graph) -> str:
    lines = sorted(t.n3() for t in graph)
    return "".join(line + "\n" for line in lines)
