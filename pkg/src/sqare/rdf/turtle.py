"""Turtle reader and writer for a documented subset of the grammar.

Supported when parsing: @prefix directives, prefixed names, the `a`
keyword, `;` predicate lists, `,` object lists, language tags, typed
literals, bare integers and booleans, blank node labels, and `[]`
anonymous blank nodes (non-nested). Anything else raises
UnsupportedConstructError naming the construct.

The writer groups statements by subject, uses the supplied prefix map,
and sorts everything, so output is deterministic. parse(write(g)) == g
for every graph this toolkit emits (blank-node free output).
"""

from __future__ import annotations

import itertools
import re
from typing import Dict, List, Optional, Tuple

from .model import (
    RDF_LANGSTRING,
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Subject,
    Term,
    Triple,
    escape_string,
)
from .ntriples import unescape_string
from .store import Graph


class TurtleParseError(ValueError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnsupportedConstructError(TurtleParseError):
    def __init__(self, construct: str, line: int, col: int) -> None:
        super().__init__(f"unsupported Turtle construct: {construct}", line, col)
        self.construct = construct


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+|\#[^\n]*)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<prefix_directive>@prefix\b)
    | (?P<langtag>@[a-zA-Z]{1,8}(?:-[a-zA-Z0-9]{1,8})*)
    | (?P<dtype>\^\^)
    | (?P<bnode_label>_:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)
    | (?P<pname>[A-Za-z][A-Za-z0-9_-]*)?:(?P<local>[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?
    | (?P<boolean>\btrue\b|\bfalse\b)
    | (?P<number>[+-]?\d+(?:\.\d+)?)
    | (?P<kw_a>\ba\b)
    | (?P<punct>[;,.\[\]()])
    | (?P<other>\S)
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind: str, value: str, line: int, col: int) -> None:
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TurtleParseError("cannot tokenize", line, pos - line_start + 1)
        kind = m.lastgroup or "other"
        value = m.group(0)
        col = pos - line_start + 1
        # the pname alternative can surface as "pname", "local", or a bare ':'
        if kind in ("pname", "local") or (kind == "other" and value == ":"):
            kind = "pname"
        if kind != "ws":
            tokens.append(_Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _TurtleParser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.idx = 0
        self.prefixes: Dict[str, str] = {}
        self.graph = Graph()
        self._bnode_counter = itertools.count()

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def next(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def fail(self, message: str, tok: Optional[_Token] = None) -> TurtleParseError:
        tok = tok or self.peek()
        return TurtleParseError(message, tok.line, tok.col)

    def parse(self) -> Graph:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "prefix_directive":
                self._parse_prefix()
            else:
                self._parse_statement()
        return self.graph

    def _parse_prefix(self) -> None:
        self.next()  # @prefix
        name_tok = self.next()
        if name_tok.kind != "pname" or not name_tok.value.endswith(":"):
            raise self.fail("expected prefix name ending in ':'", name_tok)
        prefix = name_tok.value[:-1]
        iri_tok = self.next()
        if iri_tok.kind != "iriref":
            raise self.fail("expected IRI in @prefix", iri_tok)
        self.prefixes[prefix] = unescape_string(iri_tok.value[1:-1], iri_tok.line)
        dot = self.next()
        if not (dot.kind == "punct" and dot.value == "."):
            raise self.fail("expected '.' after @prefix", dot)

    def _expand_pname(self, tok: _Token) -> Iri:
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            raise self.fail(f"undeclared prefix {prefix!r}:", tok)
        return Iri(self.prefixes[prefix] + local)

    def _parse_statement(self) -> None:
        subject = self._parse_subject()
        self._parse_predicate_object_list(subject)
        dot = self.next()
        if not (dot.kind == "punct" and dot.value == "."):
            raise self.fail("expected '.' at end of statement", dot)

    def _parse_subject(self) -> Subject:
        tok = self.next()
        if tok.kind == "iriref":
            return Iri(unescape_string(tok.value[1:-1], tok.line))
        if tok.kind == "pname":
            return self._expand_pname(tok)
        if tok.kind == "bnode_label":
            return BlankNode(tok.value[2:])
        if tok.kind == "punct" and tok.value == "[":
            return self._parse_anon_bnode(depth=0)
        if tok.kind == "punct" and tok.value == "(":
            raise UnsupportedConstructError("RDF collection '(...)'", tok.line, tok.col)
        raise self.fail("expected subject", tok)

    def _parse_anon_bnode(self, depth: int) -> BlankNode:
        # '[' already consumed. Non-nested only.
        node = BlankNode(f"anon{next(self._bnode_counter)}")
        if self.peek().kind == "punct" and self.peek().value == "]":
            self.next()
            return node
        self._parse_predicate_object_list(node, in_bnode=True)
        close = self.next()
        if not (close.kind == "punct" and close.value == "]"):
            raise self.fail("expected ']'", close)
        return node

    def _parse_predicate_object_list(self, subject: Subject, in_bnode: bool = False) -> None:
        while True:
            predicate = self._parse_predicate()
            while True:
                obj = self._parse_object(in_bnode)
                self.graph.insert(Triple(subject, predicate, obj))
                if self.peek().kind == "punct" and self.peek().value == ",":
                    self.next()
                    continue
                break
            if self.peek().kind == "punct" and self.peek().value == ";":
                self.next()
                # allow trailing ';' before '.' or ']'
                nxt = self.peek()
                if nxt.kind == "punct" and nxt.value in ".]":
                    return
                continue
            return

    def _parse_predicate(self) -> Iri:
        tok = self.next()
        if tok.kind == "kw_a":
            return RDF_TYPE
        if tok.kind == "iriref":
            return Iri(unescape_string(tok.value[1:-1], tok.line))
        if tok.kind == "pname":
            return self._expand_pname(tok)
        raise self.fail("expected predicate", tok)

    def _parse_object(self, in_bnode: bool) -> Term:
        tok = self.next()
        if tok.kind == "iriref":
            return Iri(unescape_string(tok.value[1:-1], tok.line))
        if tok.kind == "pname":
            return self._expand_pname(tok)
        if tok.kind == "bnode_label":
            return BlankNode(tok.value[2:])
        if tok.kind == "string":
            return self._finish_literal(tok)
        if tok.kind == "boolean":
            return Literal(tok.value, datatype=XSD_BOOLEAN)
        if tok.kind == "number":
            dt = XSD_DECIMAL if "." in tok.value else XSD_INTEGER
            return Literal(tok.value, datatype=dt)
        if tok.kind == "punct" and tok.value == "[":
            if in_bnode:
                raise UnsupportedConstructError(
                    "nested anonymous blank node '[...]'", tok.line, tok.col
                )
            return self._parse_anon_bnode(depth=1)
        if tok.kind == "punct" and tok.value == "(":
            raise UnsupportedConstructError("RDF collection '(...)'", tok.line, tok.col)
        raise self.fail("expected object", tok)

    def _finish_literal(self, tok: _Token) -> Literal:
        lexical = unescape_string(tok.value[1:-1], tok.line)
        nxt = self.peek()
        if nxt.kind == "langtag":
            self.next()
            return Literal(lexical, lang=nxt.value[1:])
        if nxt.kind == "dtype":
            self.next()
            dt_tok = self.next()
            if dt_tok.kind == "iriref":
                dt = unescape_string(dt_tok.value[1:-1], dt_tok.line)
            elif dt_tok.kind == "pname":
                dt = self._expand_pname(dt_tok).value
            else:
                raise self.fail("expected datatype IRI", dt_tok)
            if dt == RDF_LANGSTRING:
                raise self.fail("rdf:langString requires a language tag", dt_tok)
            return Literal(lexical, datatype=dt)
        return Literal(lexical, datatype=XSD_STRING)


def parse_turtle(text: str) -> Graph:
    return _TurtleParser(text).parse()


def _shrink(iri: Iri, prefixes: Dict[str, str]) -> Optional[str]:
    for prefix, ns in prefixes.items():
        if iri.value.startswith(ns):
            local = iri.value[len(ns) :]
            if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_.-]*", local or "") and not local.endswith("."):
                return f"{prefix}:{local}"
    return None


def _render_term(term: Term, prefixes: Dict[str, str]) -> str:
    if isinstance(term, Iri):
        short = _shrink(term, prefixes)
        return short if short is not None else term.n3()
    if isinstance(term, Literal):
        body = f'"{escape_string(term.lexical)}"'
        if term.lang is not None:
            return f"{body}@{term.lang}"
        if term.datatype == XSD_STRING:
            return body
        dt = _shrink(Iri(term.datatype), prefixes)
        return f"{body}^^{dt}" if dt else f"{body}^^<{term.datatype}>"
    return term.n3()


def write_turtle(graph: Graph, prefixes: Dict[str, str]) -> str:
    """Serialize grouped by subject with sorted, prefixed output."""
    lines: List[str] = []
    for prefix in sorted(prefixes):
        lines.append(f"@prefix {prefix}: <{prefixes[prefix]}> .")
    if prefixes:
        lines.append("")

    by_subject: Dict[Subject, List[Triple]] = {}
    for t in graph:
        by_subject.setdefault(t.subject, []).append(t)

    for subject in sorted(by_subject, key=lambda s: s.n3()):
        triples = by_subject[subject]
        by_pred: Dict[Iri, List[Term]] = {}
        for t in triples:
            by_pred.setdefault(t.predicate, []).append(t.object)

        def pred_key(p: Iri) -> Tuple[int, str]:
            return (0 if p == RDF_TYPE else 1, p.n3())

        parts: List[str] = []
        for pred in sorted(by_pred, key=pred_key):
            rendered_pred = "a" if pred == RDF_TYPE else _render_term(pred, prefixes)
            objs = sorted(_render_term(o, prefixes) for o in by_pred[pred])
            parts.append(f"{rendered_pred} {', '.join(objs)}")
        subj = _render_term(subject, prefixes)
        body = " ;\n    ".join(parts)
        lines.append(f"{subj} {body} .")
    return "".join(line + "\n" for line in lines)
