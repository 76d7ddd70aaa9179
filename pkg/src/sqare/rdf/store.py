"""Indexed in-memory triple store with triple-pattern matching.

Set semantics throughout: inserting a duplicate triple is a no-op.
Pattern matching returns triples in a deterministic order (sorted by
their N-Triples rendering), so every downstream report is reproducible.

Concurrency contract: single writer, multiple readers. Mutation needs
exclusive access; concurrent reads of an unchanging graph are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Set

from .model import Iri, Subject, Term, Triple


@dataclass(frozen=True)
class TriplePattern:
    """A triple with any position left as None (wildcard)."""

    subject: Optional[Subject] = None
    predicate: Optional[Iri] = None
    object: Optional[Term] = None


class Graph:
    def __init__(self, triples: Iterable[Triple] = ()) -> None:
        self._triples: Set[Triple] = set()
        self._by_subject: Dict[Subject, Set[Triple]] = {}
        self._by_predicate: Dict[Iri, Set[Triple]] = {}
        self._by_object: Dict[Term, Set[Triple]] = {}
        for t in triples:
            self.insert(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def triples(self) -> Set[Triple]:
        return set(self._triples)

    def insert(self, triple: Triple) -> None:
        if triple in self._triples:
            return
        self._triples.add(triple)
        self._by_subject.setdefault(triple.subject, set()).add(triple)
        self._by_predicate.setdefault(triple.predicate, set()).add(triple)
        self._by_object.setdefault(triple.object, set()).add(triple)

    def add(self, subject: Subject, predicate: Iri, obj: Term) -> None:
        self.insert(Triple(subject, predicate, obj))

    def remove(self, triple: Triple) -> None:
        if triple not in self._triples:
            return
        self._triples.discard(triple)
        for index, key in (
            (self._by_subject, triple.subject),
            (self._by_predicate, triple.predicate),
            (self._by_object, triple.object),
        ):
            bucket = index[key]
            bucket.discard(triple)
            if not bucket:
                del index[key]

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.insert(t)

    def match(self, pattern: TriplePattern) -> List[Triple]:
        """All triples unifying with the pattern, deterministically ordered."""
        candidates: Iterable[Triple]
        if pattern.subject is not None:
            candidates = self._by_subject.get(pattern.subject, set())
        elif pattern.predicate is not None:
            candidates = self._by_predicate.get(pattern.predicate, set())
        elif pattern.object is not None:
            candidates = self._by_object.get(pattern.object, set())
        else:
            candidates = self._triples
        hits = [
            t
            for t in candidates
            if (pattern.subject is None or t.subject == pattern.subject)
            and (pattern.predicate is None or t.predicate == pattern.predicate)
            and (pattern.object is None or t.object == pattern.object)
        ]
        hits.sort(key=lambda t: (t.subject.n3(), t.predicate.n3(), t.object.n3()))
        return hits

    # Convenience lookups used by the analysis query plans.

    def objects(self, subject: Subject, predicate: Iri) -> List[Term]:
        return [t.object for t in self.match(TriplePattern(subject, predicate, None))]

    def subjects(self, predicate: Iri, obj: Term) -> List[Subject]:
        return [t.subject for t in self.match(TriplePattern(None, predicate, obj))]

    def value(self, subject: Subject, predicate: Iri) -> Optional[Term]:
        objs = self.objects(subject, predicate)
        return objs[0] if objs else None

    def copy(self) -> "Graph":
        return Graph(self._triples)
