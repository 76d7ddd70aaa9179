"""Graph isomorphism under blank-node relabeling.

Ground triples (no blank nodes) must be set-equal; blank nodes are then
matched by backtracking search for a bijection, bounded at 64 combined
blank nodes.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from .model import BlankNode, Term, Triple
from .store import Graph

BLANK_NODE_BOUND = 64


class IsomorphismBoundError(ValueError):
    pass


def _split(graph: Graph) -> Tuple[Set[Triple], List[Triple], List[BlankNode]]:
    ground: Set[Triple] = set()
    blanked: List[Triple] = []
    nodes: Set[BlankNode] = set()
    for t in graph:
        has_blank = False
        for term in (t.subject, t.object):
            if isinstance(term, BlankNode):
                nodes.add(term)
                has_blank = True
        if has_blank:
            blanked.append(t)
        else:
            ground.add(t)
    return ground, blanked, sorted(nodes)


def _signature(node: BlankNode, triples: List[Triple]) -> Tuple:
    # Blank-node-independent local profile used to prune the search.
    out_preds = sorted(t.predicate.value for t in triples if t.subject == node)
    in_preds = sorted(t.predicate.value for t in triples if t.object == node)
    return (tuple(out_preds), tuple(in_preds))


def _apply(t: Triple, mapping: Dict[BlankNode, BlankNode]) -> Triple:
    subject = mapping.get(t.subject, t.subject) if isinstance(t.subject, BlankNode) else t.subject
    obj = mapping.get(t.object, t.object) if isinstance(t.object, BlankNode) else t.object
    return Triple(subject, t.predicate, obj)


def isomorphic(g1: Graph, g2: Graph) -> bool:
    ground1, blanked1, nodes1 = _split(g1)
    ground2, blanked2, nodes2 = _split(g2)
    if len(nodes1) + len(nodes2) > BLANK_NODE_BOUND:
        raise IsomorphismBoundError(
            f"combined blank-node count {len(nodes1) + len(nodes2)} exceeds {BLANK_NODE_BOUND}"
        )
    if ground1 != ground2 or len(blanked1) != len(blanked2) or len(nodes1) != len(nodes2):
        return False
    if not nodes1:
        return True

    target = set(blanked2)
    sig1 = {n: _signature(n, blanked1) for n in nodes1}
    sig2 = {n: _signature(n, blanked2) for n in nodes2}
    candidates = {n: [m for m in nodes2 if sig2[m] == sig1[n]] for n in nodes1}
    if any(not c for c in candidates.values()):
        return False

    order = sorted(nodes1, key=lambda n: len(candidates[n]))

    def search(i: int, mapping: Dict[BlankNode, BlankNode], used: Set[BlankNode]) -> bool:
        if i == len(order):
            return {_apply(t, mapping) for t in blanked1} == target
        node = order[i]
        for cand in candidates[node]:
            if cand in used:
                continue
            mapping[node] = cand
            used.add(cand)
            # prune: triples fully mapped so far must exist in the target
            ok = True
            for t in blanked1:
                terms = [x for x in (t.subject, t.object) if isinstance(x, BlankNode)]
                if all(x in mapping for x in terms):
                    if _apply(t, mapping) not in target:
                        ok = False
                        break
            if ok and search(i + 1, mapping, used):
                return True
            del mapping[node]
            used.discard(cand)
        return False

    return search(0, {}, set())
