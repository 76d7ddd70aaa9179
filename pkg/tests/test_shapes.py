import pytest

from sqare import shapes, vocab
from sqare.rdf import Graph, Iri, Literal, Triple, TriplePattern


def _first_answer(graph):
    return graph.subjects(
        Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), vocab.term("Answer")
    )[0]


def test_builtin_shapes_deterministic():
    assert shapes.builtin_shapes() == shapes.builtin_shapes()


def test_answer_shape_requires_one_question_link():
    answer_shape = shapes.builtin_shapes()[0]
    cards = [
        c
        for c in answer_shape.constraints
        if isinstance(c, shapes.Cardinality) and c.prop == vocab.term("hasGivenFor")
    ]
    assert cards == [shapes.Cardinality(vocab.term("hasGivenFor"), 1, 1)]


def test_validation_shape_has_boolean_datatypes():
    validation_shape = shapes.builtin_shapes()[2]
    datatypes = {
        (c.prop, c.datatype) for c in validation_shape.constraints if isinstance(c, shapes.Datatype)
    }
    assert (vocab.term("isValid"), "http://www.w3.org/2001/XMLSchema#boolean") in datatypes


def test_empty_graph_clean():
    assert shapes.validate(Graph(), shapes.builtin_shapes()) == []


def test_fixture_graph_clean(judged_graph):
    assert shapes.validate(judged_graph, shapes.builtin_shapes()) == []


def test_validate_pure(judged_graph):
    first = shapes.validate(judged_graph, shapes.builtin_shapes())
    second = shapes.validate(judged_graph, shapes.builtin_shapes())
    assert first == second


def _flip_language_tag(graph):
    g = graph.copy()
    answer = _first_answer(g)
    old = g.match(TriplePattern(answer, vocab.term("hasText"), None))[0]
    flipped = "en" if old.object.lang == "de" else "de"
    g.remove(old)
    g.add(answer, vocab.term("hasText"), Literal(old.object.lexical, lang=flipped))
    return g


class TestSeededFaults:
    def test_language_flip_yields_one_violation(self, judged_graph):
        g = _flip_language_tag(judged_graph)
        violations = shapes.validate(g, shapes.builtin_shapes())
        assert len(violations) == 1
        assert "language tag" in violations[0].message

    def test_missing_has_given_for(self, judged_graph):
        g = judged_graph.copy()
        answer = _first_answer(g)
        g.remove(g.match(TriplePattern(answer, vocab.term("hasGivenFor"), None))[0])
        violations = shapes.validate(g, shapes.builtin_shapes())
        assert len(violations) == 1
        assert "hasGivenFor" in violations[0].message

    def test_duplicate_validation_result(self, judged_graph):
        g = judged_graph.copy()
        answer = _first_answer(g)
        g.add(answer, vocab.term("hasValidationResult"), Iri("urn:extra:validation"))
        violations = shapes.validate(g, shapes.builtin_shapes())
        # duplicate breaks both the cardinality and the object-class constraint
        messages = {v.message for v in violations}
        assert any("hasValidationResult" in m and "cardinality" in m for m in messages)

    def test_material_under_no_context(self, judged_graph):
        g = judged_graph.copy()
        no_context_answers = [
            a
            for a in g.subjects(
                Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), vocab.term("Answer")
            )
            if "no_context" in a.value
        ]
        g.add(no_context_answers[0], vocab.term("hasUsedMaterial"), Iri("urn:extra:material"))
        violations = shapes.validate(g, shapes.builtin_shapes())
        assert len(violations) == 1
        assert "hasUsedMaterial" in violations[0].message

    def test_non_boolean_is_valid(self, judged_graph):
        g = judged_graph.copy()
        answer = _first_answer(g)
        validation = g.value(answer, vocab.term("hasValidationResult"))
        old = g.match(TriplePattern(validation, vocab.term("isValid"), None))[0]
        g.remove(old)
        g.add(validation, vocab.term("isValid"), Literal("yes"))
        violations = shapes.validate(g, shapes.builtin_shapes())
        assert len(violations) == 1
        assert "isValid" in violations[0].message

    def test_dangling_question_link(self, judged_graph):
        g = judged_graph.copy()
        answer = _first_answer(g)
        old = g.match(TriplePattern(answer, vocab.term("hasGivenFor"), None))[0]
        g.remove(old)
        g.add(answer, vocab.term("hasGivenFor"), Iri("urn:no:such:question"))
        violations = shapes.validate(g, shapes.builtin_shapes())
        assert len(violations) == 1
        assert "class" in violations[0].message


def test_monotone_in_faults(judged_graph):
    g = judged_graph.copy()
    baseline = len(shapes.validate(g, shapes.builtin_shapes()))
    answer = _first_answer(g)
    g.add(answer, vocab.term("hasValidationResult"), Iri("urn:extra:v1"))
    first = len(shapes.validate(g, shapes.builtin_shapes()))
    g.add(answer, vocab.term("hasText"), Literal("extra", lang="fr"))
    second = len(shapes.validate(g, shapes.builtin_shapes()))
    assert baseline <= first <= second


def test_violations_sorted(judged_graph):
    g = judged_graph.copy()
    answers = g.subjects(
        Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), vocab.term("Answer")
    )
    for answer in answers[:5]:
        g.remove(g.match(TriplePattern(answer, vocab.term("hasGivenFor"), None))[0])
    violations = shapes.validate(g, shapes.builtin_shapes())
    assert violations == sorted(violations, key=lambda v: (v.shape_id, v.focus, v.message))


def test_every_answer_resolves_to_question(judged_graph):
    answers = judged_graph.subjects(
        Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), vocab.term("Answer")
    )
    for answer in answers:
        questions = judged_graph.objects(answer, vocab.term("hasGivenFor"))
        assert len(questions) == 1
        assert Triple(
            questions[0],
            Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"),
            vocab.term("Question"),
        ) in judged_graph


def test_export_shacl_renders_node_shapes():
    g = shapes.export_shacl(shapes.builtin_shapes())
    node_shapes = g.subjects(
        Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"),
        Iri("http://www.w3.org/ns/shacl#NodeShape"),
    )
    assert len(node_shapes) == 3
