import pytest

from sqare import analysis, fixture, harness, judge, studydef
from sqare.rdf import Graph

FIXED_CLOCK = "2025-06-02T12:00:00Z"


@pytest.fixture(scope="session")
def study():
    return studydef.load_study(fixture.STUDY_PATH)


@pytest.fixture(scope="session")
def cassette():
    return harness.Cassette.load(fixture.CASSETTE_PATH)


def run_replay(study, cassette, parallelism=1):
    adapters = [
        harness.replay_mode(fixture.MODEL_A, cassette),
        harness.replay_mode(fixture.MODEL_B, cassette),
    ]
    graph = Graph()
    records = harness.run_experiment(
        study, adapters, graph, parallelism=parallelism, clock=lambda: FIXED_CLOCK
    )
    return records, graph


def judge_all(graph, study, policy=judge.ValidityPolicy.FACTUAL):
    for row in analysis.answer_rows(graph):
        record = harness.TrialRecord(
            key=studydef.TrialKey(row.question_id, row.model, row.language, row.condition),
            response_text=_answer_text(graph, row),
            latency_ms=0,
            timestamp=FIXED_CLOCK,
            adapter_name=row.model,
            run_id="r1",
        )
        judgment = judge.auto_judge(record, study.question(row.question_id), policy, row.answer)
        judge.materialize_judgment(graph, judgment)


def _answer_text(graph, row):
    from sqare import vocab
    from sqare.rdf import Literal

    term = graph.value(row.answer, vocab.term("hasText"))
    return term.lexical if isinstance(term, Literal) else ""


@pytest.fixture(scope="session")
def run_graph(study, cassette):
    _, graph = run_replay(study, cassette)
    return graph


@pytest.fixture(scope="session")
def judged_graph(study, cassette):
    _, graph = run_replay(study, cassette)
    judge_all(graph, study)
    return graph
