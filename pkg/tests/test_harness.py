import socket

import pytest

from sqare import harness, shapes, vocab
from sqare.harness import Cassette, TrialRecord
from sqare.rdf import Graph, Literal
from sqare.studydef import ConditionKind, TrialKey

from conftest import FIXED_CLOCK, judge_all, run_replay


class FailingAdapter:
    name = "always-fails"

    def invoke(self, prompt, key):
        raise RuntimeError("boom")


class ScriptedAdapter:
    def __init__(self, name, text="ok"):
        self.name = name
        self.text = text
        self.calls = 0

    def invoke(self, prompt, key):
        self.calls += 1
        return harness.ModelResponse(text=self.text, latency_ms=5)


class TestReplay:
    def test_full_replay_produces_448_records(self, study, cassette):
        records, _ = run_replay(study, cassette)
        assert len(records) == 448
        assert sum(r.is_error for r in records) == 0

    def test_parallelism_does_not_change_output(self, study, cassette):
        serial, g1 = run_replay(study, cassette, parallelism=1)
        parallel, g8 = run_replay(study, cassette, parallelism=8)
        assert serial == parallel
        assert g1 == g8

    def test_replay_offline(self, study, cassette, monkeypatch):
        def no_network(*args, **kwargs):
            raise AssertionError("network access during replay")

        monkeypatch.setattr(socket.socket, "connect", no_network)
        records, _ = run_replay(study, cassette)
        assert len(records) == 448

    def test_replay_miss_names_trial(self, study, cassette):
        trimmed = Cassette(dict(cassette.records))
        victim_fp = next(
            fp for fp, r in cassette.records.items() if r.question == "q03" and r.lang == "en"
        )
        del trimmed.records[victim_fp]
        records, _ = run_replay(study, trimmed)
        errors = [r for r in records if r.is_error]
        assert len(errors) == 1
        assert "q03" in errors[0].error

    def test_record_then_replay_identical(self, study):
        cassette = Cassette()
        live = ScriptedAdapter("scripted", text="The required procedure is FACT-q01.")
        recording = harness.record_mode(live, cassette)
        g = Graph()
        first = harness.run_experiment(
            study, [recording], g, conditions=[ConditionKind.COMPLETE],
            languages=["en"], clock=lambda: FIXED_CLOCK,
        )
        replayed = harness.run_experiment(
            study, [harness.replay_mode("scripted", cassette)], Graph(),
            conditions=[ConditionKind.COMPLETE], languages=["en"], clock=lambda: FIXED_CLOCK,
        )
        assert [r.response_text for r in first] == [r.response_text for r in replayed]


class TestRunExperiment:
    def test_failing_adapter_yields_error_records(self, study):
        g = Graph()
        records = harness.run_experiment(
            study, [FailingAdapter()], g, conditions=[ConditionKind.NO_CONTEXT],
            languages=["de"], clock=lambda: FIXED_CLOCK, retry_base_s=0.0,
        )
        assert len(records) == 28
        assert all(r.is_error for r in records)
        error_flags = g.subjects(vocab.term("isErrorTrial"), Literal("true", datatype="http://www.w3.org/2001/XMLSchema#boolean"))
        assert len(error_flags) == 28

    def test_retries_then_gives_up(self, study):
        class CountingFailure:
            name = "counting"
            calls = 0

            def invoke(self, prompt, key):
                CountingFailure.calls += 1
                raise RuntimeError("nope")

        harness.run_experiment(
            study, [CountingFailure()], Graph(), conditions=[ConditionKind.COMPLETE],
            languages=["en"], clock=lambda: FIXED_CLOCK, retry_base_s=0.0, max_retries=2,
        )
        assert CountingFailure.calls == 28 * 3

    def test_parallelism_validation(self, study, cassette):
        with pytest.raises(ValueError):
            harness.run_experiment(study, [FailingAdapter()], Graph(), parallelism=0)

    def test_empty_adapters_rejected(self, study):
        with pytest.raises(ValueError):
            harness.run_experiment(study, [], Graph())


class TestMaterialization:
    def _record(self, study, condition=ConditionKind.CONFLICTING):
        return TrialRecord(
            key=TrialKey("q01", "gemini-2.0-flash", "de", condition),
            response_text="Die Antwort.",
            latency_ms=12,
            timestamp=FIXED_CLOCK,
            adapter_name="gemini-2.0-flash",
            run_id="r1",
        )

    def test_answer_iri_template(self, study):
        g = Graph()
        harness.materialize_study(g, study)
        iri = harness.materialize_answer(g, study, self._record(study))
        assert iri.value.endswith("/answer/q01/gemini-2-0-flash/de/conflicting/r1")

    def test_text_language_tagged(self, study):
        g = Graph()
        harness.materialize_study(g, study)
        iri = harness.materialize_answer(g, study, self._record(study))
        text = g.value(iri, vocab.term("hasText"))
        assert text.lang == "de"

    def test_no_context_has_no_materials(self, study):
        g = Graph()
        harness.materialize_study(g, study)
        iri = harness.materialize_answer(g, study, self._record(study, ConditionKind.NO_CONTEXT))
        assert g.objects(iri, vocab.term("hasUsedMaterial")) == []

    def test_context_conditions_link_materials(self, study):
        g = Graph()
        harness.materialize_study(g, study)
        iri = harness.materialize_answer(g, study, self._record(study))
        assert len(g.objects(iri, vocab.term("hasUsedMaterial"))) == 1

    def test_unknown_question_rejected(self, study):
        g = Graph()
        record = TrialRecord(
            key=TrialKey("q99", "m", "de", ConditionKind.COMPLETE),
            response_text="x", latency_ms=0, timestamp=FIXED_CLOCK,
            adapter_name="m", run_id="r1",
        )
        with pytest.raises(Exception):
            harness.materialize_answer(g, study, record)

    def test_fixture_run_passes_shapes_after_judging(self, study, cassette):
        _, g = run_replay(study, cassette)
        judge_all(g, study)
        assert shapes.validate(g, shapes.builtin_shapes()) == []


class TestCassetteFile:
    def test_round_trip(self, tmp_path, cassette):
        path = tmp_path / "c.jsonl"
        cassette.save(path)
        loaded = Cassette.load(path)
        assert loaded.records.keys() == cassette.records.keys()
        sample = next(iter(cassette.records))
        assert loaded.records[sample].response == cassette.records[sample].response

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"cassette_version": 99, "fp_algo": "sha256/v1"}\n', encoding="utf-8")
        with pytest.raises(harness.HarnessError):
            Cassette.load(path)

    def test_fingerprint_stable(self):
        fp1 = harness.fingerprint("m", "de", ConditionKind.COMPLETE, "q01", "prompt")
        fp2 = harness.fingerprint("m", "de", ConditionKind.COMPLETE, "q01", "prompt")
        assert fp1 == fp2
        assert len(fp1) == 64

    def test_fingerprint_sensitive_to_prompt(self):
        fp1 = harness.fingerprint("m", "de", ConditionKind.COMPLETE, "q01", "prompt A")
        fp2 = harness.fingerprint("m", "de", ConditionKind.COMPLETE, "q01", "prompt B")
        assert fp1 != fp2


class TestVocabularyClosure:
    def test_emitted_properties_registered(self, study, cassette):
        # every sqare-namespace predicate in the run graph is in the registry
        _, g = run_replay(study, cassette)
        judge_all(g, study)
        registered = {t.iri for t in vocab.builtin_registry().properties()}
        ns = "http://purl.org/sqare#"
        used = {t.predicate for t in g if t.predicate.value.startswith(ns)}
        assert used <= registered
