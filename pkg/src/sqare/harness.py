"""Trial execution against pluggable model adapters, with provenance.

Adapters are either live HTTP clients (chat-completions-style request
shape), record-mode wrappers that persist every response to a cassette,
or replay adapters that answer purely from a cassette with zero network
activity. Results are materialized into the RDF graph.

Concurrency: up to `parallelism` adapter calls in flight via a thread
pool; the output list is restored to enumeration order, and graph
writes happen on the calling thread only.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Union

from . import vocab
from .rdf import (
    DCTERMS_NS,
    PROV_NS,
    RDF_TYPE,
    Graph,
    Iri,
    Literal,
    XSD_DATETIME,
    boolean,
    integer,
    text,
)
from .studydef import (
    CONDITION_ORDER,
    ConditionKind,
    PromptInput,
    Study,
    TrialKey,
    build_prompt,
    enumerate_trials,
)

GENERATED_AT = Iri(PROV_NS + "generatedAtTime")
ATTRIBUTED_TO = Iri(PROV_NS + "wasAttributedTo")
DCT_LANGUAGE = Iri(DCTERMS_NS + "language")

FINGERPRINT_ALGO = "sha256/v1"
CASSETTE_VERSION = 1


class HarnessError(RuntimeError):
    pass


class ReplayMissError(HarnessError):
    def __init__(self, key: TrialKey) -> None:
        super().__init__(
            f"cassette has no record for trial (question={key.question_id}, "
            f"model={key.model}, lang={key.language}, condition={key.condition.value})"
        )
        self.key = key


@dataclass(frozen=True)
class ModelResponse:
    text: str
    latency_ms: int
    metadata: Dict[str, str] = field(default_factory=dict)


class ModelAdapter(Protocol):
    name: str

    def invoke(self, prompt: PromptInput, key: TrialKey) -> ModelResponse: ...


@dataclass(frozen=True)
class HttpAdapterConfig:
    endpoint: str
    model: str
    auth_env: str = ""
    temperature: float = 0.0
    timeout_s: float = 60.0
    max_retries: int = 2
    retry_base_s: float = 0.5

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.timeout_s <= 0:
            raise ValueError("timeout must be > 0")


class HttpAdapter:
    """Chat-completions-style HTTP adapter: system+user in, one text out."""

    def __init__(self, config: HttpAdapterConfig) -> None:
        self.config = config
        self.name = config.model

    def invoke(self, prompt: PromptInput, key: TrialKey) -> ModelResponse:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.config.auth_env:
            token = os.environ.get(self.config.auth_env)
            if not token:
                raise HarnessError(
                    f"auth environment variable {self.config.auth_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": prompt.messages(),
        }
        start = time.monotonic()
        resp = requests.post(
            self.config.endpoint, json=payload, headers=headers, timeout=self.config.timeout_s
        )
        latency_ms = int((time.monotonic() - start) * 1000)
        resp.raise_for_status()
        body = resp.json()
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise HarnessError(f"unexpected response shape from {self.config.endpoint}") from exc
        return ModelResponse(text=content, latency_ms=latency_ms)


def fingerprint(model: str, language: str, condition: ConditionKind, question_id: str, prompt_text: str) -> str:
    payload = json.dumps(
        [model, language, condition.value, question_id, prompt_text],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class CassetteRecord:
    fp: str
    model: str
    lang: str
    condition: str
    question: str
    response: str
    latency_ms: int
    recorded_at: str


class Cassette:
    """Append-only response store keyed by request fingerprint (JSONL)."""

    def __init__(self, records: Optional[Dict[str, CassetteRecord]] = None) -> None:
        self.records: Dict[str, CassetteRecord] = records or {}

    def put(self, record: CassetteRecord) -> None:
        self.records[record.fp] = record

    def get(self, fp: str) -> Optional[CassetteRecord]:
        return self.records.get(fp)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Cassette":
        path = Path(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise HarnessError(f"cassette {path} is empty")
        header = json.loads(lines[0])
        if header.get("cassette_version") != CASSETTE_VERSION:
            raise HarnessError(f"unsupported cassette version in {path}")
        if header.get("fp_algo") != FINGERPRINT_ALGO:
            raise HarnessError(f"unsupported fingerprint algorithm in {path}")
        cassette = cls()
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            data = json.loads(line)
            cassette.put(
                CassetteRecord(
                    fp=data["fp"],
                    model=data["model"],
                    lang=data["lang"],
                    condition=data["condition"],
                    question=data["question"],
                    response=data["response"],
                    latency_ms=int(data["latency_ms"]),
                    recorded_at=data["recorded_at"],
                )
            )
        return cassette

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        lines = [json.dumps({"cassette_version": CASSETTE_VERSION, "fp_algo": FINGERPRINT_ALGO})]
        for fp in sorted(self.records):
            r = self.records[fp]
            lines.append(
                json.dumps(
                    {
                        "fp": r.fp,
                        "model": r.model,
                        "lang": r.lang,
                        "condition": r.condition,
                        "question": r.question,
                        "response": r.response,
                        "latency_ms": r.latency_ms,
                        "recorded_at": r.recorded_at,
                    },
                    ensure_ascii=False,
                )
            )
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class RecordingAdapter:
    """Wraps a live adapter, persisting every response into a cassette."""

    def __init__(self, inner: ModelAdapter, cassette: Cassette, clock: Optional[Callable[[], str]] = None) -> None:
        self.inner = inner
        self.name = inner.name
        self.cassette = cassette
        self._clock = clock or _utc_now
        self._lock = threading.Lock()

    def invoke(self, prompt: PromptInput, key: TrialKey) -> ModelResponse:
        response = self.inner.invoke(prompt, key)
        fp = fingerprint(self.name, key.language, key.condition, key.question_id, prompt.full_text())
        record = CassetteRecord(
            fp=fp,
            model=self.name,
            lang=key.language,
            condition=key.condition.value,
            question=key.question_id,
            response=response.text,
            latency_ms=response.latency_ms,
            recorded_at=self._clock(),
        )
        with self._lock:
            self.cassette.put(record)
        return response


class ReplayAdapter:
    """Answers purely from a cassette; never touches the network."""

    def __init__(self, name: str, cassette: Cassette) -> None:
        self.name = name
        self.cassette = cassette

    def invoke(self, prompt: PromptInput, key: TrialKey) -> ModelResponse:
        fp = fingerprint(self.name, key.language, key.condition, key.question_id, prompt.full_text())
        record = self.cassette.get(fp)
        if record is None:
            raise ReplayMissError(key)
        return ModelResponse(text=record.response, latency_ms=record.latency_ms)


def record_mode(adapter: ModelAdapter, cassette: Cassette) -> RecordingAdapter:
    return RecordingAdapter(adapter, cassette)


def replay_mode(name: str, cassette: Cassette) -> ReplayAdapter:
    return ReplayAdapter(name, cassette)


@dataclass(frozen=True)
class TrialRecord:
    key: TrialKey
    response_text: str
    latency_ms: int
    timestamp: str
    adapter_name: str
    run_id: str
    error: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.error is not None


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def slug(name: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")
    return out or "model"


def run_experiment(
    study: Study,
    adapters: Sequence[ModelAdapter],
    out_graph: Graph,
    conditions: Sequence[ConditionKind] = CONDITION_ORDER,
    languages: Optional[Sequence[str]] = None,
    parallelism: int = 1,
    run_id: str = "r1",
    clock: Optional[Callable[[], str]] = None,
    retry_base_s: float = 0.5,
    max_retries: int = 2,
) -> List[TrialRecord]:
    """Run every enumerated trial; results in enumeration order.

    Adapter failures are retried with doubling backoff; exhausted trials
    become error-marked records, never dropped.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if not adapters:
        raise ValueError("at least one adapter required")
    by_name = {a.name: a for a in adapters}
    if len(by_name) != len(adapters):
        raise ValueError("adapter names must be unique")
    clock = clock or _utc_now

    keys = enumerate_trials(study, [a.name for a in adapters], conditions, languages)
    prompts = {key: build_prompt(study, key.question_id, key.condition, key.language) for key in keys}

    def execute(key: TrialKey) -> TrialRecord:
        adapter = by_name[key.model]
        prompt = prompts[key]
        attempt = 0
        while True:
            try:
                response = adapter.invoke(prompt, key)
            except Exception as exc:
                if attempt >= max_retries:
                    return TrialRecord(
                        key=key,
                        response_text="",
                        latency_ms=0,
                        timestamp=clock(),
                        adapter_name=adapter.name,
                        run_id=run_id,
                        error=str(exc) or exc.__class__.__name__,
                    )
                time.sleep(retry_base_s * (2**attempt))
                attempt += 1
                continue
            return TrialRecord(
                key=key,
                response_text=response.text,
                latency_ms=response.latency_ms,
                timestamp=clock(),
                adapter_name=adapter.name,
                run_id=run_id,
            )

    if parallelism == 1:
        records = [execute(key) for key in keys]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(execute, keys))

    materialize_study(out_graph, study)
    for record in records:
        materialize_answer(out_graph, study, record)
    return records


# ---------------------------------------------------------------------------
# RDF materialization

def question_iri(study: Study, question_id: str) -> Iri:
    return Iri(f"{study.base_iri}/question/{question_id}")


def material_iri(study: Study, material_id: str) -> Iri:
    return Iri(f"{study.base_iri}/material/{material_id}")


def model_iri(study: Study, model_name: str) -> Iri:
    return Iri(f"{study.base_iri}/model/{slug(model_name)}")


def condition_iri(study: Study, condition: ConditionKind) -> Iri:
    return Iri(f"{study.base_iri}/condition/{condition.value}")


def run_iri(study: Study, run_id: str) -> Iri:
    return Iri(f"{study.base_iri}/run/{run_id}")


def answer_iri(study: Study, record: TrialRecord) -> Iri:
    k = record.key
    return Iri(
        f"{study.base_iri}/answer/{k.question_id}/{slug(k.model)}/{k.language}/"
        f"{k.condition.value}/{record.run_id}"
    )


def materialize_study(graph: Graph, study: Study) -> None:
    """Question, Material, ContextSetting, and Study nodes."""
    t = vocab.term
    study_node = Iri(f"{study.base_iri}/study/{study.id}")
    graph.add(study_node, RDF_TYPE, t("Study"))
    graph.add(study_node, t("hasStudyId"), Literal(study.id))
    for q in study.questions:
        node = question_iri(study, q.id)
        graph.add(node, RDF_TYPE, t("Question"))
        graph.add(node, t("hasQuestionId"), Literal(q.id))
        graph.add(node, t("partOfStudy"), study_node)
        for lang, body in q.text.items():
            graph.add(node, t("hasText"), text(body, lang))
        for mid in q.material_ids:
            graph.add(node, t("refersToMaterial"), material_iri(study, mid))
    for m in study.materials:
        node = material_iri(study, m.id)
        graph.add(node, RDF_TYPE, t("Material"))
        graph.add(node, t("hasMaterialId"), Literal(m.id))
        for lang, title in m.title.items():
            graph.add(node, t("hasTitle"), text(title, lang))
        for lang, body in m.body.items():
            graph.add(node, t("hasBody"), text(body, lang))
        if m.source:
            graph.add(node, t("hasSource"), Literal(m.source))
    for condition in CONDITION_ORDER:
        node = condition_iri(study, condition)
        graph.add(node, RDF_TYPE, t("ContextSetting"))
        graph.add(node, t("hasConditionKind"), Literal(condition.value))


def materialize_answer(graph: Graph, study: Study, record: TrialRecord) -> Iri:
    """Answer node with full provenance; returns the minted IRI."""
    t = vocab.term
    key = record.key
    study.question(key.question_id)  # raises on unknown id
    node = answer_iri(study, record)
    graph.add(node, RDF_TYPE, t("Answer"))
    graph.add(node, t("hasGivenFor"), question_iri(study, key.question_id))
    graph.add(node, t("hasText"), text(record.response_text or "(empty response)", key.language))
    graph.add(node, GENERATED_AT, Literal(record.timestamp, datatype=XSD_DATETIME))
    graph.add(node, ATTRIBUTED_TO, model_iri(study, key.model))
    graph.add(node, t("hasModel"), model_iri(study, key.model))
    graph.add(node, t("hasCondition"), condition_iri(study, key.condition))
    graph.add(node, DCT_LANGUAGE, Literal(key.language))
    graph.add(node, t("hasLatencyMs"), integer(record.latency_ms))
    graph.add(node, t("hasAdapterName"), Literal(record.adapter_name))
    graph.add(node, t("inRun"), run_iri(study, record.run_id))
    if key.condition != ConditionKind.NO_CONTEXT:
        for mid in study.question(key.question_id).material_ids:
            graph.add(node, t("hasUsedMaterial"), material_iri(study, mid))
    if record.is_error:
        graph.add(node, t("isErrorTrial"), boolean(True))
        graph.add(node, t("hasErrorMessage"), Literal(record.error or ""))

    model_node = model_iri(study, key.model)
    graph.add(model_node, RDF_TYPE, t("Model"))
    graph.add(model_node, t("hasModelName"), Literal(key.model))
    run_node = run_iri(study, record.run_id)
    graph.add(run_node, RDF_TYPE, t("ExperimentRun"))
    graph.add(run_node, t("hasRunId"), Literal(record.run_id))
    graph.add(run_node, t("usesModel"), model_node)
    return node
