"""Command-line entry point wiring the whole pipeline.

Stages communicate through files in the output directory so every
intermediate stays inspectable:

    run      -> answers.nt, trials.tsv
    judge    -> judged.nt
    validate -> violations.tsv (exit 1 when violations exist)
    analyze  -> report.txt, report.tsv, report.md, queries/*.rq
    compare  -> compare.txt, compare.tsv
    export   -> dataset.nt, dataset.ttl

Exit codes: 0 success, 1 domain findings (violations / error trials),
2 usage, configuration, or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import analysis, fixture, harness, judge as judge_mod, shapes, stats, studydef, vocab
from .rdf import (
    DCTERMS_NS,
    Graph,
    Iri,
    Literal,
    parse_ntriples,
    write_ntriples,
    write_turtle,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Configuration / usage / I-O problem; maps to exit code 2."""


def _load_graph(path: Path, hint: str) -> Graph:
    if not path.exists():
        raise CliError(f"{path} not found — {hint}")
    return parse_ntriples(path.read_text(encoding="utf-8"))


def _study_path(args) -> Path:
    if args.study:
        return Path(args.study)
    return fixture.STUDY_PATH


def _load_study(args) -> studydef.Study:
    path = _study_path(args)
    try:
        study = studydef.load_study(path)
    except studydef.StudyError as exc:
        raise CliError(f"study {path}: {exc}") from exc
    if args.base_iri:
        study = studydef.Study(
            id=study.id,
            base_iri=args.base_iri.rstrip("/"),
            languages=study.languages,
            questions=study.questions,
            materials=study.materials,
            prompt_template=study.prompt_template,
        )
    return study


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_conditions(value: Optional[str]) -> Sequence[studydef.ConditionKind]:
    if not value:
        return studydef.CONDITION_ORDER
    try:
        return [studydef.ConditionKind(v.strip()) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise CliError(f"bad --conditions value: {exc}") from exc


def _escape_tsv(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


# ---------------------------------------------------------------------------
# subcommands

def cmd_schema_emit(args) -> int:
    registry = vocab.builtin_registry()
    graph = vocab.emit_tbox(registry)
    text = write_turtle(graph, registry.prefixes)
    out = Path(args.schema_out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from exc
    print(f"wrote {out} ({len(graph)} triples)")
    return EXIT_OK


def cmd_study_check(args) -> int:
    study = _load_study(args)
    print(
        f"study {study.id}: {len(study.questions)} questions, "
        f"{len(study.materials)} materials, languages {', '.join(study.languages)}"
    )
    return EXIT_OK


def _build_adapters(args, study: studydef.Study) -> List[harness.ModelAdapter]:
    mode = args.mode
    if mode == "replay":
        if not args.cassette:
            raise CliError("--mode replay requires --cassette")
        cassette_path = Path(args.cassette)
        if not cassette_path.exists():
            raise CliError(f"cassette {cassette_path} not found")
        try:
            cassette = harness.Cassette.load(cassette_path)
        except (harness.HarnessError, json.JSONDecodeError, KeyError) as exc:
            raise CliError(f"cassette {cassette_path}: {exc}") from exc
        if args.models:
            names = [m.strip() for m in args.models.split(",") if m.strip()]
        else:
            names = sorted({r.model for r in cassette.records.values()})
        if not names:
            raise CliError("no models found in cassette and none given via --models")
        return [harness.replay_mode(name, cassette) for name in names]

    if not args.config:
        raise CliError(f"--mode {mode} requires --config with adapter definitions")
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"config {args.config}: {exc}") from exc
    adapters: List[harness.ModelAdapter] = []
    for entry in config.get("adapters", []):
        try:
            adapter_config = harness.HttpAdapterConfig(
                endpoint=entry["endpoint"],
                model=entry["model"],
                auth_env=entry.get("auth_env", ""),
                temperature=entry.get("temperature", 0.0),
                timeout_s=entry.get("timeout_s", 60.0),
                max_retries=entry.get("max_retries", 2),
            )
        except (KeyError, ValueError) as exc:
            raise CliError(f"bad adapter config entry: {exc}") from exc
        adapters.append(harness.HttpAdapter(adapter_config))
    if not adapters:
        raise CliError("config declares no adapters")
    if mode == "record":
        if not args.cassette:
            raise CliError("--mode record requires --cassette")
        cassette = harness.Cassette()
        adapters = [harness.record_mode(a, cassette) for a in adapters]
        args._record_cassette = cassette  # saved after the run
    return adapters


def cmd_run(args) -> int:
    study = _load_study(args)
    out = _out_dir(args)
    adapters = _build_adapters(args, study)
    clock = (lambda: args.fixed_clock) if args.fixed_clock else None

    graph = Graph()
    try:
        records = harness.run_experiment(
            study,
            adapters,
            graph,
            conditions=_parse_conditions(args.conditions),
            languages=args.languages.split(",") if args.languages else None,
            parallelism=args.parallelism,
            run_id=args.run_id,
            clock=clock,
        )
    except (harness.HarnessError, studydef.StudyError, ValueError) as exc:
        raise CliError(str(exc)) from exc

    (out / "answers.nt").write_text(write_ntriples(graph), encoding="utf-8")
    lines = ["question\tmodel\tlanguage\tcondition\tlatency_ms\ttimestamp\tadapter\trun\terror\tresponse"]
    for r in records:
        lines.append(
            "\t".join(
                [
                    r.key.question_id,
                    r.key.model,
                    r.key.language,
                    r.key.condition.value,
                    str(r.latency_ms),
                    r.timestamp,
                    r.adapter_name,
                    r.run_id,
                    _escape_tsv(r.error or ""),
                    _escape_tsv(r.response_text),
                ]
            )
        )
    (out / "trials.tsv").write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    cassette = getattr(args, "_record_cassette", None)
    if cassette is not None:
        cassette.save(args.cassette)

    errors = sum(1 for r in records if r.is_error)
    print(f"{len(records)} trials, {errors} errors -> {out / 'answers.nt'}")
    return EXIT_FINDINGS if errors else EXIT_OK


def cmd_judge(args) -> int:
    study = _load_study(args)
    out = _out_dir(args)
    graph = _load_graph(out / "answers.nt", "run `sqare run` first")
    policy = (
        judge_mod.ValidityPolicy.FACTUAL
        if args.policy == "factual"
        else judge_mod.ValidityPolicy.ABSTENTION_AWARE
    )
    count = 0
    for row in _trial_rows(graph, study):
        record, answer = row
        judgment = judge_mod.auto_judge(record, study.question(record.key.question_id), policy, answer)
        judge_mod.materialize_judgment(graph, judgment)
        count += 1
    if args.human:
        overrides = judge_mod.ingest_judgments(graph, Path(args.human), policy)
        print(f"applied {overrides} human override(s)")
    (out / "judged.nt").write_text(write_ntriples(graph), encoding="utf-8")
    print(f"judged {count} answers ({policy.value} policy) -> {out / 'judged.nt'}")
    return EXIT_OK


def _trial_rows(graph: Graph, study: studydef.Study):
    """Reconstruct (TrialRecord, answer IRI) pairs from a run graph."""
    t = vocab.term
    rows = []
    for answer_row in analysis.answer_rows(graph):
        answer = answer_row.answer
        text_term = graph.value(answer, t("hasText"))
        response = text_term.lexical if isinstance(text_term, Literal) else ""
        key = studydef.TrialKey(
            question_id=answer_row.question_id,
            model=answer_row.model,
            language=answer_row.language,
            condition=answer_row.condition,
        )
        record = harness.TrialRecord(
            key=key,
            response_text=response,
            latency_ms=0,
            timestamp="",
            adapter_name=answer_row.model,
            run_id="",
        )
        rows.append((record, answer))
    return rows


def cmd_validate(args) -> int:
    out = _out_dir(args)
    graph_path = Path(args.graph) if args.graph else out / "judged.nt"
    graph = _load_graph(graph_path, "run `sqare judge` first")
    violations = shapes.validate(graph, shapes.builtin_shapes())
    tsv_lines = ["shape_id\tfocus\tmessage"] + [v.as_tsv() for v in violations]
    (out / "violations.tsv").write_text("".join(line + "\n" for line in tsv_lines), encoding="utf-8")
    if not violations:
        print("graph is shape-clean")
        return EXIT_OK
    width_shape = max(len(v.shape_id) for v in violations)
    width_focus = max(len(v.focus) for v in violations)
    for v in violations:
        print(f"{v.shape_id.ljust(width_shape)}  {v.focus.ljust(width_focus)}  {v.message}")
    print(f"{len(violations)} violation(s)")
    return EXIT_FINDINGS


def cmd_analyze(args) -> int:
    out = _out_dir(args)
    graph = _load_graph(out / "judged.nt", "run `sqare judge` first")
    try:
        report = analysis.metric_report(graph)
    except analysis.AnalysisError as exc:
        raise CliError(str(exc)) from exc
    text = analysis.format_metric_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    (out / "report.tsv").write_text(analysis.metric_report_tsv(report), encoding="utf-8")
    (out / "report.md").write_text(_report_markdown(report), encoding="utf-8")
    analysis.emit_sparql_queries(out / "queries")
    print(text, end="")
    print(f"reports -> {out}, SPARQL templates -> {out / 'queries'}")
    return EXIT_OK


def _report_markdown(report: analysis.MetricReport) -> str:
    lines = [
        "| model | language | condition | accuracy |",
        "|---|---|---|---|",
    ]
    for cell in report.accuracy:
        pct = f"{float(cell.accuracy) * 100:.1f}%"
        lines.append(
            f"| {cell.model} | {cell.language} | {cell.condition.value} | "
            f"{cell.valid_count}/{cell.total} ({pct}) |"
        )
    lines.append("")
    lines.append("| model | language | error replication | leakage |")
    lines.append("|---|---|---|---|")
    for (model, language), rate in sorted(report.error_replication.items()):
        leak = report.leakage.get((model, language))
        leak_text = f"{float(leak) * 100:.1f}%" if leak is not None else "n/a"
        lines.append(f"| {model} | {language} | {float(rate) * 100:.1f}% | {leak_text} |")
    return "".join(line + "\n" for line in lines)


def cmd_compare(args) -> int:
    out = _out_dir(args)
    graph = _load_graph(out / "judged.nt", "run `sqare judge` first")
    languages = sorted(
        {
            term.lexical
            for term in (
                graph.value(row.answer, Iri(DCTERMS_NS + "language"))
                for row in analysis.answer_rows(graph)
            )
            if isinstance(term, Literal)
        }
    )
    tables: Dict[Tuple[str, studydef.ConditionKind], stats.ContingencyTable] = {}
    try:
        for language in languages:
            for condition in studydef.CONDITION_ORDER:
                tables[(language, condition)] = analysis.build_contingency(
                    graph, args.model_a, args.model_b, language, condition
                )
    except analysis.AnalysisError as exc:
        raise CliError(str(exc)) from exc
    rows = stats.compare(tables, ci_method=args.ci_method)
    text = stats.format_report(rows, args.model_a, args.model_b)
    (out / "compare.txt").write_text(text, encoding="utf-8")
    (out / "compare.tsv").write_text(stats.report_tsv(rows), encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_export(args) -> int:
    out = _out_dir(args)
    graph = _load_graph(out / "judged.nt", "run `sqare judge` first")
    full = graph.copy()
    registry = vocab.builtin_registry()
    full.update(vocab.emit_tbox(registry))
    (out / "dataset.nt").write_text(write_ntriples(full), encoding="utf-8")
    (out / "dataset.ttl").write_text(write_turtle(full, registry.prefixes), encoding="utf-8")
    print(f"exported {len(full)} triples -> {out / 'dataset.nt'}, {out / 'dataset.ttl'}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqare",
        description="Multilingual LLM knowledge-conflict evaluation toolkit over RDF.",
    )
    parser.add_argument("--study", help="study JSON path (default: bundled fixture study)")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--config", help="JSON config with adapter definitions")
    parser.add_argument("--base-iri", help="override the study base IRI")
    parser.add_argument("--fixed-clock", help="RFC 3339 timestamp used for all provenance times")
    sub = parser.add_subparsers(dest="command", required=True)

    schema = sub.add_parser("schema", help="vocabulary operations")
    schema_sub = schema.add_subparsers(dest="schema_command", required=True)
    emit = schema_sub.add_parser("emit", help="write the T-Box as Turtle")
    emit.add_argument("--out", dest="schema_out", default="schema.ttl", help="output Turtle path")
    emit.set_defaults(func=cmd_schema_emit)

    study = sub.add_parser("study", help="study definition operations")
    study_sub = study.add_subparsers(dest="study_command", required=True)
    check = study_sub.add_parser("check", help="load and validate a study file")
    check.set_defaults(func=cmd_study_check)

    run = sub.add_parser("run", help="execute trials and materialize answers")
    run.add_argument("--mode", choices=["live", "record", "replay"], default="replay")
    run.add_argument("--cassette", help="cassette path (replay input / record output)")
    run.add_argument("--models", help="comma-separated model names (replay)")
    run.add_argument("--parallelism", type=int, default=1)
    run.add_argument("--run-id", default="r1")
    run.add_argument("--conditions", help="comma-separated subset of conditions")
    run.add_argument("--languages", help="comma-separated subset of languages")
    run.set_defaults(func=cmd_run)

    judge = sub.add_parser("judge", help="judge answers and add ValidationResults")
    judge.add_argument("--policy", choices=["factual", "abstention"], default="factual")
    judge.add_argument("--human", help="TSV file with human-judgment overrides")
    judge.set_defaults(func=cmd_judge)

    validate = sub.add_parser("validate", help="run shape validation")
    validate.add_argument("--graph", help="N-Triples graph to validate (default: OUT/judged.nt)")
    validate.set_defaults(func=cmd_validate)

    analyze = sub.add_parser("analyze", help="compute metrics and emit SPARQL templates")
    analyze.set_defaults(func=cmd_analyze)

    compare = sub.add_parser("compare", help="paired statistics between two models")
    compare.add_argument("--model-a", required=True, help="first model (rows a, b)")
    compare.add_argument("--model-b", required=True, help="second model (rows a, c)")
    compare.add_argument(
        "--ci-method",
        choices=["paired-difference", "newcombe"],
        default="paired-difference",
    )
    compare.set_defaults(func=cmd_compare)

    export = sub.add_parser("export", help="write the full dataset with T-Box")
    export.set_defaults(func=cmd_export)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
