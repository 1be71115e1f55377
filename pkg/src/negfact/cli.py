"""Command-line entry point.

One binary, one subcommand per workflow stage: convert -> project ->
detect -> evaluate, plus trigger-set maintenance.  Data goes to stdout or
--out; diagnostics go to stderr.  Exit codes: 0 success, 1 record-level
problems (bad records, encoding findings), 2 unusable inputs or bad
configuration.

A config file (INI-style: [subcommand] sections with key=value entries
using flag names) supplies defaults; command-line flags always win.
Environment variables NEGFACT_MT_ENDPOINT and NEGFACT_MT_TIMEOUT seed the
projection backend settings.
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import json
import os
import sys
from pathlib import Path
from typing import Iterator, Optional, TextIO

from . import __version__
from .adapters import (
    AdapterFormatError,
    MappingError,
    import_assertion_corpus,
    import_bronco,
    import_ex4cds,
)
from .core import (
    CorpusFormatError,
    NormalizationPolicy,
    read_corpus,
    write_corpus,
)
from .engine import EngineConfig, Precedence, classify_batch, detection_to_record
from .evaluation import (
    DatasetMismatch,
    DuplicateGold,
    MissingPrediction,
    PredictionFormatError,
    compare,
    load_predictions,
    metrics,
    score,
)
from .projection import (
    CorruptionConfig,
    http_backend,
    project_corpus,
    stub_backend,
)
from .triggers import (
    BUNDLED_SETS,
    TriggerFormatError,
    compile_trigger_set,
    load_bundled,
    load_trigger_set,
    validate_trigger_set,
)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


@contextlib.contextmanager
def _open_out(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as handle:
            yield handle


def _policy_from_args(args: argparse.Namespace) -> NormalizationPolicy:
    return NormalizationPolicy(
        fold_case=args.fold_case,
        fold_umlauts=args.fold_umlauts,
        unicode_compose=True,
    )


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--fold-case",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="lowercase text and phrases (default: on)",
    )
    parser.add_argument(
        "--fold-umlauts",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="fold ae/oe/ue/ss spellings (default: on)",
    )


def _load_triggers(args: argparse.Namespace):
    """Trigger set from --triggers (with policy flags) or the bundled sets."""
    if args.triggers:
        path = Path(args.triggers)
        with path.open("r", encoding="utf-8") as handle:
            return load_trigger_set(handle, args.lang, _policy_from_args(args))
    return load_bundled(args.lang, args.mode)


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    precedence = (
        Precedence.POSSIBLE_OVER_NEGATED
        if args.precedence == "possible"
        else Precedence.NEAREST_TRIGGER
    )
    if args.mode == "baseline":
        config = EngineConfig.baseline(scope_window=args.scope_window)
    else:
        config = EngineConfig.fixed(scope_window=args.scope_window)
    return EngineConfig(
        scope_window=config.scope_window,
        entity_internal_triggers=config.entity_internal_triggers,
        compound_suffix_negation=config.compound_suffix_negation,
        precedence=precedence,
    )


def cmd_detect(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    if not corpus_path.exists():
        return _fail(f"corpus file not found: {corpus_path}")
    try:
        trigger_set = _load_triggers(args)
    except (OSError, TriggerFormatError, ValueError) as exc:
        return _fail(f"cannot load trigger set: {exc}")
    for warning in trigger_set.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    matcher = compile_trigger_set(trigger_set)
    config = _engine_config(args)

    def records() -> Iterator[dict]:
        with corpus_path.open("r", encoding="utf-8") as handle:
            for number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError:
                    yield {"id": f"line-{number}", "text": None}

    errors = 0
    with _open_out(args.out) as out:
        for result in classify_batch(records(), matcher, config):
            if result.error is not None:
                errors += 1
                print(f"record {result.id}: {result.error}", file=sys.stderr)
                continue
            out.write(json.dumps(detection_to_record(result.id, result.detection), ensure_ascii=False))
            out.write("\n")
    if errors:
        print(f"{errors} record(s) failed", file=sys.stderr)
        return 1
    return 0


def cmd_project(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    if not corpus_path.exists():
        return _fail(f"corpus file not found: {corpus_path}")
    if args.backend == "http":
        if not args.endpoint:
            return _fail("http backend requires --endpoint (or NEGFACT_MT_ENDPOINT)")
        backend = http_backend(args.endpoint, timeout=args.timeout)
    else:
        lexicon = {}
        if args.lexicon:
            try:
                with open(args.lexicon, "r", encoding="utf-8") as handle:
                    lexicon = json.load(handle)
            except (OSError, json.JSONDecodeError) as exc:
                return _fail(f"cannot load stub lexicon: {exc}")
            if not isinstance(lexicon, dict):
                return _fail("stub lexicon must be a JSON object of tagged->tagged strings")
        backend = stub_backend(lexicon, default=args.stub_default)

    try:
        with corpus_path.open("r", encoding="utf-8") as handle:
            sentences = list(read_corpus(handle))
    except CorpusFormatError as exc:
        return _fail(f"bad corpus: {exc}")

    config = CorruptionConfig(
        max_length_ratio=args.max_length_ratio,
        repeat_ngram=args.repeat_ngram,
        repeat_count=args.repeat_count,
    )
    retained, report = project_corpus(
        sentences, backend, args.target_lang, config, jobs=args.jobs
    )
    with _open_out(args.out) as out:
        for line in write_corpus(retained):
            out.write(line)
            out.write("\n")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            handle.write(report.to_json())
            handle.write("\n")
    print(report.to_text(), file=sys.stderr, end="")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    in_path = Path(getattr(args, "in"))
    if not in_path.exists():
        return _fail(f"input not found: {in_path}")
    try:
        if args.format == "jsonl":
            return _convert_jsonl(in_path, args)
        if args.format == "i2b2":
            return _convert_i2b2(in_path, args)
        if args.format == "ex4cds":
            with in_path.open("r", encoding="utf-8") as handle:
                sentences, summary = import_ex4cds(handle, entity_type=args.entity_type)
        else:  # bronco
            with in_path.open("r", encoding="utf-8") as handle:
                sentences, summary = import_bronco(handle, max_gap=args.max_gap)
    except (AdapterFormatError, MappingError) as exc:
        return _fail(str(exc))
    with _open_out(args.out) as out:
        for line in write_corpus(sentences):
            out.write(line)
            out.write("\n")
    print(summary.to_text(), file=sys.stderr, end="")
    return 0


def _convert_jsonl(in_path: Path, args: argparse.Namespace) -> int:
    # Validating passthrough: output bytes equal input bytes for valid files.
    lines = in_path.read_text(encoding="utf-8").splitlines(keepends=True)
    try:
        list(read_corpus(lines))
    except CorpusFormatError as exc:
        return _fail(f"bad corpus: {exc}")
    with _open_out(args.out) as out:
        out.writelines(lines)
    print(f"records {sum(1 for l in lines if l.strip())}, passthrough", file=sys.stderr)
    return 0


def _convert_i2b2(in_path: Path, args: argparse.Namespace) -> int:
    if in_path.is_dir():
        assertion_files = sorted(in_path.glob("*.ast"))
        if not assertion_files:
            return _fail(f"no .ast files under {in_path}")
    else:
        assertion_files = [in_path]
    all_sentences = []
    totals = {"input": 0, "emitted": 0, "dropped": 0}
    for assertion_file in assertion_files:
        document_file = assertion_file.with_suffix(".txt")
        if not document_file.exists():
            return _fail(f"missing document file: {document_file}")
        document_lines = document_file.read_text(encoding="utf-8").splitlines()
        with assertion_file.open("r", encoding="utf-8") as handle:
            sentences, summary = import_assertion_corpus(
                handle, document_lines, doc_id=assertion_file.stem
            )
        all_sentences.extend(sentences)
        totals["input"] += summary.input
        totals["emitted"] += summary.emitted
        totals["dropped"] += summary.total_dropped
    with _open_out(args.out) as out:
        for line in write_corpus(all_sentences):
            out.write(line)
            out.write("\n")
    print(
        f"records {totals['input']}, emitted {totals['emitted']}, dropped {totals['dropped']}",
        file=sys.stderr,
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold_path = Path(args.gold)
    if not gold_path.exists():
        return _fail(f"gold file not found: {gold_path}")
    try:
        with gold_path.open("r", encoding="utf-8") as handle:
            gold_sentences = list(read_corpus(handle))
    except CorpusFormatError as exc:
        return _fail(f"bad gold corpus: {exc}")
    gold_pairs = []
    for sentence in gold_sentences:
        if sentence.gold is None:
            return _fail(f"gold record {sentence.id!r} has no label")
        gold_pairs.append((sentence.id, sentence.gold))

    dataset = args.dataset or gold_path.stem
    reports = []
    for spec in args.pred:
        name, _, path = spec.partition("=")
        if not path:
            name, path = Path(spec).stem, spec
        pred_path = Path(path)
        if not pred_path.exists():
            return _fail(f"prediction file not found: {pred_path}")
        try:
            with pred_path.open("r", encoding="utf-8") as handle:
                pairs = load_predictions(handle)
            matrix = score(gold_pairs, pairs)
        except (PredictionFormatError, MissingPrediction, DuplicateGold) as exc:
            return _fail(f"{name}: {exc}")
        if matrix.extra_predictions:
            print(
                f"warning: {name}: {matrix.extra_predictions} extra prediction(s) ignored",
                file=sys.stderr,
            )
        reports.append(metrics(matrix, system=name, dataset=dataset))

    with _open_out(args.out) as out:
        if len(reports) == 1:
            payload = reports[0]
        else:
            try:
                payload = compare(reports)
            except DatasetMismatch as exc:
                return _fail(str(exc))
        out.write(payload.to_json() if args.format == "json" else payload.to_text())
    return 0


def cmd_triggers_validate(args: argparse.Namespace) -> int:
    path = Path(args.triggers)
    try:
        with path.open("r", encoding="utf-8") as handle:
            trigger_set = load_trigger_set(handle, args.lang, _policy_from_args(args))
    except OSError as exc:
        return _fail(f"cannot read trigger file: {exc}")
    except TriggerFormatError as exc:
        return _fail(f"bad trigger file: {exc}")
    sample = None
    if args.corpus:
        try:
            with open(args.corpus, "r", encoding="utf-8") as handle:
                sample = list(read_corpus(handle))
        except (OSError, CorpusFormatError) as exc:
            return _fail(f"bad sample corpus: {exc}")
    report = validate_trigger_set(trigger_set, sample)
    sys.stdout.write(report.to_text())
    return 1 if report.encoding_inconsistencies else 0


def _version_string() -> str:
    sets = []
    for (language, mode), _ in sorted(BUNDLED_SETS.items()):
        trigger_set = load_bundled(language, mode)
        sets.append(f"{language}/{mode}={trigger_set.version}")
    return f"negfact {__version__} (trigger sets: {', '.join(sets)})"


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="negfact",
        description="Rule-based factuality detection and corpus tooling for clinical text.",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    parser.add_argument(
        "--config",
        default=None,
        help="INI config file; [subcommand] sections supply flag defaults",
    )
    subcommands: dict[str, argparse.ArgumentParser] = {}
    subparsers = parser.add_subparsers(dest="command", required=True)

    detect = subparsers.add_parser("detect", help="classify entities in a corpus")
    detect.add_argument("--corpus", required=True, help="corpus JSONL file")
    detect.add_argument("--triggers", default=None, help="trigger TSV (default: bundled set)")
    detect.add_argument("--lang", default="de", help="language tag (default: de)")
    detect.add_argument(
        "--mode",
        choices=("baseline", "fixed"),
        default="fixed",
        help="bundled trigger variant and engine behavior (default: fixed)",
    )
    detect.add_argument("--scope-window", type=int, default=5, help="trigger scope in tokens (default: 5)")
    detect.add_argument(
        "--precedence",
        choices=("nearest", "possible"),
        default="nearest",
        help="when negation and possible scopes both cover the entity (default: nearest)",
    )
    detect.add_argument("--out", default="-", help="detections JSONL (default: stdout)")
    _add_policy_flags(detect)
    detect.set_defaults(func=cmd_detect)
    subcommands["detect"] = detect

    project = subparsers.add_parser("project", help="translate a corpus, keeping markup")
    project.add_argument("--corpus", required=True, help="source corpus JSONL")
    project.add_argument("--backend", choices=("stub", "http"), default="stub")
    project.add_argument(
        "--endpoint",
        default=os.environ.get("NEGFACT_MT_ENDPOINT"),
        help="MT service URL (http backend; env NEGFACT_MT_ENDPOINT)",
    )
    project.add_argument(
        "--timeout",
        type=float,
        default=float(os.environ.get("NEGFACT_MT_TIMEOUT", "30")),
        help="per-call timeout in seconds (env NEGFACT_MT_TIMEOUT)",
    )
    project.add_argument("--lexicon", default=None, help="stub backend lexicon JSON")
    project.add_argument(
        "--stub-default",
        choices=("echo", "empty", "error"),
        default="echo",
        help="stub behavior for unmapped inputs (default: echo)",
    )
    project.add_argument("--target-lang", required=True)
    project.add_argument("--report", default=None, help="discard report JSON path")
    project.add_argument("--out", default="-", help="retained corpus JSONL (default: stdout)")
    project.add_argument("--jobs", type=int, default=4, help="max in-flight translations")
    project.add_argument("--max-length-ratio", type=float, default=2.5)
    project.add_argument("--repeat-ngram", type=int, default=3)
    project.add_argument("--repeat-count", type=int, default=3)
    project.set_defaults(func=cmd_project)
    subcommands["project"] = project

    convert = subparsers.add_parser("convert", help="import external corpus formats")
    convert.add_argument("--format", choices=("i2b2", "ex4cds", "bronco", "jsonl"), required=True)
    convert.add_argument("--in", required=True, help="input file (or directory for i2b2)")
    convert.add_argument("--out", default="-", help="corpus JSONL (default: stdout)")
    convert.add_argument("--max-gap", type=int, default=50, help="fragment merge gap (default: 50)")
    convert.add_argument(
        "--entity-type",
        default="medical-condition",
        help="entity type to keep for ex4cds (default: medical-condition)",
    )
    convert.set_defaults(func=cmd_convert)
    subcommands["convert"] = convert

    evaluate = subparsers.add_parser("evaluate", help="score predictions against gold labels")
    evaluate.add_argument("--gold", required=True, help="gold corpus JSONL (labels required)")
    evaluate.add_argument(
        "--pred",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="prediction JSONL, repeatable; NAME= prefix optional",
    )
    evaluate.add_argument("--dataset", default=None, help="dataset name for the report")
    evaluate.add_argument("--format", choices=("text", "json"), default="text")
    evaluate.add_argument("--out", default="-", help="report destination (default: stdout)")
    evaluate.set_defaults(func=cmd_evaluate)
    subcommands["evaluate"] = evaluate

    triggers = subparsers.add_parser("triggers", help="trigger-set maintenance")
    trigger_subparsers = triggers.add_subparsers(dest="triggers_command", required=True)
    validate = trigger_subparsers.add_parser(
        "validate", help="lint a trigger file (exit 1 on encoding findings)"
    )
    validate.add_argument("--triggers", required=True, help="trigger TSV file")
    validate.add_argument("--lang", default="de")
    validate.add_argument("--corpus", default=None, help="sample corpus for dead-trigger check")
    _add_policy_flags(validate)
    validate.set_defaults(func=cmd_triggers_validate)
    subcommands["triggers-validate"] = validate

    return parser, subcommands


def _apply_config(
    config_path: str,
    command: str,
    subcommands: dict[str, argparse.ArgumentParser],
) -> Optional[str]:
    """Overlay [command] section values as parser defaults; flags still win."""
    parser = subcommands.get(command)
    if parser is None:
        return None
    config = configparser.ConfigParser()
    try:
        with open(config_path, "r", encoding="utf-8") as handle:
            config.read_file(handle)
    except (OSError, configparser.Error) as exc:
        return f"cannot read config file: {exc}"
    if not config.has_section(command):
        return None
    section = config[command]
    actions = {action.dest.replace("_", "-"): action for action in parser._actions}
    for key, raw in section.items():
        action = actions.get(key.replace("_", "-"))
        if action is None:
            return f"config key {key!r} unknown for subcommand {command!r}"
        if isinstance(action, argparse.BooleanOptionalAction) or isinstance(
            action.const, bool
        ):
            value: object = raw.strip().lower() in ("1", "true", "yes", "on")
        elif callable(action.type):
            try:
                value = action.type(raw)
            except ValueError as exc:
                return f"config key {key!r}: {exc}"
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            return f"config key {key!r}: {value!r} not in {sorted(action.choices)}"
        parser.set_defaults(**{action.dest: value})
    return None


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subcommands = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.config:
        command = args.command
        if command == "triggers":
            command = "triggers-validate"
        error = _apply_config(args.config, command, subcommands)
        if error:
            return _fail(error)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
    return args.func(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
