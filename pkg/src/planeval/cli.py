"""Command-line entry point.

Subcommands: evaluate, validate, encode-env, stats, analyze, plan.
Exit codes: 0 success, 1 usage or config error, 2 data validation
failure, 3 generator or protocol failure. Outputs carry a config echo
and no timestamps, so identical inputs give byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .aggregate import (
    EvalReport,
    TaskResult,
    aggregate_plan,
    build_report,
    geometric_weights,
)
from .analysis import (
    DEFAULT_BUCKET_BOUNDARIES,
    bucket_by_length,
    dataset_stats,
    length_error_from_lengths,
)
from .env import FlattenConfig, encode_environment, flatten, load_table, truncate_encoding
from .errors import (
    ConfigError,
    GeneratorError,
    MissingTaskError,
    PlanEvalError,
)
from .generator import (
    DEFAULT_MAX_STEPS,
    HttpGeneratorClient,
    run_iterative,
    run_single_pass,
)
from .lexicon import default_lexicon, load_lexicon_file
from .metrics import (
    BleuStepScorer,
    CiderStepScorer,
    KasStepScorer,
    build_idf,
    score_plan,
)
from .plan import (
    Plan,
    align,
    load_dataset,
    load_predictions,
    validate_dataset_file,
)
from .text import TOKENIZER_ID

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GENERATOR = 3

KNOWN_METRICS = ("bleu", "cider", "kas")

ENDPOINT_ENV_VAR = "PLANEVAL_ENDPOINT"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here reserves 2 for
    # data validation, so remap.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _add_config_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--config",
        default=None,
        help="JSON file whose keys provide defaults for this subcommand's flags",
    )


def build_parser() -> tuple[_ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _ArgumentParser(prog="planeval", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    evaluate = subparsers.add_parser("evaluate", help="score predictions against a dataset")
    evaluate.add_argument("--dataset", required=True, help="reference dataset JSONL")
    evaluate.add_argument("--predictions", required=True, help="predictions JSONL")
    evaluate.add_argument("--metrics", default="kas,bleu,cider", help="comma-separated subset of kas,bleu,cider")
    evaluate.add_argument("--reweight-p", type=float, default=0.0, dest="reweight_p",
                          help="geometric reweighting p in [0,1]; 0 = uniform")
    evaluate.add_argument("--lexicon", default=None, help="lexicon JSON (default: shipped lexicon)")
    evaluate.add_argument("--out", required=True, help="report JSON path")
    evaluate.add_argument("--csv", default=None, help="optional CSV path, one row per task per metric")
    evaluate.add_argument("--workers", type=int, default=1, help="parallel scoring workers")
    _add_config_flag(evaluate)
    evaluate.set_defaults(func=cmd_evaluate)
    registry["evaluate"] = evaluate

    validate = subparsers.add_parser("validate", help="check a dataset file against the schema")
    validate.add_argument("--dataset", required=True)
    _add_config_flag(validate)
    validate.set_defaults(func=cmd_validate)
    registry["validate"] = validate

    encode = subparsers.add_parser("encode-env", help="flatten an environment document")
    encode.add_argument("--input", required=True, help="environment JSON document")
    encode.add_argument("--goal", required=True)
    encode.add_argument("--max-tokens", type=int, default=None, dest="max_tokens")
    encode.add_argument("--columns", default=",".join(FlattenConfig().included_columns))
    encode.add_argument("--precision", type=int, default=FlattenConfig().precision)
    _add_config_flag(encode)
    encode.set_defaults(func=cmd_encode_env)
    registry["encode-env"] = encode

    stats = subparsers.add_parser("stats", help="per-split dataset statistics")
    stats.add_argument("--dataset", required=True)
    stats.add_argument("--out", default=None, help="stats JSON path (default: stdout)")
    stats.add_argument("--csv", default=None, help="optional CSV path")
    _add_config_flag(stats)
    stats.set_defaults(func=cmd_stats)
    registry["stats"] = stats

    analyze = subparsers.add_parser("analyze", help="length-error and length-bucket analyses")
    analyze.add_argument("--report", required=True, help="report JSON from evaluate")
    analyze.add_argument("--buckets", default=",".join(str(b) for b in DEFAULT_BUCKET_BOUNDARIES),
                         help="comma-separated bucket boundaries over reference length")
    analyze.add_argument("--out", default=None, help="analysis JSON path (default: stdout)")
    analyze.add_argument("--csv", default=None, help="optional per-bucket CSV")
    analyze.add_argument("--plot-data", default=None, dest="plot_data",
                         help="optional per-task CSV for external plotting")
    _add_config_flag(analyze)
    analyze.set_defaults(func=cmd_analyze)
    registry["analyze"] = analyze

    plan = subparsers.add_parser("plan", help="decode plans from a generator endpoint")
    plan.add_argument("--endpoint", default=None,
                      help=f"generator URL (fallback: ${ENDPOINT_ENV_VAR})")
    plan.add_argument("--dataset", required=True)
    plan.add_argument("--mode", choices=["iterative", "single_pass"], default="iterative")
    plan.add_argument("--with-env", action=argparse.BooleanOptionalAction, default=True,
                      dest="with_env", help="append the flattened environment to prompts")
    plan.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS, dest="max_steps")
    plan.add_argument("--timeout", type=float, default=30.0)
    plan.add_argument("--retries", type=int, default=2)
    plan.add_argument("--out", required=True, help="predictions JSONL path")
    _add_config_flag(plan)
    plan.set_defaults(func=cmd_plan)
    registry["plan"] = plan

    return parser, registry


def _merge_config(parser, registry, args, argv):
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    sub = registry[args.command]
    known = {action.dest for action in sub._actions}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"config keys unknown to {args.command}: {sorted(unknown)}")
    # Config supplies defaults; explicit flags still win on reparse.
    sub.set_defaults(**doc)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(argv) if argv is not None else sys.argv[1:]
    parser, registry = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(parser, registry, args, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"planeval: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeneratorError as exc:
        print(f"planeval: generator error: {exc}", file=sys.stderr)
        return EXIT_GENERATOR
    except PlanEvalError as exc:
        print(f"planeval: {exc}", file=sys.stderr)
        return EXIT_DATA


# --- evaluate --------------------------------------------------------------


def _parse_metrics(raw: str) -> list[str]:
    metrics = [m.strip() for m in raw.split(",") if m.strip()]
    if not metrics:
        raise ConfigError("evaluate needs at least one metric")
    unknown = [m for m in metrics if m not in KNOWN_METRICS]
    if unknown:
        raise ConfigError(f"unknown metrics {unknown}; choose from {KNOWN_METRICS}")
    return sorted(set(metrics))


def cmd_evaluate(args) -> int:
    metrics = _parse_metrics(args.metrics)
    p = args.reweight_p
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"--reweight-p must be in [0,1], got {p}")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")

    records = load_dataset(args.dataset)
    by_id = {record.task_id: record for record in records}
    predictions = load_predictions(args.predictions)
    missing = sorted(set(predictions) - set(by_id))
    if missing:
        raise MissingTaskError(f"predictions without reference tasks: {missing}")

    lexicon = None
    scorers = {}
    if "kas" in metrics:
        lexicon = load_lexicon_file(args.lexicon) if args.lexicon else default_lexicon()
        scorers["kas"] = KasStepScorer(lexicon)
    if "bleu" in metrics:
        scorers["bleu"] = BleuStepScorer()
    if "cider" in metrics:
        corpus = [step for record in records for step in record.reference_plan.steps]
        scorers["cider"] = CiderStepScorer(build_idf(corpus))

    def evaluate_one(task_id: str) -> TaskResult:
        record = by_id[task_id]
        raw_steps = predictions[task_id]
        gen_plan = Plan(tuple(raw_steps)) if raw_steps else Plan.null()
        pair = align(gen_plan, record.reference_plan)
        weights = geometric_weights(len(pair), p)
        step_scores = {}
        aggregates = {}
        for metric in metrics:
            scores = score_plan(pair, scorers[metric])
            step_scores[metric] = tuple(scores)
            aggregates[metric] = aggregate_plan(scores, weights)
        return TaskResult(
            task_id=task_id,
            gen_length=len(raw_steps),
            ref_length=len(record.reference_plan),
            step_scores=step_scores,
            aggregates=aggregates,
        )

    task_ids = sorted(predictions)
    if args.workers == 1:
        results = [evaluate_one(task_id) for task_id in task_ids]
    else:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(evaluate_one, task_ids))

    config_echo = {
        "command": "evaluate",
        "dataset": str(args.dataset),
        "predictions": str(args.predictions),
        "metrics": metrics,
        "reweight_p": p,
        "lexicon_hash": lexicon.fingerprint if lexicon is not None else None,
        "tokenizer": TOKENIZER_ID,
        "ngram_order": 4,
    }
    report = build_report(results, config_echo)
    report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)

    for metric in metrics:
        print(f"{metric}: mean {report.corpus_means[metric]:.4f} over {report.task_count} tasks")
    print(f"report written to {args.out}")
    return EXIT_OK


# --- validate ---------------------------------------------------------------


def cmd_validate(args) -> int:
    if not Path(args.dataset).exists():
        raise ConfigError(f"dataset not found: {args.dataset}")
    violations = validate_dataset_file(args.dataset)
    for violation in violations:
        print(f"line {violation.lineno}: {violation.message}")
    print(f"{len(violations)} violations")
    return EXIT_OK if not violations else EXIT_DATA


# --- encode-env --------------------------------------------------------------


def cmd_encode_env(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read environment {args.input}: {exc}") from exc
    table = load_table(document)
    config = FlattenConfig(
        included_columns=tuple(c.strip() for c in args.columns.split(",") if c.strip()),
        precision=args.precision,
    )
    encoded = flatten(args.goal, table, config)
    if args.max_tokens is not None:
        result = truncate_encoding(encoded, args.max_tokens, table, config.separator)
        encoded = result.encoded
        if result.rows_dropped:
            print(f"dropped {result.rows_dropped} rows to fit {args.max_tokens} tokens",
                  file=sys.stderr)
    print(encoded)
    return EXIT_OK


# --- stats -------------------------------------------------------------------


def cmd_stats(args) -> int:
    records = load_dataset(args.dataset)
    stats = dataset_stats(records)
    doc = {
        split: {
            "task_count": s.task_count,
            "avg_goal_tokens": s.avg_goal_tokens,
            "avg_object_count": s.avg_object_count,
            "env_missing_count": s.env_missing_count,
            "avg_step_count": s.avg_step_count,
            "avg_step_tokens": s.avg_step_tokens,
        }
        for split, s in stats.items()
    }
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            header = ["split", "task_count", "avg_goal_tokens", "avg_object_count",
                      "env_missing_count", "avg_step_count", "avg_step_tokens"]
            writer.writerow(header)
            for split in sorted(stats):
                s = stats[split]
                writer.writerow([s.split, s.task_count, s.avg_goal_tokens,
                                 s.avg_object_count, s.env_missing_count,
                                 s.avg_step_count, s.avg_step_tokens])
    return EXIT_OK


# --- analyze -----------------------------------------------------------------


def cmd_analyze(args) -> int:
    try:
        with open(args.report, encoding="utf-8") as handle:
            report = EvalReport.from_dict(json.load(handle))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc

    boundaries = tuple(int(b.strip()) for b in args.buckets.split(",") if b.strip())
    histogram = length_error_from_lengths(
        [(t.gen_length, t.ref_length) for t in report.tasks]
    )
    buckets = bucket_by_length(report, boundaries)

    doc = {
        "length_error_histogram": {
            "bins": [{"delta": d, "count": c} for d, c in sorted(histogram.bins.items())],
            "total": histogram.total,
            "exact_match_share": histogram.exact_match_share,
        },
        "length_buckets": {
            "boundaries": list(buckets.boundaries),
            "buckets": [
                {"label": b.label, "lo": b.lo, "hi": b.hi, "count": b.count,
                 "means": dict(b.means)}
                for b in buckets.buckets
            ],
        },
    }
    payload = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)

    if args.csv:
        metrics = sorted(report.corpus_means)
        with open(args.csv, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["bucket", "count"] + metrics)
            for b in buckets.buckets:
                writer.writerow([b.label, b.count] + [b.means[m] for m in metrics])
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["task_id", "ref_length", "metric", "score"])
            for task in report.tasks:
                for metric in sorted(task.aggregates):
                    writer.writerow([task.task_id, task.ref_length, metric,
                                     repr(task.aggregates[metric])])
    return EXIT_OK


# --- plan --------------------------------------------------------------------


def cmd_plan(args) -> int:
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise ConfigError(f"no generator endpoint: pass --endpoint or set ${ENDPOINT_ENV_VAR}")
    if args.max_steps < 1:
        raise ConfigError("--max-steps must be >= 1")
    records = load_dataset(args.dataset)
    client = HttpGeneratorClient(endpoint, timeout=args.timeout, retries=args.retries)

    rows = []
    for record in records:
        env_encoding = None
        if args.with_env and record.environment is not None:
            env_encoding = encode_environment(record.environment)
        if args.mode == "iterative":
            trace = run_iterative(client, record, env_encoding, max_steps=args.max_steps)
        else:
            trace = run_single_pass(client, record, env_encoding)
        rows.append(
            {
                "task_id": record.task_id,
                "steps": list(trace.plan.steps),
                "call_count": trace.call_count,
                "truncated": trace.truncated_by_cap,
            }
        )

    with open(args.out, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    print(f"decoded {len(rows)} tasks to {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
