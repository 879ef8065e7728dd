"""Command-line entry point for the corpus pipeline, detector training,
evaluation, and the chat relay service.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 backend or
model failure. Every successful run prints one machine-readable JSON summary
line; outputs written before a failure are removed.
"""

import argparse
import json
import shutil
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

from . import coherence, corpus, evaluation, labeling
from .bleu import SMOOTHING_METHODS, TOKENIZERS, BleuConfig
from .config import get_key, load_config
from .errors import BackendError, ChatQEError, ModelError, ValidationError
from .jsonl import read_records


class _UsageError(ValidationError):
    """Raised for bad flags so they exit with the validation code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class _Outputs:
    """Tracks declared output paths so failures can remove partial results."""

    def __init__(self):
        self.paths = []

    def declare(self, path):
        if path:
            self.paths.append(Path(path))
        return path

    def cleanup(self):
        for path in self.paths:
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            elif path.exists():
                path.unlink()


def _load_optional_config(args):
    return load_config(args.config) if getattr(args, "config", None) else {}


def cmd_filter_chats(args, outputs):
    ratings = coherence.read_coherence_ratings(args.ratings)
    scores = coherence.score_chats(ratings)
    selected = coherence.select_top(scores, k=args.top, min_votes=args.min_coherent)
    outputs.declare(args.output)
    Path(args.output).write_text(json.dumps(selected, indent=2) + "\n", encoding="utf-8")
    summary = {
        "command": "filter-chats",
        "rated_chats": len(scores),
        "selected": len(selected),
        "output": args.output,
    }
    if args.chats:
        if not args.filtered_chats:
            raise ValidationError("--chats requires --filtered-chats for the retained subset")
        keep = set(selected)
        retained = [chat for chat in corpus.read_chats(args.chats) if chat.chat_id in keep]
        outputs.declare(args.filtered_chats)
        corpus.write_chats(retained, args.filtered_chats)
        summary["filtered_chats"] = args.filtered_chats
        summary["retained"] = len(retained)
    return summary


def cmd_translate_corpus(args, outputs):
    from . import backends

    chats = corpus.read_chats(args.chats)
    if not chats:
        raise ValidationError("no chats to translate")
    directions = {chat.direction for chat in chats}
    if len(directions) > 1:
        raise ValidationError(
            f"chats mix directions {sorted(directions)}; translate one direction at a time"
        )
    src_lang, tgt_lang = directions.pop().split("-")
    options = dict(_load_optional_config(args).get("backend", {}).get(args.backend, {}))
    if args.seed is not None:
        options["seed"] = args.seed
    backend = backends.build_backend(args.backend, options, src_lang, tgt_lang)
    candidates = backends.generate_candidates(chats, [backend])
    outputs.declare(args.output)
    corpus.write_candidates(candidates, args.output)
    return {
        "command": "translate-corpus",
        "backend": args.backend,
        "chats": len(chats),
        "candidates": len(candidates),
        "output": args.output,
    }


def cmd_aggregate_labels(args, outputs):
    ratings = labeling.read_translation_ratings(args.ratings)
    verdicts = labeling.aggregate_verdicts(ratings, rule=args.rule)
    candidates = corpus.read_candidates(args.candidates)
    labeled = labeling.label_candidates(candidates, verdicts)
    outputs.declare(args.output)
    corpus.write_candidates(labeled, args.output)
    erroneous = sum(1 for candidate in labeled if candidate.verdict == corpus.ERRONEOUS)
    return {
        "command": "aggregate-labels",
        "rule": args.rule,
        "ratings": len(ratings),
        "candidates": len(labeled),
        "erroneous": erroneous,
        "output": args.output,
    }


def cmd_build_dataset(args, outputs):
    chats = corpus.read_chats(args.chats)
    candidates = corpus.read_candidates(args.candidates)
    examples = corpus.build_quads(chats, candidates, ctx_policy=args.ctx_policy)
    outputs.declare(args.output)
    corpus.write_examples(examples, args.output)
    stats = labeling.compute_stats(candidates, chats)
    if args.stats:
        outputs.declare(args.stats)
        Path(args.stats).write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    per_direction = {
        direction: direction_stats.example_count
        for direction, direction_stats in stats.directions.items()
    }
    return {
        "command": "build-dataset",
        "examples": len(examples),
        "per_direction": per_direction,
        "deleted": stats.deleted_total,
        "output": args.output,
    }


def cmd_train_detector(args, outputs):
    from .detector import training

    examples = corpus.read_examples(args.examples)
    section = dict(get_key(_load_optional_config(args), "detector", {}) or {})
    allowed = {field.name for field in dataclass_fields(training.DetectorConfig)}
    section = {key: value for key, value in section.items() if key in allowed}
    for flag in ("encoder_id", "epochs", "batch_size", "max_length", "threshold", "seed"):
        value = getattr(args, flag)
        if value is not None:
            section[flag] = value
    detector_config = training.DetectorConfig(**section)
    model = training.train(examples, detector_config)
    outputs.declare(args.output)
    model.save(args.output)
    return {
        "command": "train-detector",
        "examples": len(examples),
        "steps": model.manifest.get("steps"),
        "encoder_id": detector_config.encoder_id,
        "model": args.output,
    }


def _aligned_predictions(examples, records):
    by_key = {}
    for record in records:
        key = (record.chat_id, record.index, record.origin)
        if key in by_key:
            raise ValidationError(f"duplicate prediction for {key}")
        by_key[key] = record
    aligned = []
    for example in examples:
        quad = example.quad
        key = (quad.chat_id, quad.index, quad.origin)
        if key not in by_key:
            raise ValidationError(f"no prediction for example {key}")
        aligned.append(by_key[key])
    return aligned


def cmd_evaluate(args, outputs):
    examples = corpus.read_examples(args.examples)
    if bool(args.predictions) == bool(args.model):
        raise ValidationError("provide exactly one of --predictions or --model")
    if args.predictions:
        predictions = _aligned_predictions(examples, evaluation.read_predictions(args.predictions))
    else:
        from .detector.model import load_model

        model = load_model(args.model)
        raw = model.predict_batch([example.quad for example in examples])
        predictions = [
            evaluation.PredictionRecord(
                chat_id=example.quad.chat_id,
                index=example.quad.index,
                origin=example.quad.origin,
                direction=example.quad.direction,
                prob_erroneous=prediction.prob_erroneous,
                predicted_label=prediction.label,
            )
            for example, prediction in zip(examples, raw)
        ]
        if args.predictions_out:
            outputs.declare(args.predictions_out)
            evaluation.write_predictions(args.predictions_out, predictions)
    reports = evaluation.build_report(examples, predictions)
    outputs.declare(args.output_json)
    outputs.declare(args.output_text)
    evaluation.write_report(reports, args.output_json, args.output_text)
    return {
        "command": "evaluate",
        "examples": len(examples),
        "directions": {
            direction: {
                "accuracy": report.accuracy,
                "precision": report.precision,
                "recall": report.recall,
                "f1": report.f1,
            }
            for direction, report in sorted(reports.items())
        },
        "report_json": args.output_json,
        "report_text": args.output_text,
    }


def cmd_report_bleu(args, outputs):
    examples = corpus.read_examples(args.examples)
    references = {}
    for line_no, record in read_records(args.references):
        try:
            references[(record["chat_id"], record["index"])] = record["text"]
        except KeyError as exc:
            raise ValidationError(f"{args.references}:{line_no}: missing field {exc}") from exc
    predictions = None
    if args.predictions:
        records = _aligned_predictions(examples, evaluation.read_predictions(args.predictions))
        predictions = [record.predicted_label for record in records]
    cfg = BleuConfig(
        tokenizer=args.tokenizer,
        max_ngram=args.max_ngram,
        smoothing=args.smoothing,
        smooth_value=args.smooth_value,
    )
    report = evaluation.bleu_vs_label_report(
        examples, references, cfg=cfg, threshold=args.threshold, predictions=predictions
    )
    outputs.declare(args.output)
    Path(args.output).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return {
        "command": "report-bleu",
        "examples": len(examples),
        "threshold": args.threshold,
        "flagged": len(report["items"]),
        "output": args.output,
    }


def cmd_serve(args, outputs):
    from . import backends
    from .service.app import run_server
    from .service.state import ChatService, SessionStore

    config = _load_optional_config(args)
    port = args.port if args.port is not None else get_key(config, "server.port", 8000)
    storage = args.storage_dir or get_key(config, "storage.dir", "chat-sessions")
    model_path = args.model or get_key(config, "detector.model_path")
    threshold = (
        args.threshold if args.threshold is not None else get_key(config, "detector.threshold", 0.5)
    )
    translators = {}
    for name, options in (config.get("backend") or {}).items():
        options = dict(options)
        src_lang = options.pop("src_lang", None)
        tgt_lang = options.pop("tgt_lang", None)
        if not src_lang or not tgt_lang:
            raise ValidationError(f"backend {name!r} needs src_lang and tgt_lang for serving")
        backend = backends.build_backend(name, options, src_lang, tgt_lang)
        translators[f"{src_lang}-{tgt_lang}"] = backend
    detector = None
    if model_path:
        from .detector.model import load_model

        detector = load_model(model_path)
    service = ChatService(
        SessionStore(storage), translators=translators, detector=detector, threshold=threshold
    )
    print(
        json.dumps(
            {"command": "serve", "port": port, "storage": str(storage), "model": model_path}
        ),
        flush=True,
    )
    run_server(service, port)
    return None


def build_parser():
    parser = _Parser(prog="chatqe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON or YAML config file")
        p.add_argument("--seed", type=int, default=None, help="seed for all randomness")

    p = sub.add_parser("filter-chats", help="select the most coherent chats from crowd ratings")
    common(p)
    p.add_argument("--ratings", required=True)
    p.add_argument("--top", type=int, default=200)
    p.add_argument("--min-coherent", type=int, default=7)
    p.add_argument("--output", required=True, help="JSON file of selected chat ids")
    p.add_argument("--chats", help="optional chats file to filter")
    p.add_argument("--filtered-chats", help="where to write the retained chats")
    p.set_defaults(func=cmd_filter_chats)

    p = sub.add_parser("translate-corpus", help="produce translation candidates for every utterance")
    common(p)
    p.add_argument("--chats", required=True)
    p.add_argument("--backend", required=True, help="backend name (configured under backend.<name>)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_translate_corpus)

    p = sub.add_parser("aggregate-labels", help="aggregate crowd verdicts onto candidates")
    common(p)
    p.add_argument("--ratings", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--rule", default="majority", choices=sorted(labeling.AGGREGATION_RULES))
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_aggregate_labels)

    p = sub.add_parser("build-dataset", help="build labeled detector examples from candidates")
    common(p)
    p.add_argument("--chats", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--ctx-policy", default="best-correct", choices=sorted(corpus.CONTEXT_POLICIES))
    p.add_argument("--output", required=True)
    p.add_argument("--stats", help="optional JSON file for dataset statistics")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train-detector", help="fine-tune the detector on labeled examples")
    common(p)
    p.add_argument("--examples", required=True)
    p.add_argument("--output", required=True, help="model artifact directory")
    p.add_argument("--encoder-id", dest="encoder_id")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-length", dest="max_length", type=int)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser("evaluate", help="score predictions against labeled examples")
    common(p)
    p.add_argument("--examples", required=True)
    p.add_argument("--predictions", help="predictions file to evaluate")
    p.add_argument("--model", help="model directory to run instead of --predictions")
    p.add_argument("--predictions-out", help="with --model, also write predictions here")
    p.add_argument("--output-json", default="eval_report.json")
    p.add_argument("--output-text", default="eval_report.txt")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report-bleu", help="surface high-BLEU examples flagged erroneous")
    common(p)
    p.add_argument("--examples", required=True)
    p.add_argument("--references", required=True, help="JSONL of chat_id/index/text references")
    p.add_argument("--predictions", help="optional predictions; default flags by gold label")
    p.add_argument("--threshold", type=float, default=70.0)
    p.add_argument("--tokenizer", default="ws-punct", choices=sorted(TOKENIZERS))
    p.add_argument("--smoothing", default="add-k", choices=sorted(SMOOTHING_METHODS))
    p.add_argument("--max-ngram", dest="max_ngram", type=int, default=4)
    p.add_argument("--smooth-value", dest="smooth_value", type=float, default=1.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_report_bleu)

    p = sub.add_parser("serve", help="run the bilingual chat relay service")
    common(p)
    p.add_argument("--port", type=int)
    p.add_argument("--model", help="detector model directory")
    p.add_argument("--storage-dir")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outputs = _Outputs()
    try:
        summary = args.func(args, outputs)
    except (BackendError, ModelError) as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ChatQEError as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        outputs.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if summary is not None:
        print(json.dumps(summary, ensure_ascii=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
