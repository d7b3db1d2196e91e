"""Command-line surface.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 internal error.  Progress goes to stderr; machine-readable results go to
the files named by ``--out``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .corpus import (
    EXCLUDED,
    SDIE_LABELS,
    STAGE2_CLASSES,
    ingest_events,
    map_stage2_label,
    write_jsonl,
)
from .evaluation import confusion, crossval, metrics, render_report
from .patterns import (
    VocabularyError,
    default_vocabulary,
    load_vocabulary,
    pattern_distribution,
    vectorize_corpus,
)
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .prescreen import PrescreenHyperparams
from .prescreen import load_model as load_prescreen_model
from .prescreen import prescreen as apply_prescreen
from .prescreen import save_model as save_prescreen_model
from .prescreen import train as train_prescreen
from .stage2 import (
    BuiltinEncoderConfig,
    Stage2Hyperparams,
    predict_batch,
    train_fold,
)
from .stage2 import load_model as load_stage2_model
from .stage2 import save_model as save_stage2_model
from .synth import SyntheticSpec, generate_synthetic

log = logging.getLogger("sdiekit")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _load_corpus(path: str, fmt: str = "jsonl"):
    report = ingest_events(Path(path).read_bytes(), format=fmt)
    if report.row_errors:
        log.warning("%d malformed rows skipped", len(report.row_errors))
    if report.label_warnings:
        log.warning("%d unknown labels mapped to UNLABELED", report.label_warnings)
    return report.corpus


def _load_vocab(path: str | None):
    return load_vocabulary(Path(path)) if path else default_vocabulary()


def _write_json(path: str, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def cmd_ingest(args) -> int:
    report = ingest_events(Path(args.infile).read_bytes(), format=args.format)
    Path(args.out).write_text(write_jsonl(report.corpus), encoding="utf-8")
    log.info(
        "ingested %d events (%d label warnings, %d bad rows): %s",
        len(report.corpus),
        report.label_warnings,
        len(report.row_errors),
        dict(sorted(report.corpus.class_counts.items())),
    )
    for row_no, message in report.row_errors:
        log.warning("row %d: %s", row_no, message)
    return 0


def cmd_clean(args) -> int:
    corpus = _load_corpus(args.infile, args.format)
    lines = []
    for e in corpus:
        lines.append(
            json.dumps(
                {
                    "id": e.id,
                    "text": e.raw_text,
                    "level1_text": e.level1_text,
                    "level2_text": e.level2_text,
                    "label": None if e.raw_label == "UNLABELED" else e.raw_label,
                },
                sort_keys=True,
            )
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("cleaned %d events", len(corpus))
    return 0


def cmd_vectorize(args) -> int:
    corpus = _load_corpus(args.infile)
    vocab = _load_vocab(args.vocab)
    features = vectorize_corpus(corpus.level1_texts(), vocab)
    lines = [
        json.dumps({"id": e.id, "counts": row.tolist()}, sort_keys=True)
        for e, row in zip(corpus, features)
    ]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("vectorized %d events against %d patterns", len(corpus), len(vocab))
    return 0


def cmd_patterns_stats(args) -> int:
    corpus = _load_corpus(args.infile)
    vocab = _load_vocab(args.vocab)
    features = vectorize_corpus(corpus.level1_texts(), vocab)
    labels = np.array(
        ["SDIE" if e.raw_label in SDIE_LABELS else "NON_SDIE" for e in corpus]
    )
    doc: dict = {"vocabulary": f"{vocab.name}-{vocab.version}", "groups": {}}
    for group in ("SDIE", "NON_SDIE"):
        rows = features[labels == group]
        if rows.shape[0]:
            doc["groups"][group] = pattern_distribution(rows).tolist()
    _write_json(args.out, doc)
    log.info("pattern distribution written for %d events", len(corpus))
    return 0


def cmd_train_prescreen(args) -> int:
    corpus = _load_corpus(args.infile)
    vocab = _load_vocab(args.vocab)
    features = vectorize_corpus(corpus.level1_texts(), vocab)
    y = np.array([1.0 if e.raw_label in SDIE_LABELS else 0.0 for e in corpus])
    hp = PrescreenHyperparams(
        alpha=args.alpha,
        class_weight_non_sdie=args.class_weight_non_sdie,
        class_weight_sdie=args.class_weight_sdie,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    model, trace = train_prescreen(
        features, y, hp, threshold=args.threshold,
        vocabulary_version=f"{vocab.name}-{vocab.version}",
    )
    save_prescreen_model(model, args.out)
    log.info("trained prescreener on %d events; final loss %.6f", len(corpus), trace[-1])
    return 0


def cmd_prescreen(args) -> int:
    corpus = _load_corpus(args.infile)
    model = load_prescreen_model(args.model)
    vocab = _load_vocab(args.vocab)
    features = vectorize_corpus(corpus.level1_texts(), vocab)
    result = apply_prescreen(model, features)
    lines = [
        json.dumps(
            {"id": e.id, "probability": float(p), "suspected": bool(d)}, sort_keys=True
        )
        for e, p, d in zip(corpus, result.probabilities, result.decisions)
    ]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info(
        "prescreened %d events: %d suspected, exclusion rate %.1f%%",
        len(corpus),
        result.suspected_indices.size,
        100.0 * result.exclusion_rate,
    )
    return 0


def _stage2_dataset(corpus):
    texts, labels = [], []
    dropped = 0
    for e in corpus:
        stage2 = e.extras.get("stage2_label") or map_stage2_label(e.raw_label)
        if stage2 == EXCLUDED:
            dropped += 1
            continue
        texts.append(e.level2_text)
        labels.append(stage2)
    if dropped:
        log.warning("%d events with excluded types dropped", dropped)
    return texts, labels


def _stage2_hp(args) -> Stage2Hyperparams:
    return Stage2Hyperparams(
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        dropout_rate=args.dropout,
        patience=args.patience,
        seed=args.seed,
    )


def cmd_train_stage2(args) -> int:
    corpus = _load_corpus(args.infile)
    texts, labels = _stage2_dataset(corpus)
    model = train_fold(
        texts,
        labels,
        hyperparams=_stage2_hp(args),
        encoder_config=BuiltinEncoderConfig(dim=args.dim, buckets=args.buckets),
    )
    save_stage2_model(model, args.out)
    md = model.metadata
    log.info(
        "trained stage-2 on %d events (epochs run %d, early stop %s)",
        len(texts),
        md.epochs_run,
        md.early_stop_epoch,
    )
    return 0


def cmd_classify(args) -> int:
    corpus = _load_corpus(args.infile)
    model = load_stage2_model(args.model)
    labels, probs = predict_batch(model, corpus.level2_texts())
    lines = [
        json.dumps(
            {"id": e.id, "label": lab, "probabilities": row.tolist()}, sort_keys=True
        )
        for e, lab, row in zip(corpus, labels, probs)
    ]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("classified %d events", len(corpus))
    return 0


def cmd_crossval(args) -> int:
    corpus = _load_corpus(args.infile)
    texts, labels = _stage2_dataset(corpus)
    hp = _stage2_hp(args)
    enc = BuiltinEncoderConfig(dim=args.dim, buckets=args.buckets)

    def trainer(train_texts, train_labels):
        model = train_fold(train_texts, train_labels, hyperparams=hp, encoder_config=enc)
        return lambda t: predict_batch(model, t)[0]

    result = crossval(
        texts, labels, k=args.k, trainer=trainer, seed=args.seed,
        classes=STAGE2_CLASSES,
    )
    _write_json(
        args.out,
        {
            "folds": args.k,
            "accumulated": result.report.to_dict(),
            "per_fold": [r.to_dict() for r in result.fold_reports],
        },
    )
    if args.text_out:
        Path(args.text_out).write_text(
            render_report(result.report, "four_class_table"), encoding="utf-8"
        )
    log.info("%d-fold accuracy %.3f", args.k, result.report.accuracy)
    return 0


def _read_labels(path: str) -> dict[str, str]:
    rows = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if "_meta" in obj:
            continue
        rows[str(obj["id"])] = obj["label"]
    return rows


def cmd_evaluate(args) -> int:
    predicted = _read_labels(args.pred)
    truth = _read_labels(args.truth)
    if set(predicted) != set(truth):
        raise ValueError("prediction and truth files cover different event ids")
    ids = sorted(truth)
    truths = [truth[i] for i in ids]
    preds = [predicted[i] for i in ids]
    classes = args.classes.split(",") if args.classes else sorted(set(truths) | set(preds))
    report = metrics(confusion(truths, preds, classes))
    _write_json(args.out, report.to_dict())
    log.info("accuracy %.1f%% over %d events", report.accuracy_percent, report.n)
    return 0


def cmd_synth(args) -> int:
    doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    if args.seed is not None:
        doc["seed"] = args.seed
    spec = SyntheticSpec.from_dict(doc)
    corpus = generate_synthetic(spec)
    spec_hash = hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode("utf-8")
    ).hexdigest()[:16]
    meta = {"generator": "synthetic", "seed": spec.seed, "spec_hash": spec_hash}
    Path(args.out).write_text(write_jsonl(corpus, meta=meta), encoding="utf-8")
    log.info("generated %d events: %s", len(corpus), dict(sorted(corpus.class_counts.items())))
    return 0


def cmd_run(args) -> int:
    config = PipelineConfig.from_json(args.config)
    if args.out:
        config.output_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    result = run_pipeline(config)
    log.info("run complete: %s", result.output_dir)
    for key, value in sorted(result.stats.items()):
        log.info("  %s = %s", key, value)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .review.service import create_app
    from .review.store import ReviewStore

    tokens = None
    if args.tokens:
        tokens = json.loads(Path(args.tokens).read_text(encoding="utf-8"))
    store = ReviewStore(args.data, lease_seconds=args.lease_seconds)
    app = create_app(store, tokens=tokens)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="sdiekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="load a corpus file, clean it, write normalized JSONL")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("clean", help="emit level-1/level-2 cleaned text per event")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("vectorize", help="write per-event pattern count vectors")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vocab")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vectorize)

    p = sub.add_parser("patterns-stats", help="per-pattern average counts by event group")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vocab")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_patterns_stats)

    p = sub.add_parser("train-prescreen", help="train the stage-1 binary prescreener")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vocab")
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=1e-4)
    p.add_argument("--class-weight-sdie", type=float, default=0.981)
    p.add_argument("--class-weight-non-sdie", type=float, default=0.019)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_prescreen)

    p = sub.add_parser("prescreen", help="apply a trained prescreener to a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vocab")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prescreen)

    def add_stage2_args(p):
        p.add_argument("--learning-rate", type=float, default=None)
        p.add_argument("--max-epochs", type=int, default=50)
        p.add_argument("--batch-size", type=int, default=32)
        p.add_argument("--dropout", type=float, default=0.3)
        p.add_argument("--patience", type=int, default=5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dim", type=int, default=64)
        p.add_argument("--buckets", type=int, default=2**15)

    p = sub.add_parser("train-stage2", help="train the four-class classifier")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    add_stage2_args(p)
    p.set_defaults(func=cmd_train_stage2)

    p = sub.add_parser("classify", help="classify events with a trained stage-2 model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("crossval", help="k-fold cross-validation of the stage-2 classifier")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--text-out")
    add_stage2_args(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("evaluate", help="confusion-matrix metrics from prediction/truth files")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--classes")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="execute the full two-stage pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="start the review HTTP service")
    p.add_argument("--data", required=True, help="append-only review log path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--tokens", help="JSON file mapping bearer tokens to reviewer names")
    p.add_argument("--lease-seconds", type=float, default=600.0)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (
        ValueError,
        VocabularyError,
        PipelineError,
        FileNotFoundError,
        json.JSONDecodeError,
        KeyError,
    ) as exc:
        log.error("error: %s", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 3
        log.error("internal error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
