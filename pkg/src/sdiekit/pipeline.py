"""End-to-end two-stage pipeline: clean, vectorize, prescreen, classify.

A run consumes one JSON config and writes every artifact (models, reports,
the refined stage-2 dataset) under ``output_dir`` with the config hash,
seed, and vocabulary version embedded.  Reports contain no timestamps, so
two runs with the same config and seed produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import (
    Corpus,
    EXCLUDED,
    SDIE_LABELS,
    STAGE2_CLASSES,
    UNLABELED,
    ingest_events,
    map_stage2_label,
    split_train_test,
    stratified_split_indices,
    write_jsonl,
)
from .evaluation import EvalReport, confusion, crossval, metrics, render_report
from .patterns import PatternVocabulary, default_vocabulary, load_vocabulary, vectorize_corpus
from .prescreen import PrescreenHyperparams, PrescreenModel, prescreen, save_model, train
from .stage2 import (
    BuiltinEncoderConfig,
    Stage2Hyperparams,
    train_fold,
)
from .stage2 import predict_batch as stage2_predict_batch
from .stage2 import save_model as save_stage2_model
from .stage2.bridge import BridgeClient

log = logging.getLogger(__name__)

PRESCREEN_CLASSES = ("SDIE", "NON_SDIE")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: str):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class EncoderSettings:
    kind: str = "builtin"  # builtin | external
    dim: int = 64
    buckets: int = 2**15
    bridge_command: list[str] = field(default_factory=list)


@dataclass
class Stage2Settings:
    hyperparams: Stage2Hyperparams = field(default_factory=Stage2Hyperparams)
    encoder: EncoderSettings = field(default_factory=EncoderSettings)
    eval: str = "cv"  # cv | holdout
    cv_folds: int = 5
    source: str = "all"  # which split feeds stage 2: all | train | test
    holdout_fraction: float = 0.3


@dataclass
class PipelineConfig:
    corpus: str
    output_dir: str
    corpus_format: str = "jsonl"
    vocabulary: str | None = None
    seed: int = 0
    train_fraction: float = 0.7
    prescreen_hyperparams: PrescreenHyperparams = field(default_factory=PrescreenHyperparams)
    prescreen_threshold: float = 0.5
    stage2: Stage2Settings = field(default_factory=Stage2Settings)

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        ps = doc.pop("prescreen", {})
        threshold = ps.pop("threshold", 0.5) if isinstance(ps, dict) else 0.5
        s2 = doc.pop("stage2", {})
        hp = Stage2Hyperparams(**s2.get("hyperparams", {}))
        enc = EncoderSettings(**s2.get("encoder", {}))
        stage2 = Stage2Settings(
            hyperparams=hp,
            encoder=enc,
            eval=s2.get("eval", "cv"),
            cv_folds=s2.get("cv_folds", 5),
            source=s2.get("source", "all"),
            holdout_fraction=s2.get("holdout_fraction", 0.3),
        )
        return cls(
            prescreen_hyperparams=PrescreenHyperparams(**ps),
            prescreen_threshold=threshold,
            stage2=stage2,
            **doc,
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "corpus": self.corpus,
            "corpus_format": self.corpus_format,
            "output_dir": self.output_dir,
            "vocabulary": self.vocabulary,
            "seed": self.seed,
            "train_fraction": self.train_fraction,
            "prescreen": {"threshold": self.prescreen_threshold, **asdict(self.prescreen_hyperparams)},
            "stage2": {
                "hyperparams": asdict(self.stage2.hyperparams),
                "encoder": asdict(self.stage2.encoder),
                "eval": self.stage2.eval,
                "cv_folds": self.stage2.cv_folds,
                "source": self.stage2.source,
                "holdout_fraction": self.stage2.holdout_fraction,
            },
        }

    def behavioral_dict(self) -> dict:
        """The config without ``output_dir``: what the run computes, not
        where it lands.  Embedded in artifacts and hashed."""
        doc = self.to_dict()
        doc.pop("output_dir")
        return doc

    def hash(self) -> str:
        canonical = json.dumps(self.behavioral_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def build_refined_dataset(
    corpus: Corpus, suspected_ids: set[str]
) -> tuple[list, list[str]]:
    """Events kept by the prescreener, with stage-2 labels.

    EXCLUDED types (too rare to learn) are dropped; ISOL and FLOW arrive
    merged through the label map.  Returns (events, stage2 labels).
    """
    events = []
    labels = []
    for e in corpus:
        if e.id not in suspected_ids:
            continue
        label = map_stage2_label(e.raw_label)
        if label == EXCLUDED:
            continue
        events.append(e)
        labels.append(label)
    return events, labels


def _require_labeled(corpus: Corpus) -> None:
    unlabeled = sum(1 for e in corpus if e.raw_label == UNLABELED)
    if unlabeled:
        raise ValueError(f"{unlabeled} event(s) are unlabeled; annotate them first")


def _binary_truth(corpus: Corpus) -> list[str]:
    return ["SDIE" if e.raw_label in SDIE_LABELS else "NON_SDIE" for e in corpus]


def prescreen_report(corpus: Corpus, result) -> EvalReport:
    truth = _binary_truth(corpus)
    predicted = ["SDIE" if d else "NON_SDIE" for d in result.decisions]
    return metrics(confusion(truth, predicted, PRESCREEN_CLASSES))


def _builtin_trainer(config: PipelineConfig) -> Callable:
    settings = config.stage2
    hp = replace(settings.hyperparams, seed=config.seed)

    def trainer(texts: Sequence[str], labels: Sequence[str]):
        model = train_fold(
            texts,
            labels,
            hyperparams=hp,
            encoder_config=BuiltinEncoderConfig(
                dim=settings.encoder.dim, buckets=settings.encoder.buckets
            ),
        )

        def predict(test_texts: Sequence[str]) -> list[str]:
            return stage2_predict_batch(model, test_texts)[0]

        return predict

    return trainer


def _external_trainer(config: PipelineConfig, client: BridgeClient) -> Callable:
    hp = replace(config.stage2.hyperparams, seed=config.seed)

    def trainer(texts: Sequence[str], labels: Sequence[str]):
        class_idx = [STAGE2_CLASSES.index(lab) for lab in labels]
        response = client.finetune(
            texts,
            class_idx,
            hyperparams={
                "learning_rate": hp.resolved_lr("external_bridge"),
                "max_epochs": hp.max_epochs,
                "dropout_rate": hp.dropout_rate,
                "patience": hp.patience,
                "seed": hp.seed,
            },
        )
        W = np.array(response["head"]["W"], dtype=float)
        c = np.array(response["head"]["c"], dtype=float)
        handle = response["handle"]

        def predict(test_texts: Sequence[str]) -> list[str]:
            reprs = client.encode(test_texts, model=handle)
            picks = (reprs @ W + c).argmax(axis=1)
            return [STAGE2_CLASSES[i] for i in picks]

        return predict

    return trainer


@dataclass
class RunResult:
    output_dir: Path
    report_paths: list[Path]
    stats: dict


def run_pipeline(config: PipelineConfig) -> RunResult:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    provenance = {
        "config_hash": config.hash(),
        "seed": config.seed,
        "vocabulary_version": None,  # filled once the vocabulary is loaded
    }
    run_doc: dict = {
        "status": "incomplete",
        "provenance": provenance,
        "config": config.behavioral_dict(),
    }
    run_path = out / "run.json"
    _write_json(run_path, run_doc)

    stage = "ingest"
    try:
        raw = Path(config.corpus).read_bytes()
        report = ingest_events(raw, format=config.corpus_format)
        corpus = report.corpus
        if len(corpus) == 0:
            raise ValueError("empty corpus")
        if report.row_errors:
            log.warning("%d malformed rows skipped during ingest", len(report.row_errors))
        _require_labeled(corpus)

        stage = "vocabulary"
        vocab = (
            load_vocabulary(Path(config.vocabulary))
            if config.vocabulary
            else default_vocabulary()
        )
        provenance["vocabulary_version"] = f"{vocab.name}-{vocab.version}"

        stage = "vectorize"
        features = vectorize_corpus(corpus.level1_texts(), vocab)

        stage = "split"
        train_corpus, test_corpus = split_train_test(corpus, config.train_fraction, config.seed)
        index_of = {e.id: i for i, e in enumerate(corpus)}
        train_rows = np.array([index_of[e.id] for e in train_corpus], dtype=int)
        test_rows = np.array([index_of[e.id] for e in test_corpus], dtype=int)

        stage = "train-prescreen"
        y = np.array([1.0 if lab == "SDIE" else 0.0 for lab in _binary_truth(corpus)])
        # Component seeds all derive from the run seed so one knob pins the run.
        hp = replace(config.prescreen_hyperparams, seed=config.seed)
        model, trace = train(
            features[train_rows],
            y[train_rows],
            hyperparams=hp,
            threshold=config.prescreen_threshold,
            vocabulary_version=provenance["vocabulary_version"],
        )
        save_model(model, out / "prescreen_model.json")

        stage = "prescreen"
        results = {
            "train": prescreen(model, features[train_rows]),
            "test": prescreen(model, features[test_rows]),
        }
        split_corpora = {"train": train_corpus, "test": test_corpus}
        prescreen_reports = {
            name: prescreen_report(split_corpora[name], res) for name, res in results.items()
        }
        prescreen_txt = "\n".join(
            f"[{name} set]\n" + render_report(prescreen_reports[name], "binary_table")
            for name in ("train", "test")
        )
        _write_text(out / "prescreen_report.txt", _with_provenance_header(prescreen_txt, provenance))
        _write_json(
            out / "prescreen_report.json",
            {
                "provenance": provenance,
                "train": prescreen_reports["train"].to_dict(),
                "test": prescreen_reports["test"].to_dict(),
            },
        )

        stage = "refine"
        suspected_ids: set[str] = set()
        sources = ("train", "test") if config.stage2.source == "all" else (config.stage2.source,)
        for name in sources:
            rows = train_rows if name == "train" else test_rows
            suspected_rows = rows[results[name].decisions]
            suspected_ids.update(corpus.events[i].id for i in suspected_rows)
        refined_events, refined_labels = build_refined_dataset(corpus, suspected_ids)
        if not refined_events:
            raise ValueError("prescreening left no events for stage 2")
        # The artifact keeps the raw label (round-trippable through ingest)
        # and carries the merged class in an extra field.
        annotated = [
            replace(e, extras={**e.extras, "stage2_label": lab})
            for e, lab in zip(refined_events, refined_labels)
        ]
        _write_text(out / "refined.jsonl", write_jsonl(annotated, meta=provenance))

        sdie_before = sum(1 for e in corpus if e.raw_label in SDIE_LABELS) / len(corpus)
        sdie_after = sum(1 for lab in refined_labels if lab != "NON_SDIE") / len(refined_labels)

        stage = "stage2"
        texts = [e.level2_text for e in refined_events]
        client = None
        if config.stage2.encoder.kind == "external":
            if not config.stage2.encoder.bridge_command:
                raise ValueError("external encoder selected but no bridge_command configured")
            client = BridgeClient(config.stage2.encoder.bridge_command)
            trainer = _external_trainer(config, client)
        else:
            trainer = _builtin_trainer(config)
        try:
            if config.stage2.eval == "cv":
                cv = crossval(
                    texts,
                    refined_labels,
                    k=config.stage2.cv_folds,
                    trainer=trainer,
                    seed=config.seed,
                    classes=STAGE2_CLASSES,
                )
                stage2_report = cv.report
                stage2_doc = {
                    "provenance": provenance,
                    "mode": "cv",
                    "folds": config.stage2.cv_folds,
                    "accumulated": cv.report.to_dict(),
                    "per_fold": [r.to_dict() for r in cv.fold_reports],
                }
            elif config.stage2.eval == "holdout":
                lab_arr = list(refined_labels)
                tr, te = stratified_split_indices(
                    lab_arr, 1.0 - config.stage2.holdout_fraction, config.seed
                )
                predict = trainer([texts[i] for i in tr], [lab_arr[i] for i in tr])
                preds = predict([texts[i] for i in te])
                cm = confusion([lab_arr[i] for i in te], preds, STAGE2_CLASSES)
                stage2_report = metrics(cm)
                stage2_doc = {
                    "provenance": provenance,
                    "mode": "holdout",
                    "report": stage2_report.to_dict(),
                }
            else:
                raise ValueError(f"unknown stage2 eval mode: {config.stage2.eval!r}")

            _write_text(
                out / "stage2_report.txt",
                _with_provenance_header(render_report(stage2_report, "four_class_table"), provenance),
            )
            _write_json(out / "stage2_report.json", stage2_doc)

            stage = "stage2-final-fit"
            if config.stage2.encoder.kind == "builtin":
                final = train_fold(
                    texts,
                    refined_labels,
                    hyperparams=replace(config.stage2.hyperparams, seed=config.seed),
                    encoder_config=BuiltinEncoderConfig(
                        dim=config.stage2.encoder.dim, buckets=config.stage2.encoder.buckets
                    ),
                )
                save_stage2_model(final, out / "stage2_model.npz")
        finally:
            if client is not None:
                client.shutdown()

        stage = "summarize"
        run_doc["status"] = "complete"
        run_doc["stats"] = {
            "corpus_size": len(corpus),
            "class_counts": dict(sorted(corpus.class_counts.items())),
            "train_size": len(train_corpus),
            "test_size": len(test_corpus),
            "exclusion_rate": {name: results[name].exclusion_rate for name in results},
            "refined_size": len(refined_events),
            "refined_class_counts": {
                lab: refined_labels.count(lab) for lab in STAGE2_CLASSES if lab in refined_labels
            },
            "sdie_share_before": sdie_before,
            "sdie_share_after": sdie_after,
            "prescreen_final_loss": trace[-1],
            "stage2_accuracy": stage2_report.accuracy,
        }
        _write_json(run_path, run_doc)
    except Exception as exc:
        run_doc["status"] = "incomplete"
        run_doc["failed_stage"] = stage
        run_doc["error"] = str(exc)
        _write_json(run_path, run_doc)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(stage, str(exc)) from exc

    return RunResult(
        output_dir=out,
        report_paths=[
            out / "prescreen_report.txt",
            out / "prescreen_report.json",
            out / "stage2_report.txt",
            out / "stage2_report.json",
            run_path,
        ],
        stats=run_doc["stats"],
    )


def _with_provenance_header(body: str, provenance: dict) -> str:
    head = (
        f"# config={provenance['config_hash']} seed={provenance['seed']} "
        f"vocabulary={provenance['vocabulary_version']}\n"
    )
    return head + body


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
