"""Two-stage classification of shutdown initiating events from event reports.

Stage 1 turns each report into a vector of keyword-pattern counts and
filters out non-events with a class-weighted logistic regression; stage 2
classifies the survivors into four event types with an encoder plus a
dropout/softmax head.  Everything is seeded and reproducible.
"""

from .corpus import (
    Corpus,
    EventRecord,
    RAW_LABELS,
    STAGE2_CLASSES,
    ingest_events,
    map_stage2_label,
    split_train_test,
    write_jsonl,
)
from .evaluation import ConfusionMatrix, EvalReport, confusion, crossval, metrics, render_report
from .patterns import (
    PatternVocabulary,
    count_sub_pattern,
    default_vocabulary,
    load_vocabulary,
    match_spans,
    pattern_distribution,
    vectorize,
    vectorize_corpus,
)
from .pipeline import PipelineConfig, run_pipeline
from .prescreen import PrescreenHyperparams, PrescreenModel, predict_probability, prescreen
from .synth import SyntheticSpec, generate_synthetic
from .text import clean_format, normalize, tokenize

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix",
    "Corpus",
    "EvalReport",
    "EventRecord",
    "PatternVocabulary",
    "PipelineConfig",
    "PrescreenHyperparams",
    "PrescreenModel",
    "RAW_LABELS",
    "STAGE2_CLASSES",
    "SyntheticSpec",
    "clean_format",
    "confusion",
    "count_sub_pattern",
    "crossval",
    "default_vocabulary",
    "generate_synthetic",
    "ingest_events",
    "load_vocabulary",
    "map_stage2_label",
    "match_spans",
    "metrics",
    "normalize",
    "pattern_distribution",
    "predict_probability",
    "prescreen",
    "render_report",
    "run_pipeline",
    "split_train_test",
    "tokenize",
    "vectorize",
    "vectorize_corpus",
    "write_jsonl",
]
