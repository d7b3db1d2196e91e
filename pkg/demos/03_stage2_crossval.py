#!/usr/bin/env python3
"""Five-fold cross-validation of the four-class classifier on a refined
synthetic dataset (true events plus prescreen false positives).

Run: python demos/03_stage2_crossval.py
"""

from sdiekit.corpus import STAGE2_CLASSES, map_stage2_label
from sdiekit.evaluation import crossval, render_report
from sdiekit.stage2 import BuiltinEncoderConfig, Stage2Hyperparams, predict_batch, train_fold
from sdiekit.synth import SyntheticSpec, generate_synthetic

spec = SyntheticSpec(
    counts={"ISOL": 27, "FLOW": 23, "LOAC": 89, "LOOP": 54, "NON_SDIE": 314},
    lookalike_rate=1.0,  # every non-event here already fooled stage 1
    seed=21,
)
corpus = generate_synthetic(spec)
texts = corpus.level2_texts()
labels = [map_stage2_label(e.raw_label) for e in corpus]
print(f"refined dataset: {len(corpus)} events, "
      f"{ {c: labels.count(c) for c in STAGE2_CLASSES} }\n")

hp = Stage2Hyperparams(seed=21)  # dropout 0.3, up to 50 epochs, early stopping
encoder = BuiltinEncoderConfig()  # hashed embeddings, mean pooled


def trainer(train_texts, train_labels):
    model = train_fold(train_texts, train_labels, hyperparams=hp, encoder_config=encoder)
    md = model.metadata
    print(f"  fold trained: {md.epochs_run} epochs, "
          f"early stop at {md.early_stop_epoch}, holdout loss {md.best_holdout_loss:.4f}")
    return lambda batch: predict_batch(model, batch)[0]


result = crossval(texts, labels, k=5, trainer=trainer, seed=21, classes=STAGE2_CLASSES)
print(f"\nfold sizes: {[len(f) for f in result.fold_indices]}")
print(f"accumulated accuracy: {100 * result.report.accuracy:.1f}%\n")
print(render_report(result.report, "four_class_table"))
print("accumulated confusion matrix (rows = truth):")
print(result.matrix.counts)
