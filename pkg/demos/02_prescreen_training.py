#!/usr/bin/env python3
"""Train the stage-1 prescreener on a synthetic imbalanced corpus.

Run: python demos/02_prescreen_training.py
"""

import numpy as np

from sdiekit import default_vocabulary, vectorize_corpus
from sdiekit.corpus import SDIE_LABELS, split_train_test
from sdiekit.evaluation import confusion, metrics, render_report
from sdiekit.prescreen import PrescreenHyperparams, prescreen, train
from sdiekit.synth import SyntheticSpec, generate_synthetic

# 2% true events, a pinch of noise, and a few benign reports that talk
# about the same systems (the future false positives).
spec = SyntheticSpec(
    counts={"ISOL": 28, "FLOW": 24, "LOAC": 92, "LOOP": 56, "NON_SDIE": 9800},
    noise_rate=0.05,
    lookalike_rate=0.02,
    seed=11,
)
corpus = generate_synthetic(spec)
print(f"corpus: {len(corpus)} events, {dict(sorted(corpus.class_counts.items()))}\n")

vocab = default_vocabulary()
train_corpus, test_corpus = split_train_test(corpus, 0.7, seed=11)
X_train = vectorize_corpus(train_corpus.level1_texts(), vocab)
X_test = vectorize_corpus(test_corpus.level1_texts(), vocab)
y_train = np.array([1.0 if e.raw_label in SDIE_LABELS else 0.0 for e in train_corpus])
y_test = np.array([1.0 if e.raw_label in SDIE_LABELS else 0.0 for e in test_corpus])

hp = PrescreenHyperparams(seed=11)  # alpha 1e-4, class weights 0.019 / 0.981
model, trace = train(X_train, y_train, hp)
print(f"trained {hp.epochs} epochs; loss {trace[0]:.2f} -> {trace[-1]:.2f}")

result = prescreen(model, X_test)
truth = ["SDIE" if v else "NON_SDIE" for v in y_test]
predicted = ["SDIE" if d else "NON_SDIE" for d in result.decisions]
report = metrics(confusion(truth, predicted, ("SDIE", "NON_SDIE")))
print(f"test exclusion rate: {100 * result.exclusion_rate:.1f}%\n")
print(render_report(report, "binary_table"))
