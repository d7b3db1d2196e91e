"""Confusion matrices, per-class metrics, stratified k-fold CV, reports.

Per-class precision, recall and F1 come straight from the one-vs-rest
counts of a shared confusion matrix (rows = truth, columns = prediction);
accuracy is the diagonal mass over the total.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


def _round1(x: float) -> float:
    """Half-up rounding to one decimal, the convention of printed tables."""
    return math.floor(x * 10.0 + 0.5) / 10.0


@dataclass
class ConfusionMatrix:
    classes: tuple[str, ...]
    counts: np.ndarray  # square, rows = truth, columns = prediction

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.classes)
        if self.counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def index(self, label: str) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise ValueError(f"unknown label: {label!r}") from None

    def one_vs_rest(self, label: str) -> tuple[int, int, int, int]:
        """(TP, FP, FN, TN) for ``label`` against all other classes."""
        c = self.index(label)
        tp = int(self.counts[c, c])
        fp = int(self.counts[:, c].sum()) - tp
        fn = int(self.counts[c, :].sum()) - tp
        tn = self.n - tp - fp - fn
        return tp, fp, fn, tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise ValueError("cannot add matrices with different class orders")
        return ConfusionMatrix(self.classes, self.counts + other.counts)


def confusion(
    truths: Sequence[str], predictions: Sequence[str], classes: Sequence[str]
) -> ConfusionMatrix:
    """Tally (truth, prediction) pairs; order of the pairs is irrelevant."""
    if len(truths) != len(predictions):
        raise ValueError("truths and predictions differ in length")
    classes = tuple(classes)
    pos = {label: i for i, label in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truths, predictions):
        if t not in pos:
            raise ValueError(f"unknown truth label: {t!r}")
        if p not in pos:
            raise ValueError(f"unknown predicted label: {p!r}")
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(classes, counts)


@dataclass
class ClassMetrics:
    support: int
    predicted_total: int
    correct: int
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()

    def table_percentages(self) -> dict[str, float]:
        """Display values: 1-decimal percents, F1 derived from the rounded
        precision/recall so a rendered table is self-consistent."""
        p = _round1(self.precision * 100.0)
        r = _round1(self.recall * 100.0)
        f1 = _round1(2.0 * p * r / (p + r)) if (p + r) > 0 else 0.0
        return {"precision": p, "recall": r, "f1": f1}


@dataclass
class EvalReport:
    classes: tuple[str, ...]
    n: int
    correct_total: int
    accuracy: float
    per_class: dict[str, ClassMetrics]
    undefined: tuple[str, ...] = ()

    @property
    def accuracy_percent(self) -> float:
        return _round1(self.accuracy * 100.0)

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "n": self.n,
            "correct_total": self.correct_total,
            "accuracy": self.accuracy,
            "accuracy_percent": self.accuracy_percent,
            "undefined": list(self.undefined),
            "per_class": {
                label: {
                    "support": m.support,
                    "predicted_total": m.predicted_total,
                    "correct": m.correct,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "table": m.table_percentages(),
                    "undefined": list(m.undefined),
                }
                for label, m in self.per_class.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def metrics(cm: ConfusionMatrix) -> EvalReport:
    """Per-class precision/recall/F1 plus overall accuracy.

    A zero denominator yields 0.0 and the metric's name in the ``undefined``
    flags rather than a NaN.
    """
    per_class: dict[str, ClassMetrics] = {}
    for label in cm.classes:
        tp, fp, fn, _ = cm.one_vs_rest(label)
        undefined: list[str] = []
        precision = recall = f1 = 0.0
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            undefined.append("precision")
        if tp + fn > 0:
            recall = tp / (tp + fn)
        else:
            undefined.append("recall")
        if precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
        else:
            undefined.append("f1")
        per_class[label] = ClassMetrics(
            support=tp + fn,
            predicted_total=tp + fp,
            correct=tp,
            precision=precision,
            recall=recall,
            f1=f1,
            undefined=tuple(undefined),
        )
    correct_total = int(np.trace(cm.counts))
    if cm.n > 0:
        accuracy, report_undefined = correct_total / cm.n, ()
    else:
        accuracy, report_undefined = 0.0, ("accuracy",)
    return EvalReport(
        classes=cm.classes,
        n=cm.n,
        correct_total=correct_total,
        accuracy=accuracy,
        per_class=per_class,
        undefined=report_undefined,
    )


def evaluate_pairs(
    truths: Sequence[str], predictions: Sequence[str], classes: Sequence[str]
) -> EvalReport:
    return metrics(confusion(truths, predictions, classes))


def stratified_fold_indices(
    labels: Sequence[str],
    k: int,
    seed: int,
    stratified: bool = True,
) -> list[np.ndarray]:
    """Partition ``range(len(labels))`` into k folds, sizes within 1.

    Stratified mode shuffles each class and deals its members round-robin,
    continuing a running fold offset across classes so overall fold sizes
    stay balanced too.  Deterministic under seed.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    n = len(labels)
    if n < k:
        raise ValueError(f"cannot make {k} folds from {n} samples")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]

    if not stratified:
        order = rng.permutation(n)
        for j, idx in enumerate(order):
            folds[j % k].append(int(idx))
    else:
        by_class: dict[str, list[int]] = {}
        for i, lab in enumerate(labels):
            by_class.setdefault(lab, []).append(i)
        for lab in sorted(by_class):
            if len(by_class[lab]) < k:
                raise ValueError(f"class {lab} has fewer than {k} members")
        offset = 0
        for lab in sorted(by_class):
            members = np.array(by_class[lab])
            shuffled = members[rng.permutation(len(members))]
            for j, idx in enumerate(shuffled):
                folds[(offset + j) % k].append(int(idx))
            offset = (offset + len(members)) % k
    return [np.array(sorted(f), dtype=int) for f in folds]


Trainer = Callable[[list, list[str]], Callable[[list], list[str]]]


@dataclass
class CrossvalResult:
    fold_indices: list[np.ndarray]
    fold_matrices: list[ConfusionMatrix]
    fold_reports: list[EvalReport]
    matrix: ConfusionMatrix
    report: EvalReport


def crossval(
    items: Sequence,
    labels: Sequence[str],
    k: int,
    trainer: Trainer,
    seed: int,
    classes: Sequence[str] | None = None,
    stratified: bool = True,
) -> CrossvalResult:
    """k-fold cross-validation: each sample is tested exactly once.

    ``trainer(train_items, train_labels)`` must return a predict function;
    final metrics come from the elementwise sum of the fold matrices.
    """
    if len(items) != len(labels):
        raise ValueError("items and labels differ in length")
    class_order = tuple(classes) if classes is not None else tuple(sorted(set(labels)))
    folds = stratified_fold_indices(labels, k, seed, stratified=stratified)

    fold_matrices: list[ConfusionMatrix] = []
    fold_reports: list[EvalReport] = []
    for test_idx in folds:
        test_set = set(test_idx.tolist())
        train_items = [items[i] for i in range(len(items)) if i not in test_set]
        train_labels = [labels[i] for i in range(len(items)) if i not in test_set]
        predict = trainer(train_items, train_labels)
        predictions = predict([items[i] for i in test_idx])
        truths = [labels[i] for i in test_idx]
        cm = confusion(truths, predictions, class_order)
        fold_matrices.append(cm)
        fold_reports.append(metrics(cm))

    accumulated = fold_matrices[0]
    for cm in fold_matrices[1:]:
        accumulated = accumulated + cm
    return CrossvalResult(
        fold_indices=folds,
        fold_matrices=fold_matrices,
        fold_reports=fold_reports,
        matrix=accumulated,
        report=metrics(accumulated),
    )


def _fmt_count(value: int) -> str:
    return f"{value:,}"


def render_report(report: EvalReport, style: str = "binary_table") -> str:
    """Fixed-width text table in the shape of the published result tables.

    Both styles share the grid: one column per class plus a Total column;
    ``predicted*`` cells read ``A/B`` where A is the correctly detected count
    and B the total predicted for that class.
    """
    if style not in ("binary_table", "four_class_table"):
        raise ValueError(f"unknown report style: {style!r}")
    header = ["# of events", "predicted*", "precision", "recall", "F1", "accuracy"]
    columns = list(report.classes) + ["Total"]

    cells: dict[str, list[str]] = {name: [] for name in header}
    for label in report.classes:
        m = report.per_class[label]
        pct = m.table_percentages()
        cells["# of events"].append(_fmt_count(m.support))
        cells["predicted*"].append(f"{_fmt_count(m.correct)}/{_fmt_count(m.predicted_total)}")
        cells["precision"].append(f"{pct['precision']:.1f}%")
        cells["recall"].append(f"{pct['recall']:.1f}%")
        cells["F1"].append(f"{pct['f1']:.1f}%")
        cells["accuracy"].append("-")
    cells["# of events"].append(_fmt_count(report.n))
    cells["predicted*"].append(f"{_fmt_count(report.correct_total)}/{_fmt_count(report.n)}")
    cells["precision"].append("-")
    cells["recall"].append("-")
    cells["F1"].append("-")
    cells["accuracy"].append(f"{report.accuracy_percent:.1f}%")

    name_width = max(len(h) for h in header)
    col_widths = [
        max(len(columns[j]), max(len(cells[h][j]) for h in header)) for j in range(len(columns))
    ]
    lines = [
        " " * name_width
        + "  "
        + "  ".join(columns[j].rjust(col_widths[j]) for j in range(len(columns)))
    ]
    for h in header:
        lines.append(
            h.ljust(name_width)
            + "  "
            + "  ".join(cells[h][j].rjust(col_widths[j]) for j in range(len(columns)))
        )
    lines.append("*A/B: A = correctly detected samples; B = total predicted in the class.")
    return "\n".join(lines) + "\n"
