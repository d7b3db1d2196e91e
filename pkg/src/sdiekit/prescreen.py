"""Stage-1 binary prescreener over pattern-count features.

A logistic regression trained from scratch with mini-batch SGD on a
class-weighted binary cross-entropy plus an L2 penalty on the weights (the
bias is unregularized).  The heavy positive-class weight is what lets the
model keep nearly all true events while discarding the dominant
non-event mass.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

EPS = 1e-12


@dataclass
class PrescreenHyperparams:
    alpha: float = 1e-4
    class_weight_non_sdie: float = 0.019
    class_weight_sdie: float = 0.981
    learning_rate: float = 0.05
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0


@dataclass
class PrescreenModel:
    w: np.ndarray
    b: float
    threshold: float = 0.5
    hyperparams: PrescreenHyperparams = field(default_factory=PrescreenHyperparams)
    vocabulary_version: str | None = None

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=float)
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.hyperparams.alpha < 0:
            raise ValueError("alpha must be non-negative")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def predict_probability(model: PrescreenModel, x: np.ndarray) -> np.ndarray | float:
    """p = sigmoid(w . x + b), elementwise over rows when x is a matrix."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.w.shape[0]:
        raise ValueError(f"feature dimension {x.shape[-1]} != weight dimension {model.w.shape[0]}")
    z = x @ model.w + model.b
    p = _sigmoid(np.atleast_1d(z))
    return float(p[0]) if z.ndim == 0 else p


def _check_labels(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.size and not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    return y


def _sample_weights(model: PrescreenModel, y: np.ndarray) -> np.ndarray:
    h = model.hyperparams
    return np.where(y == 1.0, h.class_weight_sdie, h.class_weight_non_sdie)


def loss(model: PrescreenModel, X: np.ndarray, y: np.ndarray) -> float:
    """Class-weighted BCE summed over the batch, plus alpha * ||w||^2."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = _check_labels(y)
    reg = model.hyperparams.alpha * float(model.w @ model.w)
    if y.size == 0:
        return reg
    p = np.clip(predict_probability(model, X), EPS, 1.0 - EPS)
    c = _sample_weights(model, y)
    bce = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(np.sum(c * bce)) + reg


def gradient(model: PrescreenModel, X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """(dL/dw, dL/db) for the batch loss above, in closed form."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = _check_labels(y)
    if y.size == 0:
        return 2.0 * model.hyperparams.alpha * model.w, 0.0
    p = predict_probability(model, X)
    c = _sample_weights(model, y)
    residual = c * (p - y)
    dw = X.T @ residual + 2.0 * model.hyperparams.alpha * model.w
    db = float(np.sum(residual))
    return dw, db


def train(
    X: np.ndarray,
    y: np.ndarray,
    hyperparams: PrescreenHyperparams | None = None,
    threshold: float = 0.5,
    vocabulary_version: str | None = None,
) -> tuple[PrescreenModel, list[float]]:
    """Mini-batch SGD from zero initialization; returns (model, loss trace).

    The trace holds the full-dataset loss after each epoch.  Training is
    bitwise deterministic under the hyperparameter seed.  Learning rates up
    to ~0.1 are stable for raw pattern counts; the default is 0.05.
    """
    hp = hyperparams or PrescreenHyperparams()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = _check_labels(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y differ in length")
    if np.unique(y).size < 2:
        raise ValueError("degenerate training set: both classes are required")

    rng = np.random.default_rng(hp.seed)
    model = PrescreenModel(
        w=np.zeros(X.shape[1]),
        b=0.0,
        threshold=threshold,
        hyperparams=hp,
        vocabulary_version=vocabulary_version,
    )
    n = X.shape[0]
    trace: list[float] = []
    for _ in range(hp.epochs):
        order = rng.permutation(n)
        for start in range(0, n, hp.batch_size):
            batch = order[start : start + hp.batch_size]
            dw, db = gradient(model, X[batch], y[batch])
            model.w -= hp.learning_rate * dw
            model.b -= hp.learning_rate * db
        trace.append(loss(model, X, y))
    return model, trace


@dataclass
class PrescreenResult:
    probabilities: np.ndarray
    decisions: np.ndarray  # True = suspected event, kept for stage 2
    suspected_indices: np.ndarray
    excluded_indices: np.ndarray

    @property
    def exclusion_rate(self) -> float:
        total = self.decisions.size
        return float(self.excluded_indices.size / total) if total else 0.0


def prescreen(model: PrescreenModel, X: np.ndarray) -> PrescreenResult:
    """Partition feature rows into suspected events (p >= threshold) and rest."""
    p = np.atleast_1d(predict_probability(model, np.atleast_2d(np.asarray(X, dtype=float))))
    decisions = p >= model.threshold
    idx = np.arange(p.size)
    return PrescreenResult(
        probabilities=p,
        decisions=decisions,
        suspected_indices=idx[decisions],
        excluded_indices=idx[~decisions],
    )


def save_model(model: PrescreenModel, path: str | Path) -> None:
    doc = {
        "w": model.w.tolist(),
        "b": model.b,
        "threshold": model.threshold,
        "hyperparams": asdict(model.hyperparams),
        "vocabulary_version": model.vocabulary_version,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> PrescreenModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return PrescreenModel(
        w=np.array(doc["w"], dtype=float),
        b=float(doc["b"]),
        threshold=float(doc["threshold"]),
        hyperparams=PrescreenHyperparams(**doc["hyperparams"]),
        vocabulary_version=doc.get("vocabulary_version"),
    )
