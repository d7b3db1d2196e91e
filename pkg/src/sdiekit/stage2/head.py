"""Dropout + affine + softmax classification head and its gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_FLOOR = 1e-12


@dataclass
class ClassificationHead:
    W: np.ndarray  # (dim, n_classes)
    c: np.ndarray  # (n_classes,)
    dropout_rate: float = 0.3

    def __post_init__(self) -> None:
        self.W = np.asarray(self.W, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.W.shape[1] != self.c.shape[0]:
            raise ValueError("W and c disagree on the class count")

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @property
    def n_classes(self) -> int:
        return self.W.shape[1]

    @classmethod
    def initial(cls, dim: int, n_classes: int = 4, dropout_rate: float = 0.3, seed: int = 0):
        rng = np.random.default_rng(seed)
        return cls(
            W=rng.normal(0.0, 0.1, size=(dim, n_classes)),
            c=np.zeros(n_classes),
            dropout_rate=dropout_rate,
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def dropout_mask(
    shape: tuple[int, ...], rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Inverted-dropout mask: kept units pre-scaled by 1/(1-rate)."""
    if rate == 0.0:
        return np.ones(shape)
    keep = 1.0 - rate
    return (rng.random(shape) < keep) / keep


def head_forward(
    head: ClassificationHead,
    reprs: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(logits, probs) for a batch of representations.

    Train mode applies an inverted-dropout mask to the representations
    before the affine map; eval mode is deterministic.
    """
    reprs = np.atleast_2d(np.asarray(reprs, dtype=float))
    if reprs.shape[1] != head.dim:
        raise ValueError(f"representation dim {reprs.shape[1]} != head dim {head.dim}")
    if mode == "train":
        if rng is None:
            raise ValueError("train mode needs an rng for the dropout mask")
        reprs = reprs * dropout_mask(reprs.shape, head.dropout_rate, rng)
    elif mode != "eval":
        raise ValueError(f"unknown mode: {mode!r}")
    logits = reprs @ head.W + head.c
    return logits, softmax(logits)


def ce_loss_and_grad(
    head: ClassificationHead,
    reprs: np.ndarray,
    classes: np.ndarray,
    mask: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean cross-entropy over the batch and its analytic gradients.

    Returns (loss, dW, dc, dReprs).  ``mask`` is an optional precomputed
    dropout mask (train mode); gradients flow through it.
    """
    reprs = np.atleast_2d(np.asarray(reprs, dtype=float))
    classes = np.asarray(classes, dtype=int)
    if classes.size == 0:
        raise ValueError("empty batch")
    if classes.min() < 0 or classes.max() >= head.n_classes:
        raise ValueError(f"classes must be in [0, {head.n_classes})")
    n = reprs.shape[0]

    dropped = reprs * mask if mask is not None else reprs
    logits = dropped @ head.W + head.c
    probs = softmax(logits)
    picked = np.clip(probs[np.arange(n), classes], PROB_FLOOR, 1.0)
    loss = float(-np.mean(np.log(picked)))

    d_logits = probs.copy()
    d_logits[np.arange(n), classes] -= 1.0
    d_logits /= n
    dW = dropped.T @ d_logits
    dc = d_logits.sum(axis=0)
    d_reprs = d_logits @ head.W.T
    if mask is not None:
        d_reprs = d_reprs * mask
    return loss, dW, dc, d_reprs
