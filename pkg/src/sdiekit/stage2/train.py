"""Fine-tuning and inference for the four-class event classifier.

The builtin path trains the hashed-embedding encoder and the head jointly
with Adam; the external path hands training to the bridge process and keeps
the returned head for local inference on bridged representations.
Training holds out a stratified slice of the fold for early stopping and
restores the best weights seen.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..corpus import STAGE2_CLASSES, stratified_split_indices
from .encoder import BuiltinEncoder, BuiltinEncoderConfig
from .head import ClassificationHead, ce_loss_and_grad, dropout_mask, head_forward
from .optim import Adam

log = logging.getLogger(__name__)

# 1e-5 suits a pretrained external encoder; a from-scratch embedding table
# stalls there, so the builtin path defaults higher.
DEFAULT_LR_BUILTIN = 1e-3
DEFAULT_LR_EXTERNAL = 1e-5


@dataclass
class Stage2Hyperparams:
    learning_rate: float | None = None  # resolved per encoder kind
    max_epochs: int = 50
    batch_size: int = 32
    dropout_rate: float = 0.3
    holdout_fraction: float = 0.1
    patience: int = 5
    min_delta: float = 1e-4  # holdout-loss improvement below this is "no improvement"
    seed: int = 0

    def resolved_lr(self, encoder_kind: str) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LR_EXTERNAL if encoder_kind == "external_bridge" else DEFAULT_LR_BUILTIN


@dataclass
class Stage2Metadata:
    epochs_run: int
    early_stop_epoch: int | None
    best_holdout_loss: float | None
    seed: int


@dataclass
class Stage2Model:
    encoder: BuiltinEncoder
    head: ClassificationHead
    class_order: tuple[str, ...] = STAGE2_CLASSES
    metadata: Stage2Metadata | None = None

    def class_index(self, label: str) -> int:
        return self.class_order.index(label)


def _encode_docs(encoder: BuiltinEncoder, id_lists: list[np.ndarray]) -> np.ndarray:
    out = np.zeros((len(id_lists), encoder.dim))
    for i, ids in enumerate(id_lists):
        out[i] = encoder.encode_ids(ids)
    return out


def train_fold(
    texts: Sequence[str],
    labels: Sequence[str],
    hyperparams: Stage2Hyperparams | None = None,
    encoder_config: BuiltinEncoderConfig | None = None,
    class_order: Sequence[str] = STAGE2_CLASSES,
) -> Stage2Model:
    """Train encoder + head on one fold of (level-2 text, class label) pairs.

    Every class in ``class_order`` must appear in the fold.  A stratified
    slice (``holdout_fraction``) is held out; training stops once its loss
    has not improved for ``patience`` consecutive epochs, restoring the best
    weights, else after ``max_epochs``.  Deterministic under the seed.
    """
    hp = hyperparams or Stage2Hyperparams()
    class_order = tuple(class_order)
    present = set(labels)
    for cls in class_order:
        if cls not in present:
            raise ValueError(f"class absent from fold: {cls}")
    unknown = present - set(class_order)
    if unknown:
        raise ValueError(f"labels outside the class order: {sorted(unknown)}")

    rng = np.random.default_rng(hp.seed)
    encoder = BuiltinEncoder(encoder_config, seed=hp.seed)
    head = ClassificationHead.initial(
        dim=encoder.dim, n_classes=len(class_order), dropout_rate=hp.dropout_rate, seed=hp.seed + 1
    )
    y = np.array([class_order.index(lab) for lab in labels], dtype=int)
    id_lists = [encoder.token_ids(t) for t in texts]

    if 0.0 < hp.holdout_fraction < 1.0 and len(texts) >= 2 * len(class_order):
        train_idx, hold_idx = stratified_split_indices(
            list(labels), 1.0 - hp.holdout_fraction, rng
        )
    else:
        train_idx, hold_idx = np.arange(len(texts)), np.array([], dtype=int)
    hold_ids = [id_lists[i] for i in hold_idx]
    hold_y = y[hold_idx]

    params = {"table": encoder.table, "W": head.W, "c": head.c}
    opt = Adam(lr=hp.resolved_lr(encoder.kind))
    grad_table = np.zeros_like(encoder.table)

    best: dict[str, np.ndarray] | None = None
    best_loss = np.inf
    best_epoch = 0
    stale = 0
    epochs_run = 0
    early_stop_epoch: int | None = None

    for epoch in range(1, hp.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), hp.batch_size):
            batch = train_idx[order[start : start + hp.batch_size]]
            batch_ids = [id_lists[i] for i in batch]
            reprs = _encode_docs(encoder, batch_ids)
            mask = dropout_mask(reprs.shape, hp.dropout_rate, rng)
            _, dW, dc, d_reprs = ce_loss_and_grad(head, reprs, y[batch], mask=mask)
            grad_table.fill(0.0)
            encoder.accumulate_grad(batch_ids, d_reprs, grad_table)
            opt.step(params, {"table": grad_table, "W": dW, "c": dc})

        if hold_idx.size:
            hold_reprs = _encode_docs(encoder, hold_ids)
            hold_loss, _, _, _ = ce_loss_and_grad(head, hold_reprs, hold_y)
            if hold_loss < best_loss - hp.min_delta:
                best_loss = hold_loss
                best_epoch = epoch
                best = {k: v.copy() for k, v in params.items()}
                stale = 0
            else:
                stale += 1
                if stale >= hp.patience:
                    early_stop_epoch = epoch
                    break

    if best is not None:
        encoder.table[...] = best["table"]
        head.W[...] = best["W"]
        head.c[...] = best["c"]
        log.debug("restored best weights from epoch %d (holdout loss %.4f)", best_epoch, best_loss)

    return Stage2Model(
        encoder=encoder,
        head=head,
        class_order=class_order,
        metadata=Stage2Metadata(
            epochs_run=epochs_run,
            early_stop_epoch=early_stop_epoch,
            best_holdout_loss=None if best is None else float(best_loss),
            seed=hp.seed,
        ),
    )


def predict_batch(model: Stage2Model, texts: Sequence[str]) -> tuple[list[str], np.ndarray]:
    """Eval-mode predictions: (labels, probability rows)."""
    reprs = model.encoder.encode(list(texts))
    _, probs = head_forward(model.head, reprs, mode="eval")
    picks = probs.argmax(axis=1)  # argmax takes the lowest index on ties
    return [model.class_order[i] for i in picks], probs


def classify(model: Stage2Model, text: str) -> tuple[str, np.ndarray]:
    labels, probs = predict_batch(model, [text])
    return labels[0], probs[0]


def save_model(model: Stage2Model, path: str | Path) -> None:
    meta = {
        "class_order": list(model.class_order),
        "encoder": {
            "kind": model.encoder.kind,
            "dim": model.encoder.config.dim,
            "buckets": model.encoder.config.buckets,
            "init_scale": model.encoder.config.init_scale,
        },
        "dropout_rate": model.head.dropout_rate,
        "metadata": None
        if model.metadata is None
        else {
            "epochs_run": model.metadata.epochs_run,
            "early_stop_epoch": model.metadata.early_stop_epoch,
            "best_holdout_loss": model.metadata.best_holdout_loss,
            "seed": model.metadata.seed,
        },
    }
    with open(path, "wb") as fh:
        np.savez(
            fh,
            table=model.encoder.table,
            W=model.head.W,
            c=model.head.c,
            meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
        )


def load_model(path: str | Path) -> Stage2Model:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        enc_meta = meta["encoder"]
        encoder = BuiltinEncoder(
            BuiltinEncoderConfig(
                dim=enc_meta["dim"], buckets=enc_meta["buckets"], init_scale=enc_meta["init_scale"]
            )
        )
        encoder.table = data["table"].copy()
        head = ClassificationHead(
            W=data["W"].copy(), c=data["c"].copy(), dropout_rate=meta["dropout_rate"]
        )
    md = meta.get("metadata")
    return Stage2Model(
        encoder=encoder,
        head=head,
        class_order=tuple(meta["class_order"]),
        metadata=None
        if md is None
        else Stage2Metadata(
            epochs_run=md["epochs_run"],
            early_stop_epoch=md["early_stop_epoch"],
            best_holdout_loss=md["best_holdout_loss"],
            seed=md["seed"],
        ),
    )
