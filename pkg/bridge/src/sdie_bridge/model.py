"""The encoder behind the bridge and its fine-tuning loop.

The default encoder is a compact bidirectional transformer built locally:
hashed token embeddings plus learned positions feed a two-layer
self-attention encoder whose masked mean pool is the 768-wide
representation.  It has the same interface a pretrained checkpoint would
(pass ``checkpoint=`` a directory to load one through ``transformers``
when available); the served dimension is always 768.
"""

from __future__ import annotations

import re
import zlib
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

ENCODER_DIM = 768
MAX_TOKENS = 512  # fixed context of the encoder family

_TOKEN = re.compile(r"[0-9A-Za-z]+")

# Tiny batches thrash on many cores; two threads measured fastest.
torch.set_num_threads(2)


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


class CompactTransformerEncoder(nn.Module):
    def __init__(self, buckets: int = 8192, layers: int = 2, heads: int = 8, seed: int = 0):
        super().__init__()
        torch.manual_seed(seed)
        self.buckets = buckets
        self.embed = nn.Embedding(buckets + 1, ENCODER_DIM, padding_idx=0)
        self.positions = nn.Embedding(MAX_TOKENS, ENCODER_DIM)
        layer = nn.TransformerEncoderLayer(
            d_model=ENCODER_DIM,
            nhead=heads,
            dim_feedforward=1024,
            dropout=0.1,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers, enable_nested_tensor=False)

    def token_ids(self, text: str) -> list[int]:
        tokens = _tokenize(text)[:MAX_TOKENS]
        # 0 is the padding id; real tokens land in [1, buckets]
        return [zlib.crc32(t.encode("utf-8")) % self.buckets + 1 for t in tokens]

    def forward(self, batch_ids: torch.Tensor, pad_mask: torch.Tensor) -> torch.Tensor:
        seq_len = batch_ids.shape[1]
        pos = torch.arange(seq_len, device=batch_ids.device).unsqueeze(0)
        hidden = self.embed(batch_ids) + self.positions(pos)
        hidden = self.encoder(hidden, src_key_padding_mask=pad_mask)
        keep = (~pad_mask).unsqueeze(-1).float()
        summed = (hidden * keep).sum(dim=1)
        counts = keep.sum(dim=1).clamp(min=1.0)
        return summed / counts


@dataclass
class FinetuneResult:
    handle: str
    head_weight: np.ndarray  # (768, n_classes)
    head_bias: np.ndarray
    trace: list[dict]
    epochs_run: int
    early_stop_epoch: int | None
    hyperparams: dict = field(default_factory=dict)


class BridgeEncoder:
    """Owns the base encoder and any fine-tuned variants, keyed by handle."""

    def __init__(self, checkpoint: str | None = None, seed: int = 0):
        if checkpoint:
            self._base = load_encoder(checkpoint)
            self.source = checkpoint
        else:
            self._base = CompactTransformerEncoder(seed=seed)
            self.source = "builtin"
        self._models: dict[str, CompactTransformerEncoder] = {}
        self._serial = 0

    def save_base(self, path: str) -> None:
        save_encoder(self._base, path)

    def _resolve(self, handle: str | None) -> CompactTransformerEncoder:
        if handle is None:
            return self._base
        try:
            return self._models[handle]
        except KeyError:
            raise ValueError(f"unknown model handle: {handle!r}") from None

    def _batch(self, model: CompactTransformerEncoder, texts: list[str]):
        ids = [model.token_ids(t) for t in texts]
        width = max((len(i) for i in ids), default=0)
        width = max(width, 1)
        batch = torch.zeros((len(texts), width), dtype=torch.long)
        pad = torch.ones((len(texts), width), dtype=torch.bool)
        for row, seq in enumerate(ids):
            if seq:
                batch[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
                pad[row, : len(seq)] = False
            else:
                pad[row, 0] = False  # all-pad rows upset attention; keep one slot
        return batch, pad

    @torch.no_grad()
    def encode(self, texts: list[str], handle: str | None = None) -> np.ndarray:
        """Deterministic eval-mode representations, one 768-wide row per text."""
        if not texts:
            return np.zeros((0, ENCODER_DIM))
        model = self._resolve(handle)
        model.eval()
        batch, pad = self._batch(model, texts)
        return model(batch, pad).numpy()

    def finetune(
        self,
        train_texts: list[str],
        train_classes: list[int],
        holdout_texts: list[str] | None = None,
        holdout_classes: list[int] | None = None,
        hyperparams: dict | None = None,
        progress=None,
    ) -> FinetuneResult:
        hp = {
            "learning_rate": 1e-5,
            "max_epochs": 50,
            "batch_size": 8,
            "dropout_rate": 0.3,
            "patience": 5,
            "n_classes": 4,
            "seed": 0,
        }
        hp.update(hyperparams or {})
        if not train_texts:
            raise ValueError("empty training set")
        classes = torch.tensor(train_classes, dtype=torch.long)
        if classes.min() < 0 or classes.max() >= hp["n_classes"]:
            raise ValueError(f"classes must be in [0, {hp['n_classes']})")

        torch.manual_seed(hp["seed"])
        import copy

        model = copy.deepcopy(self._base)
        head = nn.Sequential(
            nn.Dropout(hp["dropout_rate"]),
            nn.Linear(ENCODER_DIM, hp["n_classes"]),
        )
        optimizer = torch.optim.Adam(
            list(model.parameters()) + list(head.parameters()), lr=hp["learning_rate"]
        )
        loss_fn = nn.CrossEntropyLoss()

        batch, pad = self._batch(model, train_texts)
        hold = None
        if holdout_texts:
            hold = (
                *self._batch(model, holdout_texts),
                torch.tensor(holdout_classes or [], dtype=torch.long),
            )

        generator = torch.Generator().manual_seed(hp["seed"])
        best_state = None
        best_loss = float("inf")
        stale = 0
        epochs_run = 0
        early_stop_epoch = None
        trace: list[dict] = []
        n = len(train_texts)

        for epoch in range(1, hp["max_epochs"] + 1):
            epochs_run = epoch
            model.train()
            head.train()
            order = torch.randperm(n, generator=generator)
            epoch_loss = 0.0
            for start in range(0, n, hp["batch_size"]):
                pick = order[start : start + hp["batch_size"]]
                optimizer.zero_grad()
                reprs = model(batch[pick], pad[pick])
                loss = loss_fn(head(reprs), classes[pick])
                loss.backward()
                optimizer.step()
                epoch_loss += float(loss.detach()) * len(pick)
            record = {"epoch": epoch, "train_loss": epoch_loss / n, "holdout_loss": None}

            if hold is not None:
                model.eval()
                head.eval()
                with torch.no_grad():
                    hold_loss = float(loss_fn(head(model(hold[0], hold[1])), hold[2]))
                record["holdout_loss"] = hold_loss
                if hold_loss < best_loss - 1e-4:
                    best_loss = hold_loss
                    best_state = (
                        copy.deepcopy(model.state_dict()),
                        copy.deepcopy(head.state_dict()),
                    )
                    stale = 0
                else:
                    stale += 1
            if progress is not None:
                progress(record)
            trace.append(record)
            if hold is not None and stale >= hp["patience"]:
                early_stop_epoch = epoch
                break

        if best_state is not None:
            model.load_state_dict(best_state[0])
            head.load_state_dict(best_state[1])

        self._serial += 1
        handle = f"m{self._serial}"
        self._models[handle] = model
        linear = head[1]
        return FinetuneResult(
            handle=handle,
            head_weight=linear.weight.detach().numpy().T.copy(),  # (768, n_classes)
            head_bias=linear.bias.detach().numpy().copy(),
            trace=trace,
            epochs_run=epochs_run,
            early_stop_epoch=early_stop_epoch,
            hyperparams=hp,
        )


def save_encoder(model: CompactTransformerEncoder, path: str) -> None:
    torch.save(
        {
            "architecture": "compact-transformer",
            "buckets": model.buckets,
            "layers": model.encoder.num_layers,
            "heads": model.encoder.layers[0].self_attn.num_heads,
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_encoder(path: str) -> CompactTransformerEncoder:
    """Load saved encoder weights (e.g. a pretrained or previously
    fine-tuned base) from disk."""
    doc = torch.load(path, map_location="cpu", weights_only=True)
    if doc.get("architecture") != "compact-transformer":
        raise ValueError(f"unsupported checkpoint architecture: {doc.get('architecture')!r}")
    model = CompactTransformerEncoder(
        buckets=doc["buckets"], layers=doc["layers"], heads=doc["heads"]
    )
    model.load_state_dict(doc["state_dict"])
    return model
