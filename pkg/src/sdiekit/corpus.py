"""Event-report corpus: records, ingest, label mapping, and splits.

JSONL is the native interchange format, one object per line:
``{"id", "text", "label", "source", "date"}``; ``label``/``source``/``date``
may be null.  A line whose object contains a ``_meta`` key is a provenance
header and is skipped on ingest.  CSV uses the same field names in a header
row with RFC-4180 quoting.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

from .text import clean_format, normalize

log = logging.getLogger(__name__)

RAW_LABELS: tuple[str, ...] = ("ISOL", "FLOW", "LOCA", "LOAC", "LOOP", "SFP", "NON_SDIE")
UNLABELED = "UNLABELED"

# Raw labels that describe a shutdown initiating event of some type.
SDIE_LABELS: frozenset[str] = frozenset(RAW_LABELS) - {"NON_SDIE"}

STAGE2_CLASSES: tuple[str, ...] = ("ISOL_FLOW", "LOAC", "LOOP", "NON_SDIE")
EXCLUDED = "EXCLUDED"

_STAGE2_MAP = {
    "ISOL": "ISOL_FLOW",
    "FLOW": "ISOL_FLOW",
    "LOAC": "LOAC",
    "LOOP": "LOOP",
    "NON_SDIE": "NON_SDIE",
    "SFP": EXCLUDED,
    "LOCA": EXCLUDED,
}


class UnlabeledEventError(ValueError):
    """Raised when an operation needs a label and the event has none."""


@dataclass
class EventRecord:
    id: str
    raw_text: str
    level1_text: str
    level2_text: str
    raw_label: str = UNLABELED
    source: str | None = None
    event_date: str | None = None
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_text(
        cls,
        id: str,
        text: str,
        label: str | None = None,
        source: str | None = None,
        event_date: str | None = None,
        extras: dict | None = None,
    ) -> "EventRecord":
        level1 = clean_format(text)
        return cls(
            id=id,
            raw_text=text,
            level1_text=level1,
            level2_text=normalize(level1),
            raw_label=label if label is not None else UNLABELED,
            source=source,
            event_date=event_date,
            extras=extras or {},
        )


@dataclass
class Corpus:
    events: list[EventRecord]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for e in self.events:
            if e.id in seen:
                raise ValueError(f"duplicate event id: {e.id}")
            seen.add(e.id)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.events)

    @property
    def class_counts(self) -> Counter:
        return Counter(e.raw_label for e in self.events)

    def level1_texts(self) -> list[str]:
        return [e.level1_text for e in self.events]

    def level2_texts(self) -> list[str]:
        return [e.level2_text for e in self.events]


@dataclass
class IngestReport:
    corpus: Corpus
    label_warnings: int
    row_errors: list[tuple[int, str]]


def parse_label(value: str | None) -> tuple[str, bool]:
    """Canonical raw label for ``value``; flag is True for unknown spellings."""
    if value is None or value == "":
        return UNLABELED, False
    canon = value.strip().upper().replace("-", "_").replace(" ", "_")
    if canon in RAW_LABELS or canon == UNLABELED:
        return canon, False
    return UNLABELED, True


def ingest_events(stream: IO[bytes] | IO[str] | bytes | str, format: str = "jsonl") -> IngestReport:
    """Load a corpus from a JSONL or CSV stream.

    Malformed rows are skipped and recorded with their row number; unknown
    label strings map to UNLABELED and are tallied as warnings.  A duplicate
    id rejects the whole ingest.
    """
    text = _as_text(stream)
    if format == "jsonl":
        rows = _iter_jsonl(text)
    elif format == "csv":
        rows = _iter_csv(text)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")

    events: list[EventRecord] = []
    seen: set[str] = set()
    warnings = 0
    errors: list[tuple[int, str]] = []
    for row_no, row, err in rows:
        if err is not None:
            errors.append((row_no, err))
            continue
        event_id = row.get("id")
        body = row.get("text")
        if not event_id or body is None:
            errors.append((row_no, "missing id or text"))
            continue
        event_id = str(event_id)
        if event_id in seen:
            raise ValueError(f"duplicate event id {event_id!r} at row {row_no}")
        seen.add(event_id)
        label, unknown = parse_label(row.get("label"))
        if unknown:
            warnings += 1
        extras = {k: v for k, v in row.items() if k not in ("id", "text", "label", "source", "date")}
        events.append(
            EventRecord.from_text(
                id=event_id,
                text=str(body),
                label=label,
                source=row.get("source"),
                event_date=row.get("date"),
                extras=extras,
            )
        )
    return IngestReport(corpus=Corpus(events), label_warnings=warnings, row_errors=errors)


def _as_text(stream: IO[bytes] | IO[str] | bytes | str) -> str:
    if isinstance(stream, bytes):
        return stream.decode("utf-8")
    if isinstance(stream, str):
        return stream
    data = stream.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _iter_jsonl(text: str) -> Iterator[tuple[int, dict, str | None]]:
    for row_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield row_no, {}, f"invalid json: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield row_no, {}, "row is not an object"
            continue
        if "_meta" in obj:
            continue
        yield row_no, obj, None


def _iter_csv(text: str) -> Iterator[tuple[int, dict, str | None]]:
    reader = csv.DictReader(io.StringIO(text))
    for row_no, row in enumerate(reader, start=2):
        if row.get("id") is None and row.get("text") is None:
            yield row_no, {}, "short row"
            continue
        cleaned = {k: (v if v != "" else None) for k, v in row.items() if k is not None}
        yield row_no, cleaned, None


def write_jsonl(events: Iterable[EventRecord], meta: dict | None = None) -> str:
    """Serialize events to JSONL; an optional ``_meta`` header line leads."""
    lines = []
    if meta is not None:
        lines.append(json.dumps({"_meta": meta}, sort_keys=True))
    for e in events:
        row = {
            "id": e.id,
            "text": e.raw_text,
            "label": None if e.raw_label == UNLABELED else e.raw_label,
            "source": e.source,
            "date": e.event_date,
        }
        row.update(e.extras)
        lines.append(json.dumps(row, sort_keys=True))
    return "\n".join(lines) + "\n"


def map_stage2_label(raw_label: str) -> str:
    """Collapse the 7 raw event types onto the 4 stage-2 classes.

    ISOL and FLOW merge; SFP and LOCA map to EXCLUDED (too few samples to
    learn from); an unlabeled event is an error, not a class.
    """
    if raw_label == UNLABELED:
        raise UnlabeledEventError("event is unannotated; label it before stage-2 mapping")
    try:
        return _STAGE2_MAP[raw_label]
    except KeyError:
        raise ValueError(f"unknown raw label: {raw_label!r}") from None


def stratified_split_indices(
    labels: Sequence[str], first_fraction: float, seed: int | np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic stratified two-way split of ``range(len(labels))``.

    Per class, the first part receives round(first_fraction * n) members
    (half-up), so the realized fraction deviates by at most one sample per
    class.  Classes with fewer than two members go wholly to the first part.
    """
    if not 0.0 < first_fraction < 1.0:
        raise ValueError("first_fraction must be in (0, 1)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)

    first: list[int] = []
    second: list[int] = []
    for lab in sorted(by_class):
        members = np.array(by_class[lab])
        if len(members) < 2:
            log.warning("class %s has %d member(s); kept whole in the first split", lab, len(members))
            first.extend(members.tolist())
            continue
        order = rng.permutation(len(members))
        n_first = int(np.floor(first_fraction * len(members) + 0.5))
        shuffled = members[order]
        first.extend(shuffled[:n_first].tolist())
        second.extend(shuffled[n_first:].tolist())
    return np.array(sorted(first), dtype=int), np.array(sorted(second), dtype=int)


def split_train_test(corpus: Corpus, train_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Stratified train/test partition of a corpus, deterministic under seed."""
    labels = [e.raw_label for e in corpus]
    train_idx, test_idx = stratified_split_indices(labels, train_fraction, seed)
    train = Corpus([corpus.events[i] for i in train_idx])
    test = Corpus([corpus.events[i] for i in test_idx])
    return train, test
