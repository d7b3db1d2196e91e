"""Durable state for the human review loop.

Everything lives in one append-only JSONL log: project creation, item
enqueueing, and every label submission (relabels append, never rewrite, so
the full history of an item survives).  The in-memory view is rebuilt by
replay on open and is always a pure function of the log.  Leases are
deliberately not logged: they are soft hints that expire on their own, and
a crash simply returns leased items to the pending pool.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..corpus import RAW_LABELS

DEFAULT_LEASE_SECONDS = 600.0


class NotFoundError(KeyError):
    pass


class ConflictError(RuntimeError):
    pass


class ValidationError(ValueError):
    pass


@dataclass
class Project:
    id: str
    name: str
    corpus_ref: str
    vocabulary_version: str | None = None
    members: list[str] = field(default_factory=list)
    created_at: float = 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "corpus_ref": self.corpus_ref,
            "vocabulary_version": self.vocabulary_version,
            "members": self.members,
            "created_at": self.created_at,
        }


@dataclass
class ReviewItem:
    event_id: str
    text: str
    predicted_class: str | None = None
    probabilities: list[float] = field(default_factory=list)
    spans: list[dict] = field(default_factory=list)
    status: str = "pending"  # pending | labeled | skipped
    analyst_label: str | None = None
    note: str | None = None
    reviewer: str | None = None
    labeled_at: float | None = None
    source: str | None = None
    event_date: str | None = None
    lease_holder: str | None = None
    lease_expires: float = 0.0

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "text": self.text,
            "predicted_class": self.predicted_class,
            "probabilities": self.probabilities,
            "spans": self.spans,
            "status": self.status,
            "analyst_label": self.analyst_label,
            "note": self.note,
            "reviewer": self.reviewer,
            "labeled_at": self.labeled_at,
        }


class ReviewStore:
    def __init__(
        self,
        path: str | Path,
        lease_seconds: float = DEFAULT_LEASE_SECONDS,
        clock: Callable[[], float] = time.time,
        check_corpus_path: bool = True,
    ):
        self.path = Path(path)
        self.lease_seconds = lease_seconds
        self.clock = clock
        self.check_corpus_path = check_corpus_path
        self._lock = threading.RLock()
        self._projects: dict[str, Project] = {}
        self._items: dict[str, dict[str, ReviewItem]] = {}
        self._audit: dict[str, list[dict]] = {}
        self._serial = 0
        if self.path.exists():
            self._replay()

    # -- log machinery ----------------------------------------------------

    def _replay(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _append(self, record: dict) -> None:
        self._apply(record)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _apply(self, record: dict) -> None:
        kind = record["type"]
        if kind == "project_created":
            project = Project(
                id=record["id"],
                name=record["name"],
                corpus_ref=record["corpus_ref"],
                vocabulary_version=record.get("vocabulary_version"),
                members=record.get("members", []),
                created_at=record.get("ts", 0.0),
            )
            self._projects[project.id] = project
            self._items.setdefault(project.id, {})
            num = int(project.id.split("-")[1])
            self._serial = max(self._serial, num)
        elif kind == "item_enqueued":
            item = ReviewItem(
                event_id=record["event_id"],
                text=record["text"],
                predicted_class=record.get("predicted_class"),
                probabilities=record.get("probabilities", []),
                spans=record.get("spans", []),
                source=record.get("source"),
                event_date=record.get("event_date"),
            )
            self._items[record["project_id"]][item.event_id] = item
        elif kind == "label_submitted":
            item = self._items[record["project_id"]][record["event_id"]]
            item.status = "labeled"
            item.analyst_label = record["label"]
            item.note = record.get("note")
            item.reviewer = record.get("reviewer")
            item.labeled_at = record.get("ts")
            item.lease_holder = None
            item.lease_expires = 0.0
            key = f"{record['project_id']}:{record['event_id']}"
            self._audit.setdefault(key, []).append(record)
        else:
            raise ValueError(f"unknown log record type: {kind!r}")

    def compact(self) -> None:
        """Rewrite the log as current state plus the intact label history."""
        with self._lock:
            records: list[dict] = []
            for project in self._projects.values():
                records.append(
                    {
                        "type": "project_created",
                        "id": project.id,
                        "name": project.name,
                        "corpus_ref": project.corpus_ref,
                        "vocabulary_version": project.vocabulary_version,
                        "members": project.members,
                        "ts": project.created_at,
                    }
                )
                for item in self._items[project.id].values():
                    records.append(
                        {
                            "type": "item_enqueued",
                            "project_id": project.id,
                            "event_id": item.event_id,
                            "text": item.text,
                            "predicted_class": item.predicted_class,
                            "probabilities": item.probabilities,
                            "spans": item.spans,
                            "source": item.source,
                            "event_date": item.event_date,
                        }
                    )
            for key in self._audit:
                records.extend(self._audit[key])
            tmp = self.path.with_suffix(".tmp")
            with tmp.open("w", encoding="utf-8") as fh:
                for record in records:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")
            tmp.replace(self.path)

    # -- projects ----------------------------------------------------------

    def create_project(
        self,
        name: str,
        corpus_ref: str,
        vocabulary_version: str | None = None,
        members: list[str] | None = None,
    ) -> Project:
        with self._lock:
            if any(p.name == name for p in self._projects.values()):
                raise ConflictError(f"project name already exists: {name!r}")
            if self.check_corpus_path and not Path(corpus_ref).exists():
                raise NotFoundError(f"corpus not found: {corpus_ref}")
            self._serial += 1
            record = {
                "type": "project_created",
                "id": f"proj-{self._serial}",
                "name": name,
                "corpus_ref": corpus_ref,
                "vocabulary_version": vocabulary_version,
                "members": members or [],
                "ts": self.clock(),
            }
            self._append(record)
            return self._projects[record["id"]]

    def get_project(self, project_id: str) -> Project:
        with self._lock:
            try:
                return self._projects[project_id]
            except KeyError:
                raise NotFoundError(f"no such project: {project_id}") from None

    def list_projects(self) -> list[Project]:
        with self._lock:
            return list(self._projects.values())

    # -- queue -------------------------------------------------------------

    def enqueue(self, project_id: str, corpus_ref: str, items: list[dict]) -> int:
        """Add pending review items; idempotent per (project, event id)."""
        with self._lock:
            project = self.get_project(project_id)
            if corpus_ref != project.corpus_ref:
                raise ConflictError(
                    f"corpus mismatch: project uses {project.corpus_ref!r}, got {corpus_ref!r}"
                )
            existing = self._items[project_id]
            added = 0
            for item in items:
                event_id = str(item["event_id"])
                if event_id in existing:
                    continue
                self._append(
                    {
                        "type": "item_enqueued",
                        "project_id": project_id,
                        "event_id": event_id,
                        "text": item.get("text", ""),
                        "predicted_class": item.get("predicted_class"),
                        "probabilities": item.get("probabilities", []),
                        "spans": item.get("spans", []),
                        "source": item.get("source"),
                        "event_date": item.get("event_date"),
                    }
                )
                added += 1
            return added

    def next_item(self, project_id: str, reviewer: str) -> ReviewItem | None:
        """Lease the next pending item to ``reviewer``; None when drained.

        A reviewer polling again before acting receives their own leased
        item back; other reviewers skip it until the lease expires.
        """
        with self._lock:
            self.get_project(project_id)
            now = self.clock()
            for item in self._items[project_id].values():
                if item.status != "pending":
                    continue
                if item.lease_holder == reviewer or item.lease_expires <= now:
                    item.lease_holder = reviewer
                    item.lease_expires = now + self.lease_seconds
                    return item
            return None

    def submit_label(
        self,
        project_id: str,
        event_id: str,
        label: str,
        note: str | None,
        reviewer: str,
    ) -> ReviewItem:
        with self._lock:
            self.get_project(project_id)
            items = self._items[project_id]
            if event_id not in items:
                raise NotFoundError(f"no such event in project: {event_id}")
            if label not in RAW_LABELS:
                raise ValidationError(f"label must be one of {RAW_LABELS}, got {label!r}")
            self._append(
                {
                    "type": "label_submitted",
                    "project_id": project_id,
                    "event_id": event_id,
                    "label": label,
                    "note": note,
                    "reviewer": reviewer,
                    "ts": self.clock(),
                }
            )
            return items[event_id]

    def audit_trail(self, project_id: str, event_id: str) -> list[dict]:
        with self._lock:
            self.get_project(project_id)
            return list(self._audit.get(f"{project_id}:{event_id}", []))

    def items(self, project_id: str) -> list[ReviewItem]:
        with self._lock:
            self.get_project(project_id)
            return list(self._items[project_id].values())

    def progress(self, project_id: str) -> dict:
        with self._lock:
            items = self.items(project_id)
            labeled = sum(1 for i in items if i.status == "labeled")
            return {"labeled": labeled, "total": len(items)}

    def export_labeled(self, project_id: str) -> list[dict]:
        """Labeled items as corpus rows, ready to re-ingest for retraining."""
        with self._lock:
            rows = []
            for item in self.items(project_id):
                if item.status != "labeled":
                    continue
                rows.append(
                    {
                        "id": item.event_id,
                        "text": item.text,
                        "label": item.analyst_label,
                        "source": item.source,
                        "date": item.event_date,
                        "note": item.note,
                    }
                )
            return rows
