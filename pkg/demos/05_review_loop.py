#!/usr/bin/env python3
"""The human review loop, driven in-process against the HTTP service:
create a project, enqueue predictions, label a few items, export, and
re-ingest the export as a training corpus.

Run: python demos/05_review_loop.py
(For a real deployment: `sdiekit serve --data review.log`.)
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from sdiekit.corpus import ingest_events, write_jsonl
from sdiekit.review.service import create_app
from sdiekit.review.store import ReviewStore
from sdiekit.synth import SyntheticSpec, generate_synthetic

workdir = Path(tempfile.mkdtemp(prefix="sdiekit-review-"))
corpus = generate_synthetic(
    SyntheticSpec(counts={"LOOP": 4, "LOAC": 3, "NON_SDIE": 3}, lookalike_rate=1.0, seed=2)
)
corpus_path = workdir / "suspected.jsonl"
corpus_path.write_text(write_jsonl(corpus), encoding="utf-8")

store = ReviewStore(workdir / "review.log")
client = TestClient(create_app(store))

project = client.post(
    "/api/projects", json={"name": "february-triage", "corpus_ref": str(corpus_path)}
).json()
print(f"project {project['id']} ({project['name']})")

items = [
    {"event_id": e.id, "text": e.raw_text, "predicted_class": "LOOP",
     "probabilities": [0.05, 0.15, 0.7, 0.1], "spans": []}
    for e in corpus
]
queued = client.post(
    f"/api/projects/{project['id']}/enqueue",
    json={"corpus_ref": str(corpus_path), "items": items},
).json()
print(f"enqueued {queued['enqueued']} items\n")

# An analyst works the queue. Each next() leases an item to the reviewer.
for label in ("LOOP", "LOOP", "LOAC", "NON_SDIE"):
    item = client.get(
        f"/api/projects/{project['id']}/next", params={"reviewer": "alice"}
    ).json()["item"]
    print(f"alice <- {item['event_id']}: {item['text'][:60]}...")
    done = client.post(
        f"/api/projects/{project['id']}/events/{item['event_id']}/label",
        json={"label": label, "note": "demo pass", "reviewer": "alice"},
    ).json()
    print(f"alice -> {label}  (progress {done['progress']['labeled']}/{done['progress']['total']})")

export = client.get(f"/api/projects/{project['id']}/export").text
print(f"\nexported {len(export.splitlines())} labeled rows; re-ingesting:")
report = ingest_events(export)
for event in report.corpus:
    print(f"  {event.id}: {event.raw_label}  note={event.extras.get('note')!r}")
print(f"\nappend-only log lives at {store.path}")
