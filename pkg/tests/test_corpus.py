import json

import numpy as np
import pytest

from sdiekit.corpus import (
    Corpus,
    EventRecord,
    RAW_LABELS,
    UNLABELED,
    UnlabeledEventError,
    ingest_events,
    map_stage2_label,
    parse_label,
    split_train_test,
    stratified_split_indices,
    write_jsonl,
)
from sdiekit.synth import SyntheticSpec, generate_synthetic
from sdiekit.text import normalize

TABLE_COUNTS = {
    "ISOL": 27,
    "FLOW": 23,
    "LOCA": 13,
    "LOAC": 89,
    "LOOP": 54,
    "SFP": 6,
    "NON_SDIE": 10716,
}


def jsonl(rows):
    return "\n".join(json.dumps(r) for r in rows) + "\n"


# -- ingest -------------------------------------------------------------------


def test_ingest_empty_stream():
    report = ingest_events(b"", format="jsonl")
    assert len(report.corpus) == 0
    assert report.label_warnings == 0


def test_ingest_unknown_label_warns():
    rows = [
        {"id": "1", "text": "loss of offsite power", "label": "LOOP"},
        {"id": "2", "text": "something", "label": "garbage"},
    ]
    report = ingest_events(jsonl(rows))
    assert report.corpus.class_counts == {"LOOP": 1, UNLABELED: 1}
    assert report.label_warnings == 1


def test_ingest_computes_cleaning_levels():
    rows = [{"id": "1", "text": "The pumps _0x00D_ were running", "label": None}]
    report = ingest_events(jsonl(rows))
    e = report.corpus.events[0]
    assert e.level1_text == "The pumps were running"
    assert e.level2_text == "pump runn"
    assert e.level2_text == normalize(e.level1_text)


def test_ingest_malformed_rows_recorded():
    text = '{"id": "1", "text": "ok"}\nnot json\n{"text": "missing id"}\n'
    report = ingest_events(text)
    assert len(report.corpus) == 1
    assert [row for row, _ in report.row_errors] == [2, 3]


def test_ingest_duplicate_id_rejects():
    rows = [{"id": "1", "text": "a"}, {"id": "1", "text": "b"}]
    with pytest.raises(ValueError, match="duplicate event id"):
        ingest_events(jsonl(rows))


def test_ingest_skips_meta_lines_and_keeps_extras():
    text = (
        json.dumps({"_meta": {"seed": 1}})
        + "\n"
        + json.dumps({"id": "1", "text": "a", "label": "LOOP", "note": "check me"})
        + "\n"
    )
    report = ingest_events(text)
    assert len(report.corpus) == 1
    assert report.corpus.events[0].extras == {"note": "check me"}


def test_ingest_csv():
    csv_text = 'id,text,label,source,date\n1,"loss of SDC, again",ISOL,unit 1,2001-02-03\n2,fine,,,\n'
    report = ingest_events(csv_text, format="csv")
    events = report.corpus.events
    assert events[0].raw_text == "loss of SDC, again"
    assert events[0].raw_label == "ISOL"
    assert events[0].event_date == "2001-02-03"
    assert events[1].raw_label == UNLABELED


def test_ingest_label_spellings():
    assert parse_label("Non-SDIE") == ("NON_SDIE", False)
    assert parse_label("loop") == ("LOOP", False)
    assert parse_label(None) == (UNLABELED, False)
    assert parse_label("whatever") == (UNLABELED, True)


def test_ingest_table_scale_corpus_tallies():
    corpus = generate_synthetic(SyntheticSpec(counts=TABLE_COUNTS, noise_rate=0.02, seed=3))
    report = ingest_events(write_jsonl(corpus))
    assert dict(report.corpus.class_counts) == TABLE_COUNTS
    assert len(report.corpus) == 10928


def test_corpus_rejects_duplicate_ids():
    e = EventRecord.from_text("x", "text")
    with pytest.raises(ValueError):
        Corpus([e, EventRecord.from_text("x", "other")])


def test_write_jsonl_roundtrip():
    corpus = generate_synthetic(
        SyntheticSpec(counts={"LOOP": 3, "NON_SDIE": 5}, seed=1)
    )
    report = ingest_events(write_jsonl(corpus, meta={"seed": 1}))
    assert [e.id for e in report.corpus] == [e.id for e in corpus]
    assert [e.raw_label for e in report.corpus] == [e.raw_label for e in corpus]
    assert [e.raw_text for e in report.corpus] == [e.raw_text for e in corpus]


# -- label mapping ---------------------------------------------------------------


def test_map_stage2_label_table():
    assert map_stage2_label("ISOL") == "ISOL_FLOW"
    assert map_stage2_label("FLOW") == "ISOL_FLOW"
    assert map_stage2_label("LOAC") == "LOAC"
    assert map_stage2_label("LOOP") == "LOOP"
    assert map_stage2_label("NON_SDIE") == "NON_SDIE"
    assert map_stage2_label("SFP") == "EXCLUDED"
    assert map_stage2_label("LOCA") == "EXCLUDED"


def test_map_stage2_label_unlabeled_errors():
    with pytest.raises(UnlabeledEventError):
        map_stage2_label(UNLABELED)


def test_map_stage2_label_total_over_raw_types():
    codomain = {"ISOL_FLOW", "LOAC", "LOOP", "NON_SDIE", "EXCLUDED"}
    for label in RAW_LABELS:
        assert map_stage2_label(label) in codomain


def test_map_stage2_table_counts_merge():
    mapped = {}
    for label, n in TABLE_COUNTS.items():
        key = map_stage2_label(label)
        mapped[key] = mapped.get(key, 0) + n
    assert mapped["ISOL_FLOW"] == 50
    assert mapped["LOAC"] == 89
    assert mapped["LOOP"] == 54


# -- splitting ---------------------------------------------------------------------


def make_corpus(labels):
    return Corpus(
        [EventRecord.from_text(f"e{i}", f"text {i}", label=lab) for i, lab in enumerate(labels)]
    )


def test_split_small_stratified():
    corpus = make_corpus(["A"] * 5 + ["B"] * 5)
    train, test = split_train_test(corpus, 0.7, seed=0)
    assert len(train) + len(test) == 10
    for lab in ("A", "B"):
        assert train.class_counts[lab] in (3, 4)


def test_split_deterministic():
    corpus = make_corpus(["A"] * 20 + ["B"] * 10)
    a1, b1 = split_train_test(corpus, 0.7, seed=42)
    a2, b2 = split_train_test(corpus, 0.7, seed=42)
    assert [e.id for e in a1] == [e.id for e in a2]
    assert [e.id for e in b1] == [e.id for e in b2]


def test_split_is_partition():
    rng = np.random.default_rng(0)
    for trial in range(20):
        labels = [f"C{i}" for i in rng.integers(0, 4, size=40)]
        corpus = make_corpus(labels)
        frac = float(rng.uniform(0.2, 0.8))
        train, test = split_train_test(corpus, frac, seed=trial)
        train_ids = {e.id for e in train}
        test_ids = {e.id for e in test}
        assert not (train_ids & test_ids)
        assert train_ids | test_ids == {e.id for e in corpus}


def test_split_per_class_deviation_at_most_one():
    corpus = make_corpus(["A"] * 13 + ["B"] * 7)
    train, _ = split_train_test(corpus, 0.7, seed=1)
    assert abs(train.class_counts["A"] - 0.7 * 13) <= 1
    assert abs(train.class_counts["B"] - 0.7 * 7) <= 1


def test_split_singleton_class_goes_to_train():
    corpus = make_corpus(["A"] * 6 + ["B"])
    train, test = split_train_test(corpus, 0.5, seed=0)
    assert train.class_counts["B"] == 1
    assert "B" not in test.class_counts


def test_split_table_scale_test_size():
    corpus = generate_synthetic(SyntheticSpec(counts=TABLE_COUNTS, seed=4))
    train, test = split_train_test(corpus, 0.7, seed=4)
    assert len(train) == 7649
    assert len(test) == 3279


def test_split_rejects_bad_fraction():
    corpus = make_corpus(["A", "B"])
    with pytest.raises(ValueError):
        split_train_test(corpus, 1.0, seed=0)


def test_stratified_split_indices_accepts_generator():
    rng = np.random.default_rng(0)
    first, second = stratified_split_indices(["a"] * 10 + ["b"] * 10, 0.5, rng)
    assert len(first) == 10 and len(second) == 10
