import numpy as np
import pytest

from sdiekit.corpus import write_jsonl
from sdiekit.patterns import default_vocabulary, vectorize, vectorize_corpus
from sdiekit.synth import (
    DEFAULT_DISTRACTORS,
    DEFAULT_TEMPLATES,
    LOOKALIKE_TEMPLATES,
    SyntheticSpec,
    generate_synthetic,
)

VOCAB = default_vocabulary()


def test_counts_match_spec_exactly():
    counts = {"ISOL": 28, "FLOW": 24, "LOAC": 92, "LOOP": 56, "NON_SDIE": 800}
    corpus = generate_synthetic(SyntheticSpec(counts=counts, noise_rate=0.05, seed=1))
    assert dict(corpus.class_counts) == counts


def test_deterministic_under_seed():
    spec = SyntheticSpec(counts={"LOOP": 10, "NON_SDIE": 30}, noise_rate=0.2, seed=7)
    a = write_jsonl(generate_synthetic(spec))
    b = write_jsonl(generate_synthetic(spec))
    assert a == b


def test_different_seeds_differ():
    base = {"counts": {"LOOP": 10, "NON_SDIE": 30}, "noise_rate": 0.2}
    a = write_jsonl(generate_synthetic(SyntheticSpec(seed=1, **base)))
    b = write_jsonl(generate_synthetic(SyntheticSpec(seed=2, **base)))
    assert a != b


def test_loop_events_carry_loop_patterns():
    corpus = generate_synthetic(SyntheticSpec(counts={"LOOP": 3}, seed=0))
    assert len(corpus) == 3
    for event in corpus:
        x = vectorize(event.level1_text, VOCAB)
        assert x[40:43].sum() >= 1


def test_sdie_events_carry_mode_patterns():
    corpus = generate_synthetic(
        SyntheticSpec(counts={"ISOL": 5, "LOAC": 5, "LOCA": 5, "SFP": 5, "FLOW": 5}, seed=2)
    )
    for event in corpus:
        x = vectorize(event.level1_text, VOCAB)
        assert x[0:9].sum() >= 1, event.level1_text


def test_clean_non_events_vectorize_to_zero():
    corpus = generate_synthetic(SyntheticSpec(counts={"NON_SDIE": 100}, noise_rate=0.0, seed=3))
    features = vectorize_corpus(corpus.level1_texts(), VOCAB)
    assert features.sum() == 0


def test_every_distractor_sentence_is_pattern_free():
    for sentence in DEFAULT_DISTRACTORS:
        assert vectorize(sentence, VOCAB).sum() == 0, sentence


def test_every_lookalike_template_carries_patterns():
    for template in LOOKALIKE_TEMPLATES:
        text = template.format(mode="Mode 5", pattern="RHR pump")
        assert vectorize(text, VOCAB).sum() >= 2, template


def test_noise_rate_produces_stray_patterns():
    spec = SyntheticSpec(counts={"NON_SDIE": 200}, noise_rate=0.3, seed=4)
    corpus = generate_synthetic(spec)
    features = vectorize_corpus(corpus.level1_texts(), VOCAB)
    noisy = int((features.sum(axis=1) > 0).sum())
    assert 30 <= noisy <= 90  # about 30% of 200


def test_lookalikes_pass_pattern_screening():
    spec = SyntheticSpec(counts={"NON_SDIE": 50}, lookalike_rate=1.0, seed=5)
    corpus = generate_synthetic(spec)
    features = vectorize_corpus(corpus.level1_texts(), VOCAB)
    assert (features.sum(axis=1) >= 1).all()


def test_distribution_separates_embedded_pattern():
    templates = {"FLOW": ["During {mode} the loss of SDC event involved {pattern} equipment."]}
    spec = SyntheticSpec(
        counts={"FLOW": 20, "NON_SDIE": 40}, seed=6, templates=templates
    )
    corpus = generate_synthetic(spec)
    features = vectorize_corpus(corpus.level1_texts(), VOCAB)
    labels = np.array([e.raw_label for e in corpus])
    sdie_mean = features[labels == "FLOW"].mean(axis=0)
    non_mean = features[labels == "NON_SDIE"].mean(axis=0)
    assert sdie_mean[9] > non_mean[9]  # the embedded loss-of-cooling pattern


def test_format_junk_cleaned_at_level1():
    spec = SyntheticSpec(counts={"LOOP": 30, "NON_SDIE": 30}, format_junk_rate=1.0, seed=7)
    corpus = generate_synthetic(spec)
    assert any("_0x00D_" in e.raw_text or "***" in e.raw_text or "\n" in e.raw_text
               for e in corpus)
    for e in corpus:
        assert "_0x00D_" not in e.level1_text
        assert "***" not in e.level1_text
        assert "\n" not in e.level1_text


def test_event_ids_unique_and_labels_assigned():
    spec = SyntheticSpec(counts={"ISOL": 4, "NON_SDIE": 4}, seed=8)
    corpus = generate_synthetic(spec)
    ids = [e.id for e in corpus]
    assert len(set(ids)) == len(ids)
    assert all(e.raw_label in ("ISOL", "NON_SDIE") for e in corpus)


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown class"):
        SyntheticSpec(counts={"BOGUS": 1})
    with pytest.raises(ValueError, match="negative"):
        SyntheticSpec(counts={"LOOP": -1})
    with pytest.raises(ValueError, match="at least one"):
        SyntheticSpec(counts={"LOOP": 0})
    with pytest.raises(ValueError, match="noise_rate"):
        SyntheticSpec(counts={"LOOP": 1}, noise_rate=1.0)


def test_empty_template_pool_errors():
    spec = SyntheticSpec(counts={"ISOL": 1}, templates={})
    with pytest.raises(ValueError, match="empty template pool"):
        generate_synthetic(spec)


def test_from_dict_roundtrip():
    doc = {"counts": {"LOOP": 2, "NON_SDIE": 3}, "noise_rate": 0.1, "seed": 12}
    spec = SyntheticSpec.from_dict(doc)
    assert spec.counts == doc["counts"]
    assert spec.noise_rate == 0.1
    assert spec.seed == 12
    assert spec.templates == DEFAULT_TEMPLATES
