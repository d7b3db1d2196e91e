import json

import numpy as np
import pytest

from sdiekit.patterns import (
    PatternVocabulary,
    SubPattern,
    VocabularyError,
    count_sub_pattern,
    default_vocabulary,
    load_vocabulary,
    match_spans,
    pattern_distribution,
    vectorize,
    vectorize_corpus,
)
from sdiekit.text import tokenize


def naive_counts(text, vocab):
    """Quadratic token-scan oracle, independent of the automaton path."""
    tokens = tokenize(text)
    out = np.zeros(len(vocab), dtype=int)
    for pattern in vocab.patterns:
        for sub in pattern.sub_patterns:
            target = list(sub.tokens)
            i = 0
            while i + len(target) <= len(tokens):
                if tokens[i : i + len(target)] == target:
                    out[pattern.index] += 1
                    i += len(target)
                else:
                    i += 1
    return out


def random_texts(n, seed, vocab):
    rng = np.random.default_rng(seed)
    phrases = [s.phrase for p in vocab.patterns for s in p.sub_patterns]
    fillers = [
        "the", "pump", "operators", "during", "maintenance", "breaker", "panel",
        "valve", "observed", "restored", "crew", "procedure", "alarm", "tank",
    ]
    pool = phrases + fillers
    texts = []
    for _ in range(n):
        k = int(rng.integers(0, 30))
        texts.append(" ".join(pool[i] for i in rng.integers(0, len(pool), size=k)))
    return texts


@pytest.fixture(scope="module")
def vocab():
    return default_vocabulary()


# -- vocabulary loading -----------------------------------------------------


def test_default_vocabulary_shape(vocab):
    assert len(vocab) == 44
    assert vocab.category_sizes() == {
        "SD_MODE": 9,
        "LOSS_OF_SDC": 6,
        "LOAC": 8,
        "ISOL_FLOW": 11,
        "LOCA": 6,
        "LOOP": 3,
        "SFP": 1,
    }


def test_default_vocabulary_sfp_row(vocab):
    sfp = [p for p in vocab.patterns if p.category == "SFP"]
    assert len(sfp) == 1
    assert [s.phrase for s in sfp[0].sub_patterns] == [
        "Spent Fuel Pool",
        "spent fuel cooling",
        "SFP",
    ]


def test_load_single_pattern_document():
    doc = {"name": "tiny", "version": "1", "patterns": [
        {"index": 0, "category": "LOOP", "sub_patterns": ["loss of power"]},
    ]}
    v = load_vocabulary(doc)
    assert len(v) == 1
    assert v.patterns[0].sub_patterns[0].tokens == ("loss", "of", "power")


def test_load_rejects_index_gap():
    doc = {"patterns": [
        {"index": 0, "category": "LOOP", "sub_patterns": ["a b"]},
        {"index": 2, "category": "LOOP", "sub_patterns": ["c"]},
    ]}
    with pytest.raises(VocabularyError, match="gap at 1"):
        load_vocabulary(doc)


def test_load_rejects_duplicate_index():
    doc = {"patterns": [
        {"index": 0, "category": "LOOP", "sub_patterns": ["a"]},
        {"index": 0, "category": "LOOP", "sub_patterns": ["b"]},
    ]}
    with pytest.raises(VocabularyError, match="duplicate index 0"):
        load_vocabulary(doc)


def test_load_rejects_empty_sub_patterns():
    doc = {"patterns": [{"index": 0, "category": "LOOP", "sub_patterns": []}]}
    with pytest.raises(VocabularyError, match="empty sub-pattern"):
        load_vocabulary(doc)


def test_load_rejects_unknown_category():
    doc = {"patterns": [{"index": 0, "category": "BOGUS", "sub_patterns": ["a"]}]}
    with pytest.raises(VocabularyError, match="unknown category"):
        load_vocabulary(doc)


def test_load_from_json_text():
    text = json.dumps({"patterns": [
        {"index": 0, "category": "SFP", "sub_patterns": ["SFP"]},
    ]})
    assert len(load_vocabulary(text)) == 1


# -- counting ----------------------------------------------------------------


def test_count_empty_text(vocab):
    sub = vocab.patterns[12].sub_patterns[2]  # "SDC"
    assert count_sub_pattern("", sub) == 0


def test_count_whole_token_only():
    sub = SubPattern.from_phrase("SDC")
    assert count_sub_pattern("SDC SDC pump", sub) == 2
    ac = SubPattern.from_phrase("AC")
    assert count_sub_pattern("the reactor", ac) == 0
    assert count_sub_pattern("ACTUATED breaker", ac) == 0


def test_count_requires_consecutive_tokens():
    sub = SubPattern.from_phrase("loss of power")
    assert count_sub_pattern("loss of offsite power", sub) == 0


def test_count_non_overlapping():
    sub = SubPattern.from_phrase("SDC SDC")
    assert count_sub_pattern("SDC SDC SDC", sub) == 1


def test_count_case_sensitive():
    sub = SubPattern.from_phrase("Cold Shutdown")
    assert count_sub_pattern("cold shutdown entered", sub) == 0
    assert count_sub_pattern("Cold Shutdown entered", sub) == 1


# -- vectorization -----------------------------------------------------------


def test_vectorize_empty(vocab):
    assert vectorize("", vocab).sum() == 0


def test_vectorize_worked_example(vocab):
    x = vectorize("Mode 5 Cold Shutdown entered; loss of SDC occurred", vocab)
    expected = {2: 1, 5: 1, 9: 1, 12: 1}
    for k, count in enumerate(x):
        assert count == expected.get(k, 0), f"pattern {k}"


def test_vectorize_cross_pattern_overlap(vocab):
    x = vectorize("partial loss of offsite power", vocab)
    assert x[16] == 1
    assert x[40] == 1
    assert x[41] == 0


def test_vectorize_matches_naive_oracle(vocab):
    for text in random_texts(300, seed=5, vocab=vocab):
        np.testing.assert_array_equal(vectorize(text, vocab), naive_counts(text, vocab))


def test_vectorize_monotone_under_append(vocab):
    texts = random_texts(50, seed=9, vocab=vocab)
    for a, b in zip(texts, texts[1:]):
        xa = vectorize(a, vocab)
        xab = vectorize(a + " " + b, vocab)
        assert (xab >= xa).all()


def test_vectorize_concatenation_dominates_parts(vocab):
    texts = random_texts(40, seed=11, vocab=vocab)
    for a, b in zip(texts, texts[1:]):
        xa, xb = vectorize(a, vocab), vectorize(b, vocab)
        xab = vectorize(a + " " + b, vocab)
        assert (xab >= np.maximum(xa, xb)).all()


# -- spans --------------------------------------------------------------------


def test_match_spans_empty(vocab):
    assert match_spans("", vocab) == []


def test_match_spans_single(vocab):
    spans = match_spans("SDC", vocab)
    assert len(spans) == 1
    assert spans[0].pattern_index == 12
    assert (spans[0].start, spans[0].end) == (0, 1)


def test_match_spans_consistent_with_vectorize(vocab):
    for text in random_texts(500, seed=17, vocab=vocab):
        x = vectorize(text, vocab)
        spans = match_spans(text, vocab)
        per_index = np.zeros(len(vocab), dtype=int)
        for span in spans:
            assert span.start < span.end
            per_index[span.pattern_index] += 1
        np.testing.assert_array_equal(per_index, x)


# -- distributions -------------------------------------------------------------


def test_pattern_distribution_single_event(vocab):
    x = vectorize("loss of SDC", vocab)
    np.testing.assert_allclose(pattern_distribution(x[None, :]), x)


def test_pattern_distribution_mean():
    features = np.array([[0, 2], [2, 2]])
    np.testing.assert_allclose(pattern_distribution(features), [1.0, 2.0])


def test_pattern_distribution_empty_errors():
    with pytest.raises(ValueError):
        pattern_distribution(np.zeros((0, 44)))


def test_vectorize_corpus_stacks(vocab):
    rows = vectorize_corpus(["SDC", "trip trip"], vocab)
    assert rows.shape == (2, 44)
    assert rows[0, 12] == 1
    assert rows[1, 30] == 2
