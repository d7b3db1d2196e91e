"""Keyword-pattern vocabulary and text vectorization.

The vocabulary is an ordered list of patterns, each a group of literal
sub-pattern phrases with a category.  A text's feature vector counts, per
pattern, the non-overlapping occurrences of its sub-patterns as whole-token
sequences.  Matching is case-sensitive: the shipped vocabulary enumerates
case variants on purpose, and case folding would make short acronyms like
``AC`` spuriously frequent.

Counting runs on a token-level Aho-Corasick automaton so a corpus pass is
linear in its token count regardless of vocabulary size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .text import tokenize

CATEGORIES: tuple[str, ...] = (
    "SD_MODE",
    "LOSS_OF_SDC",
    "LOAC",
    "ISOL_FLOW",
    "LOCA",
    "LOOP",
    "SFP",
)


class VocabularyError(ValueError):
    """Raised when a vocabulary document violates its structural invariants."""


@dataclass(frozen=True)
class SubPattern:
    """A literal phrase, stored with its token sequence."""

    phrase: str
    tokens: tuple[str, ...]

    @classmethod
    def from_phrase(cls, phrase: str) -> "SubPattern":
        tokens = tuple(tokenize(phrase))
        if not tokens:
            raise VocabularyError(f"sub-pattern {phrase!r} has no tokens")
        return cls(phrase=phrase, tokens=tokens)


@dataclass(frozen=True)
class Pattern:
    index: int
    category: str
    sub_patterns: tuple[SubPattern, ...]


@dataclass
class PatternVocabulary:
    name: str
    version: str
    patterns: tuple[Pattern, ...]
    _matcher: "_TokenAutomaton | None" = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def matcher(self) -> "_TokenAutomaton":
        if self._matcher is None:
            self._matcher = _TokenAutomaton(self.patterns)
        return self._matcher

    def category_sizes(self) -> dict[str, int]:
        sizes: dict[str, int] = {}
        for p in self.patterns:
            sizes[p.category] = sizes.get(p.category, 0) + 1
        return sizes


def load_vocabulary(source: str | Path | dict) -> PatternVocabulary:
    """Parse and validate a vocabulary document (JSON path, text, or dict).

    Validation errors name the offending entry: duplicate or gapped indices,
    empty sub-pattern lists, unknown categories.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text(encoding="utf-8") if _looks_like_path(source) else str(source)
        doc = json.loads(text)

    raw_patterns = doc.get("patterns")
    if not isinstance(raw_patterns, list) or not raw_patterns:
        raise VocabularyError("vocabulary document has no patterns")

    by_index: dict[int, Pattern] = {}
    for entry in raw_patterns:
        idx = entry.get("index")
        if not isinstance(idx, int) or idx < 0:
            raise VocabularyError(f"bad pattern index: {idx!r}")
        if idx in by_index:
            raise VocabularyError(f"duplicate index {idx}")
        category = entry.get("category")
        if category not in CATEGORIES:
            raise VocabularyError(f"pattern {idx}: unknown category {category!r}")
        subs = entry.get("sub_patterns")
        if not isinstance(subs, list) or not subs:
            raise VocabularyError(f"pattern {idx}: empty sub-pattern list")
        by_index[idx] = Pattern(
            index=idx,
            category=category,
            sub_patterns=tuple(SubPattern.from_phrase(s) for s in subs),
        )

    for k in range(len(by_index)):
        if k not in by_index:
            raise VocabularyError(f"gap at {k}")

    return PatternVocabulary(
        name=str(doc.get("name", "unnamed")),
        version=str(doc.get("version", "0")),
        patterns=tuple(by_index[k] for k in range(len(by_index))),
    )


def _looks_like_path(source: str | Path) -> bool:
    if isinstance(source, Path):
        return True
    stripped = source.lstrip()
    return not (stripped.startswith("{") or stripped.startswith("["))


def default_vocabulary() -> PatternVocabulary:
    """The vocabulary shipped with the package (44 patterns, 7 categories)."""
    text = resources.files("sdiekit").joinpath("data/default_patterns.json").read_text("utf-8")
    return load_vocabulary(json.loads(text))


@dataclass(frozen=True)
class Span:
    """One sub-pattern match: token interval [start, end) in the text."""

    pattern_index: int
    start: int
    end: int


class _TokenAutomaton:
    """Aho-Corasick over token sequences.

    States are trie nodes keyed by token strings; outputs carry the phrase's
    (pattern index, length).  ``spans`` post-filters each phrase's raw match
    stream to the greedy left-to-right non-overlapping subset, which for
    fixed-length phrases is exactly what a naive forward scan yields.
    """

    def __init__(self, patterns: Sequence[Pattern]):
        # phrase id -> (pattern index, phrase token length)
        self._phrase_info: list[tuple[int, int]] = []
        goto: list[dict[str, int]] = [{}]
        out: list[list[int]] = [[]]
        for pattern in patterns:
            for sub in pattern.sub_patterns:
                phrase_id = len(self._phrase_info)
                self._phrase_info.append((pattern.index, len(sub.tokens)))
                state = 0
                for tok in sub.tokens:
                    nxt = goto[state].get(tok)
                    if nxt is None:
                        nxt = len(goto)
                        goto.append({})
                        out.append([])
                        goto[state][tok] = nxt
                    state = nxt
                out[state].append(phrase_id)

        fail = [0] * len(goto)
        queue: list[int] = []
        for state in goto[0].values():
            queue.append(state)
        head = 0
        while head < len(queue):
            state = queue[head]
            head += 1
            for tok, nxt in goto[state].items():
                queue.append(nxt)
                f = fail[state]
                while f and tok not in goto[f]:
                    f = fail[f]
                fail[nxt] = goto[f].get(tok, 0) if goto[f].get(tok, 0) != nxt else 0
                out[nxt] = out[nxt] + out[fail[nxt]]
        self._goto = goto
        self._fail = fail
        self._out = out

    def raw_matches(self, tokens: Sequence[str]) -> list[tuple[int, int]]:
        """All (phrase id, end position) matches, end positions ascending."""
        goto, fail, out = self._goto, self._fail, self._out
        state = 0
        hits: list[tuple[int, int]] = []
        for pos, tok in enumerate(tokens):
            while state and tok not in goto[state]:
                state = fail[state]
            state = goto[state].get(tok, 0)
            if out[state]:
                for phrase_id in out[state]:
                    hits.append((phrase_id, pos + 1))
        return hits

    def spans(self, tokens: Sequence[str]) -> list[Span]:
        next_allowed = [0] * len(self._phrase_info)
        spans: list[Span] = []
        for phrase_id, end in self.raw_matches(tokens):
            pattern_index, length = self._phrase_info[phrase_id]
            start = end - length
            if start >= next_allowed[phrase_id]:
                next_allowed[phrase_id] = end
                spans.append(Span(pattern_index=pattern_index, start=start, end=end))
        spans.sort(key=lambda s: (s.start, s.pattern_index, s.end))
        return spans


def count_sub_pattern(text: str, sub: SubPattern) -> int:
    """Non-overlapping left-to-right occurrences of ``sub`` on token boundaries."""
    tokens = tokenize(text)
    target = sub.tokens
    width = len(target)
    count = 0
    i = 0
    limit = len(tokens) - width
    while i <= limit:
        if tuple(tokens[i : i + width]) == target:
            count += 1
            i += width
        else:
            i += 1
    return count


def match_spans(text: str, vocabulary: PatternVocabulary) -> list[Span]:
    """All sub-pattern matches in level-1 ``text`` as token intervals.

    Span totals per pattern index agree with :func:`vectorize` by
    construction; sub-patterns of distinct patterns may overlap.
    """
    return vocabulary.matcher.spans(tokenize(text))


def vectorize(text: str, vocabulary: PatternVocabulary) -> np.ndarray:
    """Feature vector: per pattern, summed sub-pattern occurrence counts."""
    counts = np.zeros(len(vocabulary), dtype=np.int64)
    for span in vocabulary.matcher.spans(tokenize(text)):
        counts[span.pattern_index] += 1
    return counts


def vectorize_corpus(texts: Iterable[str], vocabulary: PatternVocabulary) -> np.ndarray:
    """Stack of feature vectors, one row per text."""
    rows = [vectorize(t, vocabulary) for t in texts]
    if not rows:
        return np.zeros((0, len(vocabulary)), dtype=np.int64)
    return np.vstack(rows)


def pattern_distribution(features: np.ndarray) -> np.ndarray:
    """Per-pattern mean occurrence count over a non-empty feature matrix."""
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("pattern_distribution needs a non-empty feature matrix")
    return features.mean(axis=0)
