"""Two-level text cleaning for event reports.

Level 1 removes formatting junk (control markers, literal ``\\n`` strings,
whitespace runs) while preserving the wording and casing that pattern
matching relies on.  Level 2 additionally drops stopwords and stems the
surviving tokens; it is what the stage-2 encoder consumes.
"""

from __future__ import annotations

import re
from typing import Sequence

# Format markers commonly found in exported event reports.  The list is
# configurable per corpus; matches are replaced by a space so that words
# separated only by a marker do not fuse.
DEFAULT_STRIP_LIST: tuple[str, ...] = ("_0x00D_", "***", "\r", "\\n")

_WS_RUN = re.compile(r"\s+")
_TOKEN = re.compile(r"[0-9A-Za-z]+")


def clean_format(raw: str, strip_list: Sequence[str] = DEFAULT_STRIP_LIST) -> str:
    """Produce level-1 text: strip-list markers gone, whitespace normalized.

    Casing is untouched.  Total function; idempotent.
    """
    text = raw
    for marker in strip_list:
        text = text.replace(marker, " ")
    text = text.replace("\n", " ")
    return _WS_RUN.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split into case-sensitive alphanumeric tokens; punctuation separates."""
    return _TOKEN.findall(text)


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their (start, end) character offsets in ``text``."""
    return [(m.group(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


# Fixed list of common English function words, versioned with the package so
# cleaning output never drifts with external resources.
STOPWORDS: frozenset[str] = frozenset(
    """
    a about above after again against all am an and any are aren't as at be
    because been before being below between both but by can cannot can't
    could couldn't did didn't do does doesn't doing don't down during each
    few for from further had hadn't has hasn't have haven't having he he'd
    he'll he's her here here's hers herself him himself his how how's i i'd
    i'll i'm i've if in into is isn't it it's its itself let's me more most
    mustn't my myself no nor not of off on once only or other ought our ours
    ourselves out over own same shan't she she'd she'll she's should
    shouldn't so some such than that that's the their theirs them themselves
    then there there's these they they'd they'll they're they've this those
    through to too under until up very was wasn't we we'd we'll we're we've
    were weren't what what's when when's where where's which while who who's
    whom why why's with won't would wouldn't you you'd you'll you're you've
    your yours yourself yourselves
    """.split()
)

# Suffix rules tried in order; first applicable rule is applied and the scan
# restarts, so each token reaches a fixed point.
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ies", "y"),
    ("es", ""),
    ("s", ""),
    ("ed", ""),
    ("ing", ""),
)
_MIN_STEM_LEN = 3


def stem(token: str) -> str:
    """Rule-based suffix stemmer; deterministic, casing preserved.

    Rules only apply when the result keeps at least ``_MIN_STEM_LEN``
    characters, and the bare ``s`` rule never fires on an ``ss`` ending
    ("loss" stays "loss").  Iterated to a fixed point so that
    ``stem(stem(t)) == stem(t)``.
    """
    while True:
        for suffix, replacement in _SUFFIX_RULES:
            if not token.endswith(suffix):
                continue
            if suffix == "s" and token.endswith("ss"):
                continue
            candidate = token[: len(token) - len(suffix)] + replacement
            if len(candidate) >= _MIN_STEM_LEN:
                token = candidate
                break
        else:
            return token


def normalize(level1: str) -> str:
    """Produce level-2 text: stopwords removed, remaining tokens stemmed.

    Stopword membership is tested case-insensitively; stems keep their
    original casing.  The output is filtered against the stopword list a
    second time because a stem can itself land on a stopword, and the whole
    operation must be idempotent.
    """
    kept = [t for t in level1.split() if t.casefold() not in STOPWORDS]
    stems = (stem(t) for t in kept)
    return " ".join(s for s in stems if s.casefold() not in STOPWORDS)
