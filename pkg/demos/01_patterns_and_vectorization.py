#!/usr/bin/env python3
"""Walk through the keyword-pattern vocabulary and text vectorization.

Run: python demos/01_patterns_and_vectorization.py
"""

import numpy as np

from sdiekit import clean_format, default_vocabulary, match_spans, normalize, vectorize
from sdiekit.text import tokenize

vocab = default_vocabulary()
print(f"vocabulary: {vocab.name} v{vocab.version}, {len(vocab)} patterns")
print(f"category sizes: {vocab.category_sizes()}\n")

# A raw report straight out of an export, format junk and all.
raw = "Loss _0x00D_ of *** SDC occurred\\nwhile the unit was in Mode 5  (Cold Shutdown)."
level1 = clean_format(raw)
level2 = normalize(level1)
print(f"raw    : {raw!r}")
print(f"level1 : {level1!r}   <- pattern matching runs on this")
print(f"level2 : {level2!r}   <- the encoder consumes this\n")

x = vectorize(level1, vocab)
print("nonzero feature counts:")
for k in np.flatnonzero(x):
    pattern = vocab.patterns[k]
    phrases = ", ".join(s.phrase for s in pattern.sub_patterns)
    print(f"  x[{k:2d}] = {x[k]}  {pattern.category:<12} ({phrases})")

print("\nmatched spans (token intervals):")
tokens = tokenize(level1)
for span in match_spans(level1, vocab):
    snippet = " ".join(tokens[span.start : span.end])
    print(f"  pattern {span.pattern_index:2d} tokens [{span.start}, {span.end}): {snippet!r}")

# Counting is case-sensitive and token-bounded: "AC" never fires inside
# "ACTUATED", and "loss of power" needs its tokens consecutive.
print()
for text in ("the breaker ACTUATED", "AC bus fault", "loss of offsite power"):
    x = vectorize(text, vocab)
    hits = {int(k): int(x[k]) for k in np.flatnonzero(x)}
    print(f"  {text!r} -> {hits}")
