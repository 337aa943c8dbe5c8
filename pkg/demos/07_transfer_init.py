#!/usr/bin/env python3
"""Initialize a target output head from pre-trained phoneme embeddings.

Rows for phonemes that exist in the source vocabulary are copied verbatim;
everything else (always including the tone digits, which no pre-training
vocabulary carries) is drawn from a seeded uniform distribution.
"""

import numpy as np

from mienasr import BLANK_TOKEN
from mienasr.lexicon import PhonemeVocab
from mienasr.transfer import EmbeddingMatrix, transfer_init

rng = np.random.default_rng(7)
src_labels = (BLANK_TOKEN, "a", "e", "i", "n", "m", "k", "s")
src = EmbeddingMatrix(rows=rng.normal(size=(len(src_labels), 6)),
                      row_labels=src_labels)

tgt = PhonemeVocab((BLANK_TOKEN, "a", "i", "n̥", "ŋ", "k", "1", "2"))
out, report = transfer_init(src, tgt, seed=0)

print(f"target head: {out.rows.shape[0]} rows x {out.rows.shape[1]} dims")
print(f"coverage {report.coverage:.2f}")
print("copied    :", ", ".join(t for t, _ in report.copied))
print("randomized:", ", ".join(report.randomized))

print("\nexact matching keeps /n̥/ apart from /n/; pass normalize=True to")
print("match through diacritic stripping instead:")
_, report_norm = transfer_init(src, tgt, seed=0, normalize=True)
print("copied with normalize:", ", ".join(t for t, _ in report_norm.copied))

row = tgt.index("a")
print(f"\nrow for 'a' is bit-exact: {np.array_equal(out.rows[row], src.rows[1])}")
