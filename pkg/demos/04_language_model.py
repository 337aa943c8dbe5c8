#!/usr/bin/env python3
"""Train a back-off 4-gram model, inspect scores, round-trip ARPA.

The default smoothing is interpolated modified Kneser-Ney with a fixed-
discount fallback on tiny corpora; all scores are log10 as in the ARPA
format.  Higher orders never hurt training-set perplexity.
"""

import tempfile
from pathlib import Path

from mienasr.lm import (arpa_read, arpa_write, lm_score, lm_train,
                        normalization_mass, perplexity)

corpus = [
    "mbuo mienh nyei dorn",
    "mienh nyei dorn daaih",
    "mbuo nyei mienh",
    "dorn daaih mbuo nyei",
    "mienh mbuo dorn nyei daaih mienh",
]

for order in (1, 2, 4):
    model = lm_train(corpus, order=order)
    print(f"order {order}: perplexity on training text = "
          f"{perplexity(model, corpus):.3f}")

model = lm_train(corpus, order=4)
print("\nscores are standard back-off (log10):")
print(f"  P(nyei | mienh)        = 10^{lm_score(model, ['mienh'], 'nyei'):.4f}")
print(f"  P(daaih | never seen)  = 10^{lm_score(model, ['zzz'], 'daaih'):.4f}")
print(f"  P(<oov>)               = 10^{lm_score(model, [], 'zzz'):.4f}")

mass = normalization_mass(model, ("mienh",))
print(f"\nsum of P(w | mienh) over the whole vocab = {mass:.9f}")

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "model.arpa"
    arpa_write(model, path)
    reread = arpa_read(path)
    print(f"ARPA round trip: {path.stat().st_size} bytes, "
          f"order {reread.order}, vocab {len(reread.vocab)}")
    print("\nfile head:")
    for line in path.read_text().splitlines()[:8]:
        print("  " + line)
