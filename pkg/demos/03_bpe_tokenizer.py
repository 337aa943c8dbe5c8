#!/usr/bin/env python3
"""Train the subword tokenizer and round-trip some text.

Standard BPE over whitespace-pretokenized words: word-initial symbols get a
boundary marker, the most frequent adjacent pair merges each step, and ties
break to the lexicographically smallest pair so training is reproducible.
"""

from mienasr.tokenizer import bpe_decode, bpe_encode, bpe_train

corpus = [
    "yie mingh nyei dorn",
    "mbuo mienh nyei waac",
    "yie nyei mienh mingh",
    "dorn mingh nyei",
    "mbuo yie nyei mienh",
]

# asking for more tokens than repeated pairs can supply logs a warning and
# returns the smaller vocabulary instead of failing
model = bpe_train(corpus, vocab_size=40)
print(f"trained: {len(model.vocab)} tokens, {len(model.merges)} merges")
print("first merges:", model.merges[:6])

line = "yie mingh nyei"
ids = bpe_encode(line, model)
print(f"\nencode {line!r} -> {ids}")
print("tokens:", [model.vocab[i] for i in ids])
print("decode ->", repr(bpe_decode(ids, model)))

ids = bpe_encode("zebra mingh", model)
print(f"\nunseen characters become <unk>: {[model.vocab[i] for i in ids]}")
