#!/usr/bin/env python3
"""Lexicon- and LM-constrained beam search over emissions.

The lexicon compiles into a prefix tree; beam search walks its arcs, so
only real words can come out, and each committed word picks up its n-gram
score on the fly.  A homophone pair shows why the language model matters:
acoustics alone cannot separate words that sound identical.
"""

from mienasr.ctc import EmissionMatrix
from mienasr.decoder import DecodeConfig, build_prefix_tree, decode_phoneme
from mienasr.fixtures import homophone_case, peaked_emissions
from mienasr.lexicon import build_lexicon, default_g2p_table, derive_phoneme_vocab
from mienasr.lm import lm_train
from mienasr.orthography import default_inventory

inv, table = default_inventory(), default_g2p_table()
corpus = ["mbuo mienh nyei dorn", "mienh nyei dorn daaih", "mbuo nyei mienh"]
entries, _ = build_lexicon([w for s in corpus for w in s.split()], table, inv)
vocab = derive_phoneme_vocab(entries)
tree = build_prefix_tree(entries, vocab)
print(f"lexicon: {len(entries)} words, trie has {tree.node_count} nodes "
      f"(vs {sum(len(e.pron) for e in entries)} unshared phonemes)")

pron = {e.word: e.pron for e in entries}
truth = "mbuo mienh nyei dorn".split()
ids = [vocab.index(t) for w in truth for t in pron[w]]
em = EmissionMatrix(logits=peaked_emissions(ids, len(vocab)))
model = lm_train(corpus, order=4)

hyps = decode_phoneme(em, tree, model, DecodeConfig(beam_size=16))
print(f"\ntruth:  {' '.join(truth)}")
print(f"decode: {' '.join(hyps[0].words)}")
print("n-best:")
for h in hyps[:4]:
    print(f"  {h.score:9.3f}  ac={h.score_ac:8.3f} lm={h.score_lm:8.3f}  {' '.join(h.words)}")

print("\nhomophones: 'baav' and 'daav' share one pronunciation")
tree, model, logits, truth = homophone_case()
em = EmissionMatrix(logits=logits)
no_lm = decode_phoneme(em, tree, None, DecodeConfig(beam_size=8))
with_lm = decode_phoneme(em, tree, model, DecodeConfig(beam_size=8))
print(f"  without LM -> {no_lm[0].words[0]!r} (score tie, lexicographic pick)")
print(f"  with LM    -> {with_lm[0].words[0]!r} (the text says {truth!r})")
