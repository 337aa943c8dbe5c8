"""Iu Mien speech recognition toolkit.

Deterministic components of a lexicon- and LM-constrained CTC recognition
pipeline: IMUC orthography parsing, table-driven G2P lexicon construction,
BPE subword tokenization, back-off n-gram language modeling, CTC loss and
beam decoding over precomputed emission matrices, phoneme-head transfer
initialization, and WER/PER scoring with cross-validation splits.
"""

__version__ = "0.1.0"

BLANK_ID = 0          # CTC blank index, fixed repo-wide
BLANK_TOKEN = "<blk>"
UNK_TOKEN = "<unk>"
