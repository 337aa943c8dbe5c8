"""Lexicon- and LM-constrained CTC prefix beam search.

The acoustic-model / lexicon / grammar composition is realized on the fly
rather than as an offline FST: hypotheses walk a prefix tree of lexicon
pronunciations (the L transducer) while the word n-gram model scores each
committed word (the G transducer), all inside a standard CTC prefix search
that keeps blank-ending and non-blank-ending probability mass separately
per prefix.  The search space is the same as the offline composition but
the machinery stays small enough to check against brute-force enumeration.

Two modes share the machinery.  The phoneme path expands only along trie
arcs, so it can never emit a word outside the lexicon; reaching a word-final
node either continues deeper (a longer word) or commits the word, applies
its LM score, and re-enters the trie root.  The subword path expands over
BPE tokens freely and applies the word LM whenever a boundary-marked token
completes the pending word.

Scores are natural logs; ARPA log10 values are converted at this boundary.
Equal scores break toward the lexicographically smaller word sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import BLANK_ID
from .ctc import EmissionMatrix, NEG_INF
from .lexicon import LexiconEntry, PhonemeVocab
from .lm import BOS, EOS, ArpaModel, lm_score
from .tokenizer import MARKER, BpeModel

LN10 = math.log(10.0)


@dataclass(frozen=True)
class DecodeConfig:
    beam_size: int = 32
    lm_weight: float = 1.0
    word_insertion_penalty: float = 0.0
    mode: str = "phoneme"

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.lm_weight < 0:
            raise ValueError("lm_weight must be >= 0")
        if self.mode not in ("phoneme", "subword"):
            raise ValueError(f"unknown decode mode {self.mode!r}")


@dataclass(frozen=True)
class Hypothesis:
    """A completed decode: word sequence with factored scores.

    ``score = score_ac + lm_weight * score_lm + word_insertion_penalty *
    len(words)``; both component scores are natural logs.  ``pending`` holds
    leftover in-progress material and is empty for finalized hypotheses.
    """

    words: tuple[str, ...]
    pending: str
    score_ac: float
    score_lm: float
    score: float


class TrieNode:
    __slots__ = ("children", "words", "phone", "idx")

    def __init__(self, phone: Optional[int], idx: int):
        self.children: dict[int, TrieNode] = {}
        self.words: tuple[str, ...] = ()
        self.phone = phone   # phoneme id on the incoming arc, None at root
        self.idx = idx


@dataclass
class PrefixTree:
    root: TrieNode
    vocab: PhonemeVocab
    node_count: int          # nodes excluding the root
    words: frozenset[str]


def build_prefix_tree(lexicon: Sequence[LexiconEntry], vocab: PhonemeVocab) -> PrefixTree:
    """Compile lexicon pronunciations into a shared-prefix tree.

    Duplicate pronunciations merge into one path carrying several word-final
    labels.  Raises KeyError if a pronunciation token is outside the vocab.
    """
    root = TrieNode(None, 0)
    count = 0
    for entry in lexicon:
        if not entry.pron:
            raise ValueError(f"word {entry.word!r} has an empty pronunciation")
        node = root
        for tok in entry.pron:
            pid = vocab.index(tok)
            if pid == BLANK_ID:
                raise ValueError(f"word {entry.word!r} pronunciation contains the blank")
            nxt = node.children.get(pid)
            if nxt is None:
                count += 1
                nxt = TrieNode(pid, count)
                node.children[pid] = nxt
            node = nxt
        if entry.word not in node.words:
            node.words = tuple(sorted(node.words + (entry.word,)))
    return PrefixTree(root=root, vocab=vocab, node_count=count,
                      words=frozenset(e.word for e in lexicon))


def _lm10(model: Optional[ArpaModel], history: tuple[str, ...], word: str) -> float:
    if model is None:
        return 0.0
    return lm_score(model, history, word)


class _Beam:
    """Accumulates (blank, non-blank) log mass per search state."""

    def __init__(self):
        self.states: dict = {}

    def add_blank(self, key, aux, mass):
        entry = self.states.get(key)
        if entry is None:
            self.states[key] = [mass, NEG_INF, aux]
        else:
            entry[0] = np.logaddexp(entry[0], mass)

    def add_nonblank(self, key, aux, mass):
        entry = self.states.get(key)
        if entry is None:
            self.states[key] = [NEG_INF, mass, aux]
        else:
            entry[1] = np.logaddexp(entry[1], mass)


def decode_phoneme(
    em: EmissionMatrix,
    lex: PrefixTree,
    lm: Optional[ArpaModel],
    cfg: DecodeConfig = DecodeConfig(),
) -> list[Hypothesis]:
    """Trie-constrained CTC prefix beam search with word-LM composition.

    Returns all completed hypotheses in the final beam, best first.  The LM
    scores each committed word given the preceding words (with <s> context)
    plus the final </s> event; homophones at one trie node spawn parallel
    hypotheses.
    """
    if em.vocab_size != len(lex.vocab):
        raise ValueError(
            f"emission vocab size {em.vocab_size} != lexicon phoneme vocab {len(lex.vocab)}"
        )
    if not lex.root.children:
        raise ValueError("empty lexicon")
    logits = em.logits
    root = lex.root
    lam, wip = cfg.lm_weight, cfg.word_insertion_penalty

    # state key: (committed words, trie node); aux: accumulated LM log10
    states = {((), root): [0.0, NEG_INF, 0.0]}

    def combined(key, entry):
        words = key[0]
        return (np.logaddexp(entry[0], entry[1])
                + lam * LN10 * entry[2] + wip * len(words))

    for t in range(em.frames):
        y = logits[t]
        beam = _Beam()
        for (words, node), (pb, pnb, lm10) in states.items():
            total = np.logaddexp(pb, pnb)
            key = (words, node)
            beam.add_blank(key, lm10, total + y[BLANK_ID])
            if node is not root:
                beam.add_nonblank(key, lm10, pnb + y[node.phone])
            for pid, child in node.children.items():
                base = pb if node.phone == pid else total
                beam.add_nonblank((words, child), lm10, base + y[pid])
            if node.words:
                for w in node.words:
                    w_lm10 = lm10 + _lm10(lm, (BOS,) + words, w)
                    new_words = words + (w,)
                    for pid, child in root.children.items():
                        base = pb if node.phone == pid else total
                        beam.add_nonblank((new_words, child), w_lm10, base + y[pid])
        ranked = sorted(
            beam.states.items(),
            key=lambda kv: (-combined(kv[0], kv[1]), kv[0][0], kv[0][1].idx),
        )
        states = dict(ranked[:cfg.beam_size])

    finals: dict[tuple[str, ...], list[float]] = {}

    def emit(words, ac, lm10):
        if ac == NEG_INF:
            return
        entry = finals.get(words)
        if entry is None:
            finals[words] = [ac, lm10]
        else:
            entry[0] = np.logaddexp(entry[0], ac)  # homophonic pronunciations

    for (words, node), (pb, pnb, lm10) in states.items():
        ac = np.logaddexp(pb, pnb)
        if node is root:
            emit(words, ac, lm10 + _lm10(lm, (BOS,) + words, EOS))
        for w in node.words:
            full = words + (w,)
            w_lm10 = lm10 + _lm10(lm, (BOS,) + words, w)
            emit(full, ac, w_lm10 + _lm10(lm, (BOS,) + full, EOS))

    hyps = []
    for words, (ac, lm10) in finals.items():
        score_lm = LN10 * lm10
        hyps.append(Hypothesis(
            words=words, pending="", score_ac=float(ac), score_lm=float(score_lm),
            score=float(ac + lam * score_lm + wip * len(words)),
        ))
    hyps.sort(key=lambda h: (-h.score, h.words))
    return hyps


def decode_subword(
    em: EmissionMatrix,
    bpe: BpeModel,
    lm: Optional[ArpaModel],
    cfg: DecodeConfig = DecodeConfig(mode="subword"),
) -> list[Hypothesis]:
    """CTC prefix beam search over BPE tokens with word-boundary LM scoring.

    The hypothesis unit is the collapsed token sequence; the word LM fires
    when a boundary-marked token closes the pending word and once more for
    the final word and </s> at the end.  Tokens outside the lexicon simply
    spell OOV words, which the LM scores through <unk>.
    """
    V = len(bpe.vocab)
    if em.vocab_size != V:
        raise ValueError(f"emission vocab size {em.vocab_size} != BPE vocab {V}")
    logits = em.logits
    lam, wip = cfg.lm_weight, cfg.word_insertion_penalty

    # state key: token id tuple; aux: (words, partial word, LM log10)
    states = {(): [0.0, NEG_INF, ((), "", 0.0)]}

    def combined(entry):
        words = entry[2][0]
        return (np.logaddexp(entry[0], entry[1])
                + lam * LN10 * entry[2][2] + wip * len(words))

    for t in range(em.frames):
        y = logits[t]
        beam = _Beam()
        for toks, (pb, pnb, aux) in states.items():
            words, partial, lm10 = aux
            total = np.logaddexp(pb, pnb)
            beam.add_blank(toks, aux, total + y[BLANK_ID])
            if toks:
                beam.add_nonblank(toks, aux, pnb + y[toks[-1]])
            for k in range(1, V):
                base = pb if (toks and toks[-1] == k) else total
                tok = bpe.vocab[k]
                if tok.startswith(MARKER):
                    if partial:
                        new_aux = (words + (partial,), tok[len(MARKER):],
                                   lm10 + _lm10(lm, (BOS,) + words, partial))
                    else:
                        new_aux = (words, tok[len(MARKER):], lm10)
                else:
                    new_aux = (words, partial + tok, lm10)
                beam.add_nonblank(toks + (k,), new_aux, base + y[k])
        ranked = sorted(
            beam.states.items(),
            key=lambda kv: (-combined(kv[1]), kv[1][2][0], kv[0]),
        )
        states = dict(ranked[:cfg.beam_size])

    hyps = []
    for toks, (pb, pnb, (words, partial, lm10)) in states.items():
        ac = np.logaddexp(pb, pnb)
        if ac == NEG_INF:
            continue
        full = words + ((partial,) if partial else ())
        if partial:
            lm10 = lm10 + _lm10(lm, (BOS,) + words, partial)
        lm10 = lm10 + _lm10(lm, (BOS,) + full, EOS)
        score_lm = LN10 * lm10
        hyps.append(Hypothesis(
            words=full, pending="", score_ac=float(ac), score_lm=float(score_lm),
            score=float(ac + lam * score_lm + wip * len(full)),
        ))
    hyps.sort(key=lambda h: (-h.score, h.words))
    return hyps


def decode(em: EmissionMatrix, cfg: DecodeConfig, *, lex: Optional[PrefixTree] = None,
           bpe: Optional[BpeModel] = None, lm: Optional[ArpaModel] = None) -> list[Hypothesis]:
    """Mode dispatcher used by the CLI and the experiment driver."""
    if cfg.mode == "phoneme":
        if lex is None:
            raise ValueError("phoneme decoding requires a prefix tree")
        return decode_phoneme(em, lex, lm, cfg)
    if bpe is None:
        raise ValueError("subword decoding requires a BPE model")
    return decode_subword(em, bpe, lm, cfg)
