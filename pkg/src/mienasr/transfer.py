"""Output-head initialization from pre-trained phoneme embeddings.

Each row of the pre-trained linear head is the embedding of one phoneme.
For a target vocabulary, rows whose token also appears among the source
labels are copied bit-exactly; the rest are drawn uniformly from
[-scale, +scale] with a seeded generator.  The blank row always copies from
the source blank.  Tone-digit tokens never match: the pre-training
vocabulary carries no tone information, so they are always randomized.

Matching is exact by default; the ``normalize`` flag compares
diacritic-stripped forms instead, for source vocabularies that follow a
split-diphthong / no-diacritic convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import BLANK_TOKEN
from .lexicon import PhonemeVocab, strip_token


@dataclass(frozen=True)
class EmbeddingMatrix:
    rows: np.ndarray          # V x d
    row_labels: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise ValueError(f"embedding matrix must be V x d with d > 0, got {rows.shape}")
        if rows.shape[0] != len(self.row_labels):
            raise ValueError("row count does not match label count")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("duplicate row labels")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def row_of(self, label: str) -> int:
        return self.row_labels.index(label)


@dataclass(frozen=True)
class TransferReport:
    copied: tuple[tuple[str, int], ...]     # (target token, source row index)
    randomized: tuple[str, ...]
    coverage: float


def match_tokens(
    src_labels: Sequence[str], tgt_vocab: PhonemeVocab, normalize: bool = False
) -> dict[str, int]:
    """Map target tokens to source row indices.

    Exact string match by default; with ``normalize`` both sides are
    diacritic-stripped first (first stripped source occurrence wins).
    Tone digits and the blank are excluded.
    """
    if normalize:
        index = {}
        for i, lab in enumerate(src_labels):
            index.setdefault(strip_token(lab), i)
        keyed = lambda tok: strip_token(tok)
    else:
        index = {lab: i for i, lab in enumerate(src_labels)}
        keyed = lambda tok: tok
    matches = {}
    for tok in tgt_vocab.tokens[1:]:
        if tok.isdigit():
            continue
        hit = index.get(keyed(tok))
        if hit is not None:
            matches[tok] = hit
    return matches


def transfer_init(
    src: EmbeddingMatrix,
    tgt_vocab: PhonemeVocab,
    seed: int = 0,
    scale: Optional[float] = None,
    normalize: bool = False,
) -> tuple[EmbeddingMatrix, TransferReport]:
    """Build the target head: copy shared-phoneme rows, randomize the rest.

    ``scale`` defaults to 1/sqrt(d).  Random rows are drawn in target-vocab
    order from one seeded stream, so equal seeds reproduce them exactly.
    The source must contain a blank row for the target blank to copy.
    """
    if len(tgt_vocab) == 0:
        raise ValueError("empty target vocabulary")
    d = src.dim
    if scale is None:
        scale = 1.0 / np.sqrt(d)
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if BLANK_TOKEN not in src.row_labels:
        raise ValueError("source matrix has no blank row to copy")

    matches = match_tokens(src.row_labels, tgt_vocab, normalize=normalize)
    rng = np.random.default_rng(seed)
    out = np.empty((len(tgt_vocab), d), dtype=np.float64)
    copied = []
    randomized = []
    blank_row = src.row_of(BLANK_TOKEN)
    for i, tok in enumerate(tgt_vocab.tokens):
        if i == 0:
            out[i] = src.rows[blank_row]
            continue
        hit = matches.get(tok)
        if hit is not None:
            out[i] = src.rows[hit]
            copied.append((tok, hit))
        else:
            out[i] = rng.uniform(-scale, scale, size=d)
            randomized.append(tok)
    n_real = len(tgt_vocab) - 1
    report = TransferReport(
        copied=tuple(copied),
        randomized=tuple(randomized),
        coverage=len(copied) / n_real if n_real else 0.0,
    )
    return EmbeddingMatrix(rows=out, row_labels=tgt_vocab.tokens), report


def write_matrix(mat: EmbeddingMatrix, path) -> None:
    """Text format: header "V d", then V lines of "label v1 ... vd"."""
    lines = [f"{mat.rows.shape[0]} {mat.dim}"]
    for label, row in zip(mat.row_labels, mat.rows):
        lines.append(label + " " + " ".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path) -> EmbeddingMatrix:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    v, d = (int(x) for x in lines[0].split())
    if len(lines) - 1 != v:
        raise ValueError(f"{path}: header declares {v} rows, found {len(lines) - 1}")
    labels = []
    rows = np.empty((v, d), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != d + 1:
            raise ValueError(f"{path}: row {i} has {len(parts) - 1} values, expected {d}")
        labels.append(parts[0])
        rows[i] = [float(x) for x in parts[1:]]
    return EmbeddingMatrix(rows=rows, row_labels=tuple(labels))
