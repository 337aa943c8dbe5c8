"""Word -> IPA pronunciation lexicon via longest-match grapheme conversion.

Pronunciations are produced by applying an IMUC-grapheme -> IPA table to each
parsed syllable with greedy left-to-right longest match, then appending one
tone-digit token per syllable.  Diacritics are retained and diphthongs stay
single tokens, so e.g. the onsets written "hn" and "n" map to the distinct
tokens /n̥/ and /n/.

Tone digits 1-6 cover the six surface tone marks in the fixed order
(none, h, v, z, x, c).  The table format accepts ``v@checked`` / ``c@checked``
overrides that split the entering tones of stop-final syllables off as
digits 7 and 8, which is how the orthography's eight-tone system is realized
from six written marks.

The table is data (see data/iu_mien_g2p.tsv); published phoneme-inventory
sizes (54 with diacritics, 44 without) are logged as soft checks only, since
they depend on the exact table and corpus coverage.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import BLANK_TOKEN
from .orthography import InventoryConfig, ParseError, Syllable, parse_word

logger = logging.getLogger(__name__)

CHECKED = "checked"
OPEN = "open"

# combining marks plus the aspiration modifier letter; length marks and
# tone digits are never touched
_ASPIRATION = "ʰ"


class G2PError(ValueError):
    """A grapheme span has no table entry.

    Carries the word, the offending syllable surface, and the character
    offset of the untranslatable span within that field.
    """

    def __init__(self, message, word="", syllable="", offset=0):
        super().__init__(message)
        self.word = word
        self.syllable = syllable
        self.offset = offset


class TableError(ValueError):
    """Malformed G2P table file."""


@dataclass(frozen=True)
class G2PTable:
    """Grapheme->IPA entries plus the tone-digit map, immutable after load.

    ``onset_entries`` and ``rime_entries`` are the position-resolved views of
    the table: bare keys appear in both, ``@initial`` / ``@final`` qualified
    keys only in their own view (shadowing the bare key).  ``tone_map`` is
    keyed by (tone_mark, syllable_class) with tone_mark "" for the unmarked
    mid-level tone and class "open" or "checked".
    """

    onset_entries: dict[str, tuple[str, ...]]
    rime_entries: dict[str, tuple[str, ...]]
    tone_map: dict[tuple[str, str], str]

    def tone_digit(self, syllable: Syllable) -> str:
        cls = CHECKED if syllable.checked else OPEN
        return self.tone_map[(syllable.tone_mark, cls)]


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    pron: tuple[str, ...]


@dataclass(frozen=True)
class PhonemeVocab:
    """Frozen phoneme token list with the CTC blank at index 0."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens[0] != BLANK_TOKEN:
            raise ValueError(f"index 0 must be the blank token, got {self.tokens[0]!r}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.tokens)

    def index(self, token: str) -> int:
        try:
            return self.tokens.index(token)
        except ValueError:
            raise KeyError(f"token {token!r} not in phoneme vocabulary") from None


def load_g2p_table(path) -> G2PTable:
    """Load a grapheme->IPA table file.

    Format: UTF-8 TSV ``grapheme TAB ipa-tokens`` (tokens space-separated),
    ``#`` comments, then a ``[tones]`` section of ``tone-mark TAB digit``
    lines where the mark "none" denotes the unmarked tone and marks may carry
    a ``@checked`` qualifier.
    """
    path = Path(path)
    onset: dict[str, tuple[str, ...]] = {}
    rime: dict[str, tuple[str, ...]] = {}
    tone_base: dict[str, str] = {}
    tone_checked: dict[str, str] = {}
    in_tones = False
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.strip() == "[tones]":
            in_tones = True
            continue
        if "\t" not in line:
            raise TableError(f"{path}:{lineno}: expected TAB-separated entry")
        key, value = line.split("\t", 1)
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise TableError(f"{path}:{lineno}: empty key or value")
        if in_tones:
            mark, _, qual = key.partition("@")
            mark = "" if mark == "none" else mark
            if qual not in ("", CHECKED):
                raise TableError(f"{path}:{lineno}: unknown tone qualifier {qual!r}")
            target = tone_checked if qual == CHECKED else tone_base
            if mark in target:
                raise TableError(f"{path}:{lineno}: duplicate tone entry {key!r}")
            target[mark] = value
        else:
            graph, _, qual = key.partition("@")
            tokens = tuple(value.split())
            if qual == "":
                views = (onset, rime)
            elif qual == "initial":
                views = (onset,)
            elif qual == "final":
                views = (rime,)
            else:
                raise TableError(f"{path}:{lineno}: unknown qualifier {qual!r}")
            for view in views:
                if graph in view and qual == "":
                    raise TableError(f"{path}:{lineno}: duplicate entry {graph!r}")
                view[graph] = tokens

    if not tone_base:
        raise TableError(f"{path}: missing [tones] section")
    tone_map = {}
    for mark, digit in tone_base.items():
        tone_map[(mark, OPEN)] = digit
        tone_map[(mark, CHECKED)] = tone_checked.get(mark, digit)
    for mark, digit in tone_checked.items():
        tone_map.setdefault((mark, OPEN), digit)

    base_tokens = {t for toks in list(onset.values()) + list(rime.values()) for t in toks}
    clash = base_tokens & set(tone_map.values())
    if clash:
        raise TableError(f"{path}: tone digits collide with IPA tokens: {sorted(clash)}")
    return G2PTable(onset_entries=onset, rime_entries=rime, tone_map=tone_map)


def default_g2p_table() -> G2PTable:
    return load_g2p_table(Path(__file__).parent / "data" / "iu_mien_g2p.tsv")


def longest_match(s: str, entries: dict[str, tuple[str, ...]]) -> list[str]:
    """Greedy left-to-right maximal munch of ``s`` over the entry keys.

    At each position the longest matching key is consumed; no backtracking.
    Raises G2PError (with the stuck offset) if no key matches.
    """
    max_len = max((len(k) for k in entries), default=0)
    out: list[str] = []
    i = 0
    while i < len(s):
        for cut in range(min(max_len, len(s) - i), 0, -1):
            tokens = entries.get(s[i:i + cut])
            if tokens is not None:
                out.extend(tokens)
                i += cut
                break
        else:
            raise G2PError(f"no table entry matches {s[i:]!r}", offset=i)
    return out


def g2p(word: str, table: G2PTable, inv: InventoryConfig) -> LexiconEntry:
    """Convert one word to its phoneme sequence.

    The word is syllabified first; each syllable's onset and rime are then
    converted by longest match (the rime view sees coda overrides such as
    q -> /ʔ/), and the syllable's tone digit is appended.
    """
    parse = parse_word(word, inv)
    pron: list[str] = []
    for syl in parse.syllables:
        for text, view in ((syl.initial, table.onset_entries), (syl.rime, table.rime_entries)):
            if not text:
                continue
            try:
                pron.extend(longest_match(text, view))
            except G2PError as e:
                raise G2PError(
                    f"word {word!r}, syllable {syl.surface!r}: {e}",
                    word=word, syllable=syl.surface, offset=e.offset,
                ) from None
        try:
            pron.append(table.tone_digit(syl))
        except KeyError:
            raise G2PError(
                f"word {word!r}: no tone entry for mark {syl.tone_mark or 'none'!r}",
                word=word, syllable=syl.surface,
            ) from None
    return LexiconEntry(word=word, pron=tuple(pron))


def build_lexicon(
    words: Iterable[str], table: G2PTable, inv: InventoryConfig
) -> tuple[list[LexiconEntry], list[tuple[str, Exception]]]:
    """One entry per unique translatable word, plus a failure report.

    Words are deduplicated internally, order preserved.  Untranslatable or
    unparseable words are reported, never silently skipped.
    """
    entries: list[LexiconEntry] = []
    failures: list[tuple[str, Exception]] = []
    seen = set()
    for word in words:
        if word in seen:
            continue
        seen.add(word)
        try:
            entries.append(g2p(word, table, inv))
        except (G2PError, ParseError) as e:
            failures.append((word, e))
    return entries, failures


def strip_token(token: str) -> str:
    """Remove diacritics other than tone marking from one IPA token.

    Strips combining marks (voiceless rings, tie bars) and the aspiration
    modifier; length marks, base letters and tone digits pass through.
    """
    return "".join(
        c for c in token
        if c != _ASPIRATION and unicodedata.category(c) != "Mn"
    )


def derive_phoneme_vocab(
    lexicon: Sequence[LexiconEntry],
    strip_diacritics: bool = False,
    expect_size: Optional[int] = None,
) -> PhonemeVocab:
    """Union of all pronunciation tokens, sorted, with blank at index 0.

    With ``strip_diacritics`` tokens are normalized by ``strip_token`` before
    the union, which merges e.g. /n̥/ into /n/ while tone digits survive.
    ``expect_size`` (excluding blank) is checked softly: a mismatch is
    logged, not raised.
    """
    if not lexicon:
        raise ValueError("cannot derive a vocabulary from an empty lexicon")
    tokens = set()
    for entry in lexicon:
        for tok in entry.pron:
            tokens.add(strip_token(tok) if strip_diacritics else tok)
    ordered = (BLANK_TOKEN,) + tuple(sorted(tokens))
    size = len(ordered) - 1
    if expect_size is not None and size != expect_size:
        logger.warning("phoneme vocabulary has %d tokens, expected %d", size, expect_size)
    else:
        logger.info("phoneme vocabulary: %d tokens (excluding blank)", size)
    return PhonemeVocab(tokens=ordered)


def write_lexicon(entries: Sequence[LexiconEntry], path) -> None:
    """Two-column TSV: word TAB space-separated phoneme tokens."""
    lines = [f"{e.word}\t{' '.join(e.pron)}" for e in entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_lexicon(path) -> list[LexiconEntry]:
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise TableError(f"{path}:{lineno}: expected TAB-separated lexicon line")
        word, pron = line.split("\t", 1)
        entries.append(LexiconEntry(word=word.strip(), pron=tuple(pron.split())))
    return entries


def write_vocab(vocab: PhonemeVocab, path) -> None:
    """One token per line, blank first (line number = token id)."""
    Path(path).write_text("\n".join(vocab.tokens) + "\n", encoding="utf-8")


def read_vocab(path) -> PhonemeVocab:
    tokens = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    return PhonemeVocab(tokens=tuple(tokens))
