import itertools
import random

import pytest

from mienasr.orthography import (InventoryError, ParseError, load_inventory,
                                 parse_syllable, parse_word, report_coverage)

# the five decompositions of the published spelling-scheme examples
SPELLING_EXAMPLES = [
    ("gingh", ("g", "", "i", "ng", "h")),
    ("gungv", ("g", "", "u", "ng", "v")),
    ("baengh", ("b", "", "ae", "ng", "h")),
    ("nqaang", ("nq", "", "aa", "ng", "")),
    ("guinh", ("g", "u", "i", "n", "h")),
]


def slots(syl):
    return (syl.initial, syl.medial, syl.main, syl.final, syl.tone_mark)


class TestParseSyllable:
    @pytest.mark.parametrize("surface,expected", SPELLING_EXAMPLES)
    def test_reference_spellings(self, inv, surface, expected):
        assert slots(parse_syllable(surface, inv)) == expected

    def test_no_main_vowel(self, inv):
        with pytest.raises(ParseError):
            parse_syllable("q", inv)

    def test_round_trip(self, inv):
        for surface, _ in SPELLING_EXAMPLES:
            s = parse_syllable(surface, inv)
            assert s.initial + s.medial + s.main + s.final + s.tone_mark == surface

    def test_onsetless_syllable(self, inv):
        s = parse_syllable("aav", inv)
        assert slots(s) == ("", "", "aa", "", "v")

    def test_rejects_uppercase_and_empty(self, inv):
        with pytest.raises(ParseError):
            parse_syllable("Gingh", inv)
        with pytest.raises(ParseError):
            parse_syllable("", inv)

    def test_tone_letter_not_stripped_without_valid_rime(self, inv):
        # "oh" only parses with onset-less rime "o" + tone h; "h" alone cannot
        s = parse_syllable("hoz", inv)
        assert slots(s) == ("h", "", "o", "", "z")


class TestParseWord:
    def test_two_syllable_word(self, inv):
        p = parse_word("ginghgungv", inv)
        assert [s.surface for s in p.syllables] == ["gingh", "gungv"]

    def test_single_syllable(self, inv):
        p = parse_word("baengh", inv)
        assert len(p.syllables) == 1
        assert slots(p.syllables[0]) == ("b", "", "ae", "ng", "h")

    def test_concatenated_known_parse(self, inv):
        p = parse_word("ginghgingh", inv)
        assert [slots(s) for s in p.syllables] == [("g", "", "i", "ng", "h")] * 2

    def test_surface_concatenation_reproduces_word(self, inv):
        for w in ["ginghgungv", "mienh", "hnangv", "nziepc", "guinh"]:
            p = parse_word(w, inv)
            assert "".join(s.surface for s in p.syllables) == w

    def test_failure_position(self, inv):
        with pytest.raises(ParseError) as ei:
            parse_word("ginghqq", inv)
        assert ei.value.position == 5

    def test_determinism(self, inv):
        a = parse_word("ginghgungv", inv)
        b = parse_word("ginghgungv", inv)
        assert a == b

    def test_coverage_report_drops_nothing(self, inv):
        tokens = ["mienh", "zzzz", "dorn", "qqq", "mienh"]
        parses, failures = report_coverage(tokens, inv)
        assert set(parses) | {w for w, _ in failures} == set(tokens)
        assert {w for w, _ in failures} == {"zzzz", "qqq"}


def oracle_syllable(s, inv):
    """Independent preference-order enumeration of one syllable."""
    finals = set(inv.finals)
    candidates = []
    tone_options = []
    if s and s[-1] in inv.tone_letters:
        tone_options.append((s[:-1], s[-1], 0))
    tone_options.append((s, "", 1))
    for body, tone, tone_rank in tone_options:
        for onset in sorted(inv.initials, key=len, reverse=True) + [""]:
            if body.startswith(onset) and body[len(onset):] in finals:
                candidates.append((tone_rank, -len(onset), onset, body[len(onset):], tone))
    if not candidates:
        return None
    _, _, onset, rime, tone = min(candidates)
    return onset, rime, tone


def oracle_word(w, inv):
    """All segmentations, preferred by lexicographically longest syllables."""
    def rec(i):
        if i == len(w):
            return ()
        for j in range(len(w), i, -1):
            if oracle_syllable(w[i:j], inv) is not None:
                rest = rec(j)
                if rest is not None:
                    return (w[i:j],) + rest
        return None
    return rec(0)


class TestOracleEquivalence:
    def check(self, w, inv):
        expected = oracle_word(w, inv)
        if expected is None:
            with pytest.raises(ParseError):
                parse_word(w, inv)
            return
        p = parse_word(w, inv)
        assert tuple(s.surface for s in p.syllables) == expected
        for syl in p.syllables:
            onset, rime, tone = oracle_syllable(syl.surface, inv)
            assert (syl.initial, syl.rime, syl.tone_mark) == (onset, rime, tone)

    def test_exhaustive_short_words(self, tiny_inv):
        alphabet = "abgnq"
        for n in range(1, 6):
            for tup in itertools.product(alphabet, repeat=n):
                self.check("".join(tup), tiny_inv)

    def test_sampled_longer_words(self, tiny_inv):
        rng = random.Random(20240811)
        alphabet = "abgnqhvzxc"
        for _ in range(500):
            n = rng.randint(6, 8)
            self.check("".join(rng.choice(alphabet) for _ in range(n)), tiny_inv)


class TestInventoryLoading:
    def test_default_counts(self, inv):
        assert len(inv.initials) == 30
        assert len(inv.finals) == 128
        assert set(inv.tone_letters) == {"h", "v", "z", "x", "c"}

    def test_duplicate_grapheme_rejected(self, tmp_path):
        f = tmp_path / "inv.txt"
        f.write_text("[initials]\nnq\nnq\n[mains]\na\n[finals]\na\n"
                     "[tones]\nh\nv\nz\nx\nc\n")
        with pytest.raises(InventoryError, match="duplicate"):
            load_inventory(f)

    def test_non_latin_grapheme_rejected(self, tmp_path):
        f = tmp_path / "inv.txt"
        f.write_text("[initials]\nné\n[mains]\na\n[finals]\na\n"
                     "[tones]\nh\nv\nz\nx\nc\n")
        with pytest.raises(InventoryError, match="Latin"):
            load_inventory(f)

    def test_wrong_tone_letters_rejected(self, tmp_path):
        f = tmp_path / "inv.txt"
        f.write_text("[initials]\nb\n[mains]\na\n[finals]\na\n[tones]\nh\nv\n")
        with pytest.raises(InventoryError, match="tone letters"):
            load_inventory(f)

    def test_cardinality_mismatch_warns_not_fails(self, tmp_path, caplog):
        f = tmp_path / "inv.txt"
        f.write_text("[initials] expect 30\nb\n[mains]\na\n[finals]\na\n"
                     "[tones]\nh\nv\nz\nx\nc\n")
        import logging
        with caplog.at_level(logging.WARNING):
            cfg = load_inventory(f)
        assert len(cfg.initials) == 1
        assert any("expected 30" in r.message for r in caplog.records)

    def test_grapheme_outside_section(self, tmp_path):
        f = tmp_path / "inv.txt"
        f.write_text("b\n[initials]\nb\n")
        with pytest.raises(InventoryError, match="outside"):
            load_inventory(f)
