#!/usr/bin/env python3
"""Walk through IMUC syllable parsing.

Iu Mien is written with a Latin syllabic orthography: each syllable is
onset + optional medial vowel + main vowel + optional coda, with a word-final
letter from {h, v, z, x, c} marking tone (no letter = mid-level tone).
"""

from mienasr.orthography import default_inventory, parse_word, report_coverage

inv = default_inventory()
print(f"inventory: {len(inv.initials)} initials, {len(inv.finals)} finals, "
      f"tone letters {'/'.join(inv.tone_letters)}\n")

print("classic spelling examples:")
for word in ["ginghgungv", "baengh", "nqaang", "guinh"]:
    parse = parse_word(word, inv)
    print(f"  {word}")
    for s in parse.syllables:
        print(f"    {s.surface:8s} initial={s.initial or '-':3s} medial={s.medial or '-'} "
              f"main={s.main:3s} final={s.final or '-':3s} tone={s.tone_mark or 'mid'}")

print("\nmulti-letter onsets win over their prefixes: 'nqaang' starts with nq, not n.")
print("tone letters are only stripped when the remainder is still a valid rime:")
parse = parse_word("hoz", inv)
s = parse.syllables[0]
print(f"  hoz -> onset {s.initial}, rime {s.rime}, tone {s.tone_mark}")

print("\ncorpus coverage never drops tokens silently:")
tokens = ["mienh", "waac", "xyzzy", "mbuo", "qqq"]
parses, failures = report_coverage(tokens, inv)
print(f"  parsed: {sorted(parses)}")
for word, err in failures:
    print(f"  failed: {word!r} ({err})")
