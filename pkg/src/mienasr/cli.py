"""Command-line entry point exposing every pipeline stage.

Each subcommand is a thin wrapper over one library call; the ``experiment``
subcommand drives the whole chain from a declarative config file.  Errors
print a stage-attributed diagnostic on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import ctc as ctc_mod
from . import lm as lm_mod
from . import transfer as transfer_mod
from .decoder import DecodeConfig, build_prefix_tree, decode
from .evaluate import error_rate, make_cv_plan, pool
from .experiment import load_config, run_experiment
from .lexicon import (build_lexicon, default_g2p_table, derive_phoneme_vocab,
                      load_g2p_table, read_lexicon, read_vocab, write_lexicon,
                      write_vocab)
from .orthography import default_inventory, load_inventory, parse_word
from .tokenizer import bpe_decode, bpe_encode, bpe_train, load_bpe, save_bpe


def _inventory(args):
    return load_inventory(args.inventory) if args.inventory else default_inventory()


def _g2p_table(args):
    return load_g2p_table(args.g2p_table) if args.g2p_table else default_g2p_table()


def _read_lines(path):
    return [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def _read_texts(path):
    """Sentences from either plain lines or "utt TAB text" files."""
    out = []
    for ln in _read_lines(path):
        out.append(ln.split("\t", 1)[1] if "\t" in ln else ln)
    return out


def _read_tagged(path):
    pairs = {}
    for ln in _read_lines(path):
        if "\t" not in ln:
            raise ValueError(f"{path}: expected 'utt-id TAB tokens' lines")
        utt, text = ln.split("\t", 1)
        pairs[utt.strip()] = text.split()
    return pairs


def cmd_parse(args):
    inv = _inventory(args)
    if not args.words and not args.input:
        raise ValueError("provide words as arguments or a file via --input")
    words = args.words or _read_lines(args.input)
    for w in words:
        parse = parse_word(w.lower(), inv)
        slots = " ".join(
            f"{s.surface}={s.initial or '-'}|{s.medial or '-'}|{s.main}"
            f"|{s.final or '-'}|{s.tone_mark or '-'}"
            for s in parse.syllables
        )
        print(f"{w}\t{slots}")
    return 0


def cmd_lexicon(args):
    inv, table = _inventory(args), _g2p_table(args)
    if args.corpus:
        words = [w for text in _read_texts(args.corpus) for w in text.lower().split()]
    else:
        words = [w.lower() for w in _read_lines(args.words)]
    entries, failures = build_lexicon(words, table, inv)
    write_lexicon(entries, args.output)
    for word, err in failures:
        print(f"unconvertible\t{word}\t{err}", file=sys.stderr)
    print(f"{len(entries)} entries, {len(failures)} failures -> {args.output}")
    return 0 if not failures or args.allow_failures else 1


def cmd_vocab(args):
    entries = read_lexicon(args.lexicon)
    vocab = derive_phoneme_vocab(entries, strip_diacritics=args.strip_diacritics)
    write_vocab(vocab, args.output)
    print(f"{len(vocab) - 1} phoneme tokens (+blank) -> {args.output}")
    return 0


def cmd_bpe_train(args):
    model = bpe_train(_read_texts(args.corpus), args.vocab_size)
    save_bpe(model, args.output)
    print(f"{len(model.vocab)} tokens, {len(model.merges)} merges -> {args.output}")
    return 0


def cmd_bpe_encode(args):
    model = load_bpe(args.model)
    if args.text is None and args.input is None:
        raise ValueError("provide --text or --input")
    lines = [args.text] if args.text else _read_texts(args.input)
    for line in lines:
        print(" ".join(str(i) for i in bpe_encode(line, model)))
    return 0


def cmd_bpe_decode(args):
    model = load_bpe(args.model)
    if args.ids is None and args.input is None:
        raise ValueError("provide --ids or --input")
    lines = [args.ids] if args.ids else _read_lines(args.input)
    for line in lines:
        print(bpe_decode([int(x) for x in line.split()], model))
    return 0


def cmd_lm_train(args):
    model = lm_mod.lm_train(_read_texts(args.corpus), order=args.order,
                            smoothing=args.smoothing)
    lm_mod.arpa_write(model, args.output)
    counts = ", ".join(f"{n}-grams: {len(model.tables[n])}" for n in range(1, model.order + 1))
    print(f"{counts} -> {args.output}")
    return 0


def cmd_lm_ppl(args):
    model = lm_mod.arpa_read(args.model)
    print(f"{lm_mod.perplexity(model, _read_texts(args.text)):.6f}")
    return 0


def cmd_decode(args):
    cfg = DecodeConfig(beam_size=args.beam, lm_weight=args.lm_weight,
                       word_insertion_penalty=args.wip, mode=args.mode)
    lex = bpe = None
    if args.mode == "phoneme":
        if not args.lexicon or not args.vocab:
            raise ValueError("phoneme mode needs --lexicon and --vocab")
        lex = build_prefix_tree(read_lexicon(args.lexicon), read_vocab(args.vocab))
    else:
        if not args.bpe_model:
            raise ValueError("subword mode needs --bpe-model")
        bpe = load_bpe(args.bpe_model)
    ngram = lm_mod.arpa_read(args.lm) if args.lm else None

    out_lines, nbest_lines = [], []
    for utt in _read_lines(args.ids):
        em = ctc_mod.read_emissions(Path(args.emissions) / f"{utt}.em")
        hyps = decode(em, cfg, lex=lex, bpe=bpe, lm=ngram)
        best = hyps[0] if hyps else None
        out_lines.append(f"{utt}\t{' '.join(best.words) if best else ''}")
        for rank, h in enumerate(hyps[:args.nbest_size]):
            nbest_lines.append(
                f"{utt}\t{rank}\t{h.score:.6f}\t{h.score_ac:.6f}"
                f"\t{h.score_lm:.6f}\t{' '.join(h.words)}"
            )
    Path(args.output).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    if args.nbest:
        Path(args.nbest).write_text("\n".join(nbest_lines) + "\n", encoding="utf-8")
    print(f"decoded {len(out_lines)} utterances -> {args.output}")
    return 0


def cmd_transfer_init(args):
    src = transfer_mod.read_matrix(args.src)
    vocab = read_vocab(args.tgt_vocab)
    mat, rep = transfer_mod.transfer_init(src, vocab, seed=args.seed,
                                          scale=args.scale, normalize=args.normalize)
    transfer_mod.write_matrix(mat, args.output)
    print(f"copied {len(rep.copied)}, randomized {len(rep.randomized)}, "
          f"coverage {rep.coverage:.3f} -> {args.output}")
    return 0


def cmd_split(args):
    ids = [ln.split("\t")[0] for ln in _read_lines(args.ids)]
    plan = make_cv_plan(ids, n_folds=args.folds, n_runs=args.runs, seed=args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, fold in enumerate(plan.folds):
        (out / f"fold{k}.txt").write_text("\n".join(fold) + "\n", encoding="utf-8")
    for r in range(args.runs):
        for name, ids_r in (("train", plan.train_ids(r)), ("dev", plan.dev_ids(r)),
                            ("test", plan.test_ids(r))):
            (out / f"run{r}.{name}").write_text("\n".join(ids_r) + "\n", encoding="utf-8")
    print(f"{args.folds} folds, {args.runs} runs -> {out}")
    return 0


def cmd_score(args):
    refs, hyps = _read_tagged(args.ref), _read_tagged(args.hyp)
    missing = sorted(set(refs) - set(hyps))
    if missing:
        raise ValueError(f"hypotheses missing for utterances: {missing[:5]}")
    reports = [error_rate(refs[u], hyps.get(u, [])) for u in sorted(refs)]
    total = pool(reports)
    print(f"{args.metric.upper()}\tS={total.substitutions}\tD={total.deletions}"
          f"\tI={total.insertions}\tN={total.reference_length}\trate={total.rate:.6f}")
    return 0


def cmd_experiment(args):
    report = run_experiment(load_config(args.config))
    sys.stdout.write(report.to_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mienasr", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse", cmd_parse, "syllabify IMUC words")
    sp.add_argument("words", nargs="*", help="words to parse")
    sp.add_argument("--input", help="file with one word per line")
    sp.add_argument("--inventory")

    sp = add("lexicon", cmd_lexicon, "build the pronunciation lexicon")
    sp.add_argument("--corpus", help="utt TAB text file")
    sp.add_argument("--words", help="one word per line")
    sp.add_argument("--g2p-table", dest="g2p_table")
    sp.add_argument("--inventory")
    sp.add_argument("--output", required=True)
    sp.add_argument("--allow-failures", action="store_true")

    sp = add("vocab", cmd_vocab, "derive the phoneme vocabulary")
    sp.add_argument("--lexicon", required=True)
    sp.add_argument("--strip-diacritics", action="store_true")
    sp.add_argument("--output", required=True)

    sp = add("bpe-train", cmd_bpe_train, "train the subword tokenizer")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--vocab-size", type=int, default=500)
    sp.add_argument("--output", required=True)

    sp = add("bpe-encode", cmd_bpe_encode, "encode text to token ids")
    sp.add_argument("--model", required=True)
    sp.add_argument("--text")
    sp.add_argument("--input")

    sp = add("bpe-decode", cmd_bpe_decode, "decode token ids to text")
    sp.add_argument("--model", required=True)
    sp.add_argument("--ids")
    sp.add_argument("--input")

    sp = add("lm-train", cmd_lm_train, "train an ARPA n-gram model")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--smoothing", default="kneser_ney",
                    choices=["kneser_ney", "absolute", "mle"])
    sp.add_argument("--output", required=True)

    sp = add("lm-ppl", cmd_lm_ppl, "perplexity of text under a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--text", required=True)

    sp = add("decode", cmd_decode, "beam-search decode emission files")
    sp.add_argument("--mode", choices=["subword", "phoneme"], required=True)
    sp.add_argument("--emissions", required=True, help="directory of <utt>.em files")
    sp.add_argument("--ids", required=True, help="utterance id list")
    sp.add_argument("--lexicon")
    sp.add_argument("--vocab")
    sp.add_argument("--bpe-model", dest="bpe_model")
    sp.add_argument("--lm")
    sp.add_argument("--beam", type=int, default=32)
    sp.add_argument("--lm-weight", dest="lm_weight", type=float, default=1.0)
    sp.add_argument("--wip", type=float, default=0.0)
    sp.add_argument("--output", required=True)
    sp.add_argument("--nbest")
    sp.add_argument("--nbest-size", dest="nbest_size", type=int, default=10)

    sp = add("transfer-init", cmd_transfer_init, "initialize a target head matrix")
    sp.add_argument("--src", required=True)
    sp.add_argument("--tgt-vocab", dest="tgt_vocab", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scale", type=float, default=None)
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--output", required=True)

    sp = add("split", cmd_split, "write cross-validation fold manifests")
    sp.add_argument("--ids", required=True, help="id list or utt TAB text file")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--runs", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output-dir", dest="output_dir", required=True)

    sp = add("score", cmd_score, "WER/PER against references")
    sp.add_argument("--metric", choices=["wer", "per"], default="wer")
    sp.add_argument("--ref", required=True)
    sp.add_argument("--hyp", required=True)

    sp = add("experiment", cmd_experiment, "run the full pipeline from a config")
    sp.add_argument("--config", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as e:  # uniform stage-attributed diagnostics
        print(f"mienasr: {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
