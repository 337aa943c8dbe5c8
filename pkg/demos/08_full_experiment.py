#!/usr/bin/env python3
"""Run the bundled five-utterance experiment end to end.

Writes the toy corpus, synthetic peaked emissions and config into a temp
directory, then drives split -> lexicon -> LM -> decode -> score and prints
the final report.  With a fixed seed a rerun reproduces every artifact byte
for byte.
"""

import tempfile
from pathlib import Path

from mienasr.experiment import load_config, run_experiment
from mienasr.fixtures import write_toy_experiment

with tempfile.TemporaryDirectory() as tmp:
    cfg_path = write_toy_experiment(tmp, seed=0)
    print(f"fixture written under {tmp}")
    print((Path(tmp) / "corpus.tsv").read_text(), end="")

    cfg = load_config(cfg_path)
    report = run_experiment(cfg)
    print("\nreport:")
    print(report.to_text(), end="")

    run0 = Path(cfg.output_dir) / "run0"
    print("\nrun0 artifacts:", ", ".join(sorted(p.name for p in run0.iterdir())))
    print("\nlexicon.tsv:")
    print((run0 / "lexicon.tsv").read_text(), end="")
