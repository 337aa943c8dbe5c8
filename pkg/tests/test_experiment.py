import hashlib
from pathlib import Path

import pytest

from mienasr.experiment import (PipelineError, load_config, read_corpus,
                                run_experiment, tune_weights)
from mienasr.fixtures import write_toy_experiment


def tree_digest(root: Path) -> dict[str, str]:
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            out[str(p.relative_to(root))] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    cfg_path = write_toy_experiment(root)
    return root, cfg_path


class TestConfig:
    def test_load(self, toy):
        root, cfg_path = toy
        cfg = load_config(cfg_path)
        assert cfg.mode == "phoneme"
        assert cfg.folds == 5 and cfg.runs == 1
        assert cfg.corpus == root / "corpus.tsv"

    def test_custom_inventory_and_table_paths(self, toy, tmp_path):
        root, cfg_path = toy
        import mienasr.lexicon as lx
        import mienasr.orthography as orth
        from pathlib import Path as P
        inv_copy = tmp_path / "inv.txt"
        tab_copy = tmp_path / "g2p.tsv"
        data = P(orth.__file__).parent / "data"
        inv_copy.write_bytes((data / "iu_mien_inventory.txt").read_bytes())
        tab_copy.write_bytes((data / "iu_mien_g2p.tsv").read_bytes())
        text = cfg_path.read_text() + f"inventory = {inv_copy}\ng2p_table = {tab_copy}\n"
        cfg2 = root / "cfg_custom.ini"  # keep relative corpus paths resolvable
        cfg2.write_text(text)
        cfg = load_config(cfg2)
        assert cfg.inventory == inv_copy
        cfg.output_dir = tmp_path / "out"
        assert run_experiment(cfg).wer_with_lm == 0.0

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[experiment]\ncorpus=x\nemissions_dir=y\noutput_dir=z\nbogus=1\n")
        with pytest.raises(PipelineError, match="unknown key"):
            load_config(p)

    def test_missing_section_rejected(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[other]\n")
        with pytest.raises(PipelineError, match="experiment"):
            load_config(p)

    def test_missing_required_keys_rejected(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[experiment]\ncorpus=x\n")
        with pytest.raises(PipelineError, match="missing required"):
            load_config(p)

    def test_missing_emissions_dir_fails_before_work(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.emissions_dir = tmp_path / "nowhere"
        with pytest.raises(PipelineError, match="config"):
            run_experiment(cfg)
        assert not (tmp_path / "out").exists()

    def test_missing_emission_file_detected(self, toy, tmp_path):
        root, cfg_path = toy
        cfg = load_config(cfg_path)
        broken = tmp_path / "partial"
        broken.mkdir()
        for p in list(Path(cfg.emissions_dir).glob("*.em"))[:-1]:
            (broken / p.name).write_bytes(p.read_bytes())
        cfg.emissions_dir = broken
        with pytest.raises(PipelineError, match="missing emission"):
            run_experiment(cfg)


class TestToyExperiment:
    def test_wer_zero(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.output_dir = tmp_path / "out"
        report = run_experiment(cfg)
        assert report.wer_no_lm == 0.0
        assert report.wer_with_lm == 0.0
        assert report.runs[0].per_with_lm == 0.0

    def test_artifacts_written(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.output_dir = tmp_path / "out"
        run_experiment(cfg)
        run0 = cfg.output_dir / "run0"
        for name in ("manifest.train", "manifest.dev", "manifest.test",
                     "lexicon.tsv", "phonemes.txt", "lm.arpa",
                     "hyp_with_lm.txt", "hyp_without_lm.txt", "scores.txt"):
            assert (run0 / name).exists(), name
        assert (cfg.output_dir / "report.txt").exists()

    def test_rerun_byte_identical(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.output_dir = tmp_path / "out1"
        run_experiment(cfg)
        first = tree_digest(cfg.output_dir)
        cfg.output_dir = tmp_path / "out2"
        run_experiment(cfg)
        assert tree_digest(cfg.output_dir) == first

    def test_workers_do_not_change_results(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.output_dir = tmp_path / "seq"
        run_experiment(cfg)
        seq = tree_digest(cfg.output_dir)
        cfg.workers = 3
        cfg.output_dir = tmp_path / "par"
        run_experiment(cfg)
        assert tree_digest(cfg.output_dir) == seq

    def test_report_layout(self, toy, tmp_path):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        cfg.output_dir = tmp_path / "out"
        report = run_experiment(cfg)
        text = (cfg.output_dir / "report.txt").read_text(encoding="utf-8")
        assert text == report.to_text()
        lines = text.splitlines()
        assert lines[0] == "model\tphoneme-ctc"
        assert lines[1] == "run\tmetric\ttest-wo-lm\ttest-with-lm"
        assert any(ln.startswith("avg\tWER") for ln in lines)


class TestSubwordExperiment:
    def test_wer_zero_and_reproducible(self, tmp_path):
        cfg_path = write_toy_experiment(tmp_path / "toy", mode="subword")
        cfg = load_config(cfg_path)
        assert cfg.mode == "subword"
        cfg.output_dir = tmp_path / "out1"
        report = run_experiment(cfg)
        assert report.wer_no_lm == 0.0 and report.wer_with_lm == 0.0
        assert report.runs[0].per_no_lm is None  # PER is a phoneme-mode metric
        first = tree_digest(cfg.output_dir)
        cfg.output_dir = tmp_path / "out2"
        run_experiment(cfg)
        assert tree_digest(cfg.output_dir) == first
        assert (tmp_path / "out1" / "run0" / "bpe.model").exists()


class TestCorpusReader:
    def test_requires_tabs(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("u1 no tab here\n")
        with pytest.raises(PipelineError, match="TAB"):
            read_corpus(p)

    def test_lowercases(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("u1\tMienh  DORN\n")
        assert read_corpus(p) == [("u1", "mienh dorn")]


class TestTuneWeights:
    def test_grid_search_prefers_lower_wer(self, toy):
        _, cfg_path = toy
        cfg = load_config(cfg_path)
        from mienasr.ctc import read_emissions
        from mienasr.decoder import build_prefix_tree
        from mienasr.lexicon import (build_lexicon, default_g2p_table,
                                     derive_phoneme_vocab)
        from mienasr.lm import lm_train
        from mienasr.orthography import default_inventory
        utts = read_corpus(cfg.corpus)
        inv, table = default_inventory(), default_g2p_table()
        entries, _ = build_lexicon([w for _, t in utts for w in t.split()], table, inv)
        vocab = derive_phoneme_vocab(entries)
        tree = build_prefix_tree(entries, vocab)
        model = lm_train([t for _, t in utts], order=2)
        items = [(read_emissions(Path(cfg.emissions_dir) / f"{u}.em"), t.split())
                 for u, t in utts[:2]]
        lw, wip, wer = tune_weights(cfg, items, tree, None, model,
                                    lm_weights=(0.0, 0.5), penalties=(0.0,))
        assert wer == 0.0
        assert (lw, wip) == (0.0, 0.0)  # ties prefer the smaller grid point
