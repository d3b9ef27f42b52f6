import json

import pytest

from moldpo.datagen import generate_corpus, write_corpus
from moldpo.errors import ConfigError, CorpusTooSmall
from moldpo.model import load_checkpoint
from moldpo.pretrain import PretrainConfig, load_pretrain_config, pretrain

TINY = dict(
    epochs=2,
    batch_size=32,
    lr=1e-3,
    layers=1,
    heads=2,
    embed_dim=16,
    context_length=48,
    seed=0,
    sample_n=50,
)


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "train.smi"
    write_corpus(path, generate_corpus(400, seed=7))
    return path


class TestLoadPretrainConfig:
    def test_defaults(self):
        config = load_pretrain_config({"corpus": "c.smi"})
        assert config.epochs == 10
        assert config.batch_size == 64
        assert config.lr == 3e-4
        assert (config.layers, config.heads, config.embed_dim) == (4, 4, 128)
        assert config.context_length == 128
        assert config.sample_n == 1000
        assert config.temperature == 1.0

    def test_file_source(self, tmp_path):
        path = tmp_path / "pre.json"
        path.write_text(json.dumps({"corpus": "c.smi", "epochs": 3}))
        assert load_pretrain_config(path).epochs == 3

    def test_overrides(self):
        config = load_pretrain_config({"corpus": "c.smi"}, overrides={"seed": 5})
        assert config.seed == 5

    @pytest.mark.parametrize(
        "doc",
        [
            {},
            {"corpus": 3},
            {"corpus": "c.smi", "bogus": 1},
            {"corpus": "c.smi", "epochs": -1},
            {"corpus": "c.smi", "lr": 0},
            {"corpus": "c.smi", "temperature": 0},
            {"corpus": "c.smi", "model": {"layers": 0}},
            {"corpus": "c.smi", "model": {"width": 8}},
            {"corpus": "c.smi", "batch_size": 0},
        ],
    )
    def test_rejections(self, doc):
        with pytest.raises(ConfigError):
            load_pretrain_config(doc)

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_pretrain_config(tmp_path / "nope.json")


class TestPretrain:
    def test_loss_decreases(self, corpus_file, tmp_path):
        config = PretrainConfig(corpus=str(corpus_file), **TINY)
        report = pretrain(config, tmp_path, min_parseable=100)
        assert len(report.epoch_losses) == 2
        assert report.epoch_losses[-1] < report.epoch_losses[0]

    def test_artifacts_written(self, corpus_file, tmp_path):
        config = PretrainConfig(corpus=str(corpus_file), **TINY)
        report = pretrain(config, tmp_path, min_parseable=100)
        bundle = load_checkpoint(tmp_path / "model.mdpo")
        assert bundle.config.layers == 1
        assert bundle.config.embed_dim == 16
        assert bundle.config.vocab_size == len(bundle.vocab.tokens)
        on_disk = json.loads((tmp_path / "pretrain_report.json").read_text())
        assert on_disk == report.to_dict()
        assert set(on_disk) == {
            "corpus_lines",
            "parseable_lines",
            "skipped_too_long",
            "trained_sequences",
            "epochs",
            "epoch_losses",
            "sample_n",
            "n_valid",
            "validity",
        }

    def test_corpus_accounting(self, corpus_file, tmp_path):
        config = PretrainConfig(corpus=str(corpus_file), **TINY)
        report = pretrain(config, tmp_path, min_parseable=100)
        assert report.corpus_lines == 400
        assert report.parseable_lines == 400
        assert report.trained_sequences + report.skipped_too_long == 400
        assert 0.0 <= report.validity <= 1.0
        assert report.n_valid <= report.sample_n

    def test_deterministic_checkpoint(self, corpus_file, tmp_path):
        config = PretrainConfig(corpus=str(corpus_file), **TINY)
        a = tmp_path / "a"
        b = tmp_path / "b"
        report_a = pretrain(config, a, min_parseable=100)
        report_b = pretrain(config, b, min_parseable=100)
        assert (a / "model.mdpo").read_bytes() == (b / "model.mdpo").read_bytes()
        assert report_a == report_b

    def test_seed_changes_checkpoint(self, corpus_file, tmp_path):
        base = dict(TINY)
        a = tmp_path / "a"
        b = tmp_path / "b"
        pretrain(PretrainConfig(corpus=str(corpus_file), **base), a, min_parseable=100)
        base["seed"] = 1
        pretrain(PretrainConfig(corpus=str(corpus_file), **base), b, min_parseable=100)
        assert (a / "model.mdpo").read_bytes() != (b / "model.mdpo").read_bytes()

    def test_zero_epochs_skips_training(self, corpus_file, tmp_path):
        config = PretrainConfig(
            corpus=str(corpus_file), **{**TINY, "epochs": 0}
        )
        report = pretrain(config, tmp_path, min_parseable=100)
        assert report.epochs == 0
        assert report.epoch_losses == ()
        assert (tmp_path / "model.mdpo").exists()

    def test_small_corpus_rejected_at_default_threshold(self, corpus_file, tmp_path):
        config = PretrainConfig(corpus=str(corpus_file), **TINY)
        with pytest.raises(CorpusTooSmall):
            pretrain(config, tmp_path)

    def test_unparseable_lines_do_not_count(self, tmp_path):
        path = tmp_path / "junk.smi"
        lines = generate_corpus(60, seed=1) + ["xx("] * 100
        write_corpus(path, lines)
        config = PretrainConfig(corpus=str(path), **TINY)
        with pytest.raises(CorpusTooSmall):
            pretrain(config, tmp_path / "out", min_parseable=100)

    def test_overlong_sequences_skipped(self, tmp_path):
        path = tmp_path / "long.smi"
        lines = generate_corpus(120, seed=2) + ["C" * 80]
        write_corpus(path, lines)
        config = PretrainConfig(
            corpus=str(path), **{**TINY, "context_length": 48, "epochs": 1}
        )
        report = pretrain(config, tmp_path / "out", min_parseable=100)
        assert report.skipped_too_long == 1
        assert report.trained_sequences == 120

    def test_missing_corpus(self, tmp_path):
        config = PretrainConfig(corpus=str(tmp_path / "nope.smi"), **TINY)
        with pytest.raises(ConfigError):
            pretrain(config, tmp_path)
