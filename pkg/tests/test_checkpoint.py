import struct

import pytest
import torch

from moldpo.errors import (
    CheckpointMismatch,
    ChecksumMismatch,
    FormatVersionMismatch,
)
from moldpo.model import (
    ModelConfig,
    build_vocab,
    init_optimizer,
    init_params,
    load_checkpoint,
    save_checkpoint,
)

VOCAB = build_vocab(["CCO", "c1ccccc1"])
CONFIG = ModelConfig(
    vocab_size=len(VOCAB), context_length=16, layers=1, heads=2, embed_dim=8, seed=2
)


@pytest.fixture
def saved(tmp_path):
    params = init_params(CONFIG)
    opt = init_optimizer(params, lr=3e-4)
    opt.m["tok_emb"].add_(0.25)
    path = tmp_path / "model.mdpo"
    save_checkpoint(path, params, CONFIG, VOCAB, opt)
    return path, params, opt


def test_round_trip_tensors(saved):
    path, params, _ = saved
    bundle = load_checkpoint(path)
    assert set(bundle.params) == set(params)
    for name in params:
        assert torch.equal(bundle.params[name], params[name]), name


def test_round_trip_config_and_vocab(saved):
    path, _, _ = saved
    bundle = load_checkpoint(path)
    assert bundle.config == CONFIG
    assert bundle.vocab.tokens == VOCAB.tokens


def test_round_trip_optimizer(saved):
    path, params, opt = saved
    bundle = load_checkpoint(path)
    assert bundle.optimizer.step == opt.step
    assert bundle.optimizer.lr == opt.lr
    assert bundle.optimizer.beta1 == opt.beta1
    assert bundle.optimizer.eps == opt.eps
    assert set(bundle.optimizer.m) == set(params)
    assert torch.equal(bundle.optimizer.m["tok_emb"], opt.m["tok_emb"])


def test_save_load_save_byte_identical(saved, tmp_path):
    path, _, _ = saved
    bundle = load_checkpoint(path)
    second = tmp_path / "again.mdpo"
    save_checkpoint(second, bundle.params, bundle.config, bundle.vocab, bundle.optimizer)
    assert path.read_bytes() == second.read_bytes()


def test_optimizer_optional(tmp_path):
    params = init_params(CONFIG)
    path = tmp_path / "bare.mdpo"
    save_checkpoint(path, params, CONFIG, VOCAB)
    bundle = load_checkpoint(path)
    assert bundle.optimizer is None
    assert set(bundle.params) == set(params)


def test_corrupted_payload_detected(saved):
    path, _, _ = saved
    blob = bytearray(path.read_bytes())
    blob[-40] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(ChecksumMismatch):
        load_checkpoint(path)


def test_truncated_file_detected(saved):
    path, _, _ = saved
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises((ChecksumMismatch, FormatVersionMismatch)):
        load_checkpoint(path)


def test_wrong_magic_rejected(saved):
    path, _, _ = saved
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(FormatVersionMismatch):
        load_checkpoint(path)


def test_future_version_rejected(saved):
    path, _, _ = saved
    blob = bytearray(path.read_bytes())
    blob[4:6] = struct.pack("<H", 99)
    path.write_bytes(bytes(blob))
    with pytest.raises(FormatVersionMismatch):
        load_checkpoint(path)


def test_vocab_mismatch_rejected(saved):
    path, _, _ = saved
    other = build_vocab(["CCN", "CCO", "FC(F)F"])
    with pytest.raises(FormatVersionMismatch):
        load_checkpoint(path, expect_vocab=other)
    with pytest.raises(CheckpointMismatch):
        load_checkpoint(path, expect_vocab=other)


def test_float64_params_stored_as_float32(tmp_path):
    params = init_params(CONFIG, dtype=torch.float64)
    path = tmp_path / "f64.mdpo"
    save_checkpoint(path, params, CONFIG, VOCAB)
    bundle = load_checkpoint(path)
    assert bundle.params["tok_emb"].dtype == torch.float32
    assert torch.allclose(
        bundle.params["tok_emb"].double(), params["tok_emb"], atol=1e-7
    )
