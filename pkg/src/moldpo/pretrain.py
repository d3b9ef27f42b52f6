"""Corpus pretraining: next-token NLL on SMILES with Adam.

Produces the frozen prior used by preference optimization. The run is
deterministic given the config: parameter init, epoch shuffles and the
post-training validity sample all derive from the configured seed. The
report JSON records corpus accounting (parseable lines, sequences skipped
for length) and sampled validity so a pretrain can be judged on its own.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, CorpusTooSmall
from .model import (
    ModelConfig,
    Parameters,
    Vocab,
    adam_step,
    build_vocab,
    init_optimizer,
    init_params,
    nll_loss_and_grad,
    sample,
    save_checkpoint,
)
from .smiles import is_valid, read_corpus

MIN_PARSEABLE_LINES = 1000

_PRETRAIN_KEYS_REQUIRED = {"corpus"}
_PRETRAIN_KEYS_OPTIONAL = {
    "epochs",
    "batch_size",
    "lr",
    "model",
    "seed",
    "sample_n",
    "temperature",
}
_MODEL_KEYS = {"layers", "heads", "embed_dim", "context_length"}


@dataclass(frozen=True, slots=True)
class PretrainConfig:
    corpus: str
    epochs: int = 10
    batch_size: int = 64
    lr: float = 3e-4
    layers: int = 4
    heads: int = 4
    embed_dim: int = 128
    context_length: int = 128
    seed: int = 0
    sample_n: int = 1000
    temperature: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "corpus": self.corpus,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "model": {
                "layers": self.layers,
                "heads": self.heads,
                "embed_dim": self.embed_dim,
                "context_length": self.context_length,
            },
            "seed": self.seed,
            "sample_n": self.sample_n,
            "temperature": self.temperature,
        }


def load_pretrain_config(
    source: Union[str, Path, Mapping[str, Any]],
    overrides: Optional[Mapping[str, Any]] = None,
) -> PretrainConfig:
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"pretrain config not found: {source}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"pretrain config is not valid JSON: {exc}")
    else:
        doc = dict(source)
    if not isinstance(doc, dict):
        raise ConfigError("pretrain config must be a JSON object")
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})

    unknown = set(doc) - _PRETRAIN_KEYS_REQUIRED - _PRETRAIN_KEYS_OPTIONAL
    if unknown:
        raise ConfigError(f"pretrain config: unknown fields {sorted(unknown)}")
    if "corpus" not in doc or not isinstance(doc["corpus"], str):
        raise ConfigError("pretrain config: 'corpus' must be a path string")

    model_doc = doc.get("model", {})
    if not isinstance(model_doc, dict):
        raise ConfigError("pretrain config: 'model' must be an object")
    bad = set(model_doc) - _MODEL_KEYS
    if bad:
        raise ConfigError(f"pretrain config: unknown model fields {sorted(bad)}")

    def _int(container, key, default, minimum):
        value = container.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(
                f"pretrain config: {key!r} must be an integer >= {minimum}"
            )
        return value

    epochs = _int(doc, "epochs", 10, 0)
    batch_size = _int(doc, "batch_size", 64, 1)
    seed = _int(doc, "seed", 0, 0)
    sample_n = _int(doc, "sample_n", 1000, 1)
    layers = _int(model_doc, "layers", 4, 1)
    heads = _int(model_doc, "heads", 4, 1)
    embed_dim = _int(model_doc, "embed_dim", 128, 1)
    context_length = _int(model_doc, "context_length", 128, 4)

    lr = doc.get("lr", 3e-4)
    if isinstance(lr, bool) or not isinstance(lr, (int, float)) or lr <= 0:
        raise ConfigError("pretrain config: 'lr' must be a positive number")
    temperature = doc.get("temperature", 1.0)
    if (
        isinstance(temperature, bool)
        or not isinstance(temperature, (int, float))
        or temperature <= 0
    ):
        raise ConfigError("pretrain config: 'temperature' must be a positive number")

    return PretrainConfig(
        corpus=doc["corpus"],
        epochs=epochs,
        batch_size=batch_size,
        lr=float(lr),
        layers=layers,
        heads=heads,
        embed_dim=embed_dim,
        context_length=context_length,
        seed=seed,
        sample_n=sample_n,
        temperature=float(temperature),
    )


@dataclass(frozen=True, slots=True)
class PretrainReport:
    corpus_lines: int
    parseable_lines: int
    skipped_too_long: int
    trained_sequences: int
    epochs: int
    epoch_losses: Tuple[float, ...]
    sample_n: int
    n_valid: int
    validity: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "corpus_lines": self.corpus_lines,
            "parseable_lines": self.parseable_lines,
            "skipped_too_long": self.skipped_too_long,
            "trained_sequences": self.trained_sequences,
            "epochs": self.epochs,
            "epoch_losses": list(self.epoch_losses),
            "sample_n": self.sample_n,
            "n_valid": self.n_valid,
            "validity": self.validity,
        }


def sampled_validity(
    params: Parameters,
    model_config: ModelConfig,
    vocab: Vocab,
    n: int,
    temperature: float,
    seed: int,
) -> Tuple[int, float]:
    # Stream tag 1: validity sampling (shuffling uses tag 2).
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    seqs = sample(params, model_config, n, temperature=temperature, seed=rng)
    n_valid = sum(1 for seq in seqs if is_valid(vocab.decode(seq)))
    return n_valid, n_valid / n


def pretrain(
    config: PretrainConfig,
    out_dir: Union[str, Path],
    min_parseable: int = MIN_PARSEABLE_LINES,
) -> PretrainReport:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    try:
        lines = read_corpus(config.corpus)
    except FileNotFoundError:
        raise ConfigError(f"corpus not found: {config.corpus}")
    parseable = [line for line in lines if is_valid(line)]
    if len(parseable) < min_parseable:
        raise CorpusTooSmall(
            f"corpus has {len(parseable)} parseable molecules, need {min_parseable}"
        )

    vocab = build_vocab(parseable)
    encoded = [vocab.encode(line) for line in parseable]
    fits = [seq for seq in encoded if len(seq.ids) <= config.context_length]
    skipped = len(encoded) - len(fits)
    if not fits:
        raise CorpusTooSmall("no corpus sequence fits the model context")

    model_config = ModelConfig(
        vocab_size=len(vocab.tokens),
        context_length=config.context_length,
        layers=config.layers,
        heads=config.heads,
        embed_dim=config.embed_dim,
        seed=config.seed,
    )
    params = init_params(model_config)
    opt = init_optimizer(params, lr=config.lr)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 2]))

    epoch_losses: List[float] = []
    n_batches = math.ceil(len(fits) / config.batch_size)
    for _ in range(config.epochs):
        order = shuffle_rng.permutation(len(fits))
        total = 0.0
        for b in range(n_batches):
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            batch = [fits[i] for i in idx]
            loss, grads = nll_loss_and_grad(params, model_config, batch)
            params, opt = adam_step(params, opt, grads)
            total += loss * len(batch)
        epoch_losses.append(total / len(fits))

    save_checkpoint(out / "model.mdpo", params, model_config, vocab)
    n_valid, validity = sampled_validity(
        params,
        model_config,
        vocab,
        config.sample_n,
        config.temperature,
        config.seed,
    )
    report = PretrainReport(
        corpus_lines=len(lines),
        parseable_lines=len(parseable),
        skipped_too_long=skipped,
        trained_sequences=len(fits),
        epochs=config.epochs,
        epoch_losses=tuple(epoch_losses),
        sample_n=config.sample_n,
        n_valid=n_valid,
        validity=validity,
    )
    (out / "pretrain_report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return report
