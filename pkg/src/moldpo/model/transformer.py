"""Decoder-only causal transformer over token ids.

Parameters live in a flat name -> tensor dict so the optimizer, checkpoint
format, and finite-difference tests can treat the model as a list of named
arrays. All math runs in the parameter dtype; float64 parameters give
gradient checks full precision.

Initialization draws weight entries from N(0, 0.02^2) using a numpy
generator seeded from the config, in a fixed name order, so a seed pins
every parameter byte. Layer-norm gains start at 1, all biases at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import EmptyBatch, InvalidConfig, SequenceTooLong
from .vocab import PAD_ID, TokenSequence

Parameters = Dict[str, torch.Tensor]

INIT_STD = 0.02
_LN_EPS = 1e-5


@dataclass(frozen=True, slots=True)
class ModelConfig:
    vocab_size: int
    context_length: int = 128
    layers: int = 4
    heads: int = 4
    embed_dim: int = 128
    seed: int = 0

    def __post_init__(self):
        for name in ("vocab_size", "context_length", "layers", "heads", "embed_dim"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise InvalidConfig(f"{name} must be a positive integer, got {value!r}")
        if self.embed_dim % self.heads != 0:
            raise InvalidConfig(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}"
            )
        if self.vocab_size < 4:
            raise InvalidConfig("vocab_size must cover the specials plus one token")

    def to_dict(self) -> Dict[str, int]:
        return {
            "vocab_size": self.vocab_size,
            "context_length": self.context_length,
            "layers": self.layers,
            "heads": self.heads,
            "embed_dim": self.embed_dim,
            "seed": self.seed,
        }


def parameter_shapes(config: ModelConfig) -> List[Tuple[str, Tuple[int, ...], str]]:
    """Ordered (name, shape, init kind) table; kinds: normal, zeros, ones."""
    d, v, c = config.embed_dim, config.vocab_size, config.context_length
    table: List[Tuple[str, Tuple[int, ...], str]] = [
        ("tok_emb", (v, d), "normal"),
        ("pos_emb", (c, d), "normal"),
    ]
    for i in range(config.layers):
        p = f"l{i}."
        table += [
            (p + "ln1.g", (d,), "ones"),
            (p + "ln1.b", (d,), "zeros"),
            (p + "attn.wq", (d, d), "normal"),
            (p + "attn.bq", (d,), "zeros"),
            (p + "attn.wk", (d, d), "normal"),
            (p + "attn.bk", (d,), "zeros"),
            (p + "attn.wv", (d, d), "normal"),
            (p + "attn.bv", (d,), "zeros"),
            (p + "attn.wo", (d, d), "normal"),
            (p + "attn.bo", (d,), "zeros"),
            (p + "ln2.g", (d,), "ones"),
            (p + "ln2.b", (d,), "zeros"),
            (p + "ff.w1", (d, 4 * d), "normal"),
            (p + "ff.b1", (4 * d,), "zeros"),
            (p + "ff.w2", (4 * d, d), "normal"),
            (p + "ff.b2", (d,), "zeros"),
        ]
    table += [
        ("lnf.g", (d,), "ones"),
        ("lnf.b", (d,), "zeros"),
        ("head.w", (d, v), "normal"),
        ("head.b", (v,), "zeros"),
    ]
    return table


def init_params(config: ModelConfig, dtype: torch.dtype = torch.float32) -> Parameters:
    rng = np.random.default_rng(config.seed)
    params: Parameters = {}
    for name, shape, kind in parameter_shapes(config):
        if kind == "normal":
            array = rng.normal(0.0, INIT_STD, size=shape)
        elif kind == "ones":
            array = np.ones(shape)
        else:
            array = np.zeros(shape)
        params[name] = torch.from_numpy(array).to(dtype)
    return params


def clone_params(params: Parameters) -> Parameters:
    return {name: tensor.detach().clone() for name, tensor in params.items()}


def _causal_mask(t: int, dtype: torch.dtype) -> torch.Tensor:
    mask = torch.full((t, t), float("-inf"), dtype=dtype)
    return torch.triu(mask, diagonal=1)


def forward(params: Parameters, ids: torch.Tensor, config: ModelConfig) -> torch.Tensor:
    """Logits [batch, positions, vocab] for id matrix [batch, positions]."""
    if ids.dim() != 2:
        raise ValueError("ids must be a [batch, positions] matrix")
    b, t = ids.shape
    if t > config.context_length:
        raise SequenceTooLong(
            f"{t} positions exceed context length {config.context_length}"
        )
    heads = config.heads
    head_dim = config.embed_dim // heads
    dtype = params["tok_emb"].dtype

    x = params["tok_emb"][ids] + params["pos_emb"][:t]
    mask = _causal_mask(t, dtype)
    for i in range(config.layers):
        p = f"l{i}."
        h = F.layer_norm(
            x, (config.embed_dim,), params[p + "ln1.g"], params[p + "ln1.b"], _LN_EPS
        )
        q = (h @ params[p + "attn.wq"] + params[p + "attn.bq"]).view(
            b, t, heads, head_dim
        ).transpose(1, 2)
        k = (h @ params[p + "attn.wk"] + params[p + "attn.bk"]).view(
            b, t, heads, head_dim
        ).transpose(1, 2)
        v = (h @ params[p + "attn.wv"] + params[p + "attn.bv"]).view(
            b, t, heads, head_dim
        ).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(head_dim) + mask
        attn = torch.softmax(scores, dim=-1) @ v
        attn = attn.transpose(1, 2).reshape(b, t, config.embed_dim)
        x = x + attn @ params[p + "attn.wo"] + params[p + "attn.bo"]

        h = F.layer_norm(
            x, (config.embed_dim,), params[p + "ln2.g"], params[p + "ln2.b"], _LN_EPS
        )
        h = F.gelu(h @ params[p + "ff.w1"] + params[p + "ff.b1"])
        x = x + h @ params[p + "ff.w2"] + params[p + "ff.b2"]

    x = F.layer_norm(x, (config.embed_dim,), params["lnf.g"], params["lnf.b"], _LN_EPS)
    return x @ params["head.w"] + params["head.b"]


def _check_fits(seq: TokenSequence, config: ModelConfig) -> None:
    if len(seq.ids) > config.context_length:
        raise SequenceTooLong(
            f"sequence of {len(seq.ids)} ids exceeds context "
            f"{config.context_length}"
        )


def log_probs(params: Parameters, config: ModelConfig, seq: TokenSequence) -> List[float]:
    """Per-step conditional log-probabilities; entry i is for ids[i + 1]."""
    _check_fits(seq, config)
    with torch.no_grad():
        ids = torch.tensor([seq.ids[:-1]], dtype=torch.long)
        logits = forward(params, ids, config)
        logp = torch.log_softmax(logits, dim=-1)[0]
        targets = torch.tensor(seq.ids[1:], dtype=torch.long)
        picked = logp[torch.arange(len(targets)), targets]
    return [float(x) for x in picked]


def sequence_log_prob(params: Parameters, config: ModelConfig, seq: TokenSequence) -> float:
    return float(sum(log_probs(params, config, seq)))


def _padded_batch(
    seqs: Sequence[TokenSequence], config: ModelConfig
) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Inputs ids[:-1], targets ids[1:], and a real-position mask."""
    for seq in seqs:
        _check_fits(seq, config)
    width = max(len(s.ids) for s in seqs) - 1
    inputs = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    targets = torch.full((len(seqs), width), PAD_ID, dtype=torch.long)
    for row, seq in enumerate(seqs):
        n = len(seq.ids) - 1
        inputs[row, :n] = torch.tensor(seq.ids[:-1], dtype=torch.long)
        targets[row, :n] = torch.tensor(seq.ids[1:], dtype=torch.long)
    return inputs, targets, targets != PAD_ID


def batched_sequence_log_probs(
    params: Parameters, config: ModelConfig, seqs: Sequence[TokenSequence]
) -> torch.Tensor:
    """Differentiable per-sequence total log-probabilities, shape [batch]."""
    if len(seqs) == 0:
        raise EmptyBatch("no sequences to evaluate")
    inputs, targets, mask = _padded_batch(seqs, config)
    logits = forward(params, inputs, config)
    logp = torch.log_softmax(logits, dim=-1)
    picked = logp.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    return (picked * mask).sum(dim=-1)


def _grad_leaves(params: Parameters) -> Parameters:
    return {name: tensor.detach().requires_grad_(True) for name, tensor in params.items()}


def nll_loss_and_grad(
    params: Parameters, config: ModelConfig, batch: Sequence[TokenSequence]
) -> Tuple[float, Parameters]:
    """Mean-per-token negative log-likelihood and its gradients."""
    if len(batch) == 0:
        raise EmptyBatch("no sequences in training batch")
    leaves = _grad_leaves(params)
    inputs, targets, _ = _padded_batch(batch, config)
    logits = forward(leaves, inputs, config)
    loss = F.cross_entropy(
        logits.reshape(-1, config.vocab_size),
        targets.reshape(-1),
        ignore_index=PAD_ID,
    )
    loss.backward()
    grads = {
        name: leaf.grad.detach().clone()
        if leaf.grad is not None
        else torch.zeros_like(leaf)
        for name, leaf in leaves.items()
    }
    return float(loss.detach()), grads


def nll_loss(
    params: Parameters, config: ModelConfig, batch: Sequence[TokenSequence]
) -> float:
    if len(batch) == 0:
        raise EmptyBatch("no sequences in batch")
    with torch.no_grad():
        inputs, targets, _ = _padded_batch(batch, config)
        logits = forward(params, inputs, config)
        loss = F.cross_entropy(
            logits.reshape(-1, config.vocab_size),
            targets.reshape(-1),
            ignore_index=PAD_ID,
        )
    return float(loss)
