"""Ancestral sampling from the autoregressive model.

Randomness comes from a numpy generator, not torch, so a seed pins the
sampled batch regardless of torch threading. Rows that have emitted EOS
drop out of the forward pass; rows hitting the length cap are closed with
EOS and flagged as truncated.
"""

from __future__ import annotations

from typing import List, Optional, Union

import numpy as np
import torch

from ..errors import InvalidTemperature, SequenceTooLong
from .transformer import ModelConfig, Parameters, forward
from .vocab import BOS_ID, EOS_ID, PAD_ID, TokenSequence

RngLike = Union[int, np.random.Generator]


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample(
    params: Parameters,
    config: ModelConfig,
    n: int,
    temperature: float = 1.0,
    max_len: Optional[int] = None,
    seed: RngLike = 0,
) -> List[TokenSequence]:
    if temperature <= 0.0:
        raise InvalidTemperature(f"temperature must be positive, got {temperature}")
    cap = config.context_length if max_len is None else max_len
    if cap > config.context_length:
        raise SequenceTooLong(
            f"max_len {cap} exceeds context length {config.context_length}"
        )
    if cap < 2:
        raise SequenceTooLong("max_len must leave room for BOS and EOS")
    if n <= 0:
        return []
    rng = _generator(seed)

    rows: List[List[int]] = [[BOS_ID] for _ in range(n)]
    done: List[bool] = [False] * n
    truncated: List[bool] = [False] * n
    active = list(range(n))

    with torch.no_grad():
        # Sample until length cap - 1, keeping one slot for a forced EOS.
        while active and len(rows[active[0]]) < cap - 1:
            ids = torch.tensor([rows[i] for i in active], dtype=torch.long)
            logits = forward(params, ids, config)[:, -1, :]
            logits[:, PAD_ID] = float("-inf")
            logits[:, BOS_ID] = float("-inf")
            scaled = logits.double().numpy() / temperature
            scaled -= scaled.max(axis=1, keepdims=True)
            probs = np.exp(scaled)
            probs /= probs.sum(axis=1, keepdims=True)
            cdf = np.cumsum(probs, axis=1)
            draws = rng.random(len(active))
            picks = (cdf < draws[:, None]).sum(axis=1)
            picks = np.minimum(picks, config.vocab_size - 1)

            still_active = []
            for row_idx, pick in zip(active, picks):
                token = int(pick)
                rows[row_idx].append(token)
                if token == EOS_ID:
                    done[row_idx] = True
                else:
                    still_active.append(row_idx)
            active = still_active

    out: List[TokenSequence] = []
    for i in range(n):
        ids = rows[i]
        if not done[i]:
            if ids[-1] != EOS_ID:
                ids = ids + [EOS_ID]
            truncated[i] = True
        out.append(TokenSequence(tuple(ids), truncated=truncated[i]))
    return out


def greedy_decode(
    params: Parameters, config: ModelConfig, max_len: Optional[int] = None
) -> TokenSequence:
    """Argmax decoding; the temperature -> 0 limit of sample()."""
    cap = config.context_length if max_len is None else max_len
    ids = [BOS_ID]
    with torch.no_grad():
        while len(ids) < cap - 1:
            logits = forward(params, torch.tensor([ids], dtype=torch.long), config)
            last = logits[0, -1, :].clone()
            last[PAD_ID] = float("-inf")
            last[BOS_ID] = float("-inf")
            token = int(torch.argmax(last))
            ids.append(token)
            if token == EOS_ID:
                return TokenSequence(tuple(ids))
    if ids[-1] != EOS_ID:
        ids.append(EOS_ID)
    return TokenSequence(tuple(ids), truncated=True)
