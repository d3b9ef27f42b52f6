"""Direct preference optimization against a frozen reference model.

The loss over a pair batch is mean(-log sigmoid(beta * (d_w - d_l))) where
d = log pi_policy(seq) - log pi_ref(seq), computed as softplus(-beta * delta)
for numerical stability. Sequences carry no prompt: generation is
unconditional from BOS. Gradients flow to the policy only; the reference is
read-only and its per-sequence log-probabilities are memoized, since it
stays fixed for a whole curriculum stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import torch
import torch.nn.functional as F

from .errors import EmptyPairs, InvalidConfig
from .model.adam import OptimizerState, adam_step
from .model.transformer import (
    ModelConfig,
    Parameters,
    batched_sequence_log_probs,
    sequence_log_prob,
)
from .model.vocab import TokenSequence


@dataclass(frozen=True, slots=True)
class PreferencePair:
    winner: TokenSequence
    loser: TokenSequence
    winner_score: float
    loser_score: float

    def __post_init__(self):
        if self.winner_score < self.loser_score:
            raise ValueError(
                f"winner score {self.winner_score} below loser score "
                f"{self.loser_score}"
            )

    @property
    def gap(self) -> float:
        return self.winner_score - self.loser_score


@dataclass(frozen=True, slots=True)
class DpoConfig:
    beta: float = 0.1
    batch_pairs: int = 50
    lr: float = 1e-4

    def __post_init__(self):
        if self.beta <= 0.0:
            raise InvalidConfig(f"beta must be positive, got {self.beta}")
        if self.batch_pairs <= 0:
            raise InvalidConfig(f"batch_pairs must be positive, got {self.batch_pairs}")
        if self.lr <= 0.0:
            raise InvalidConfig(f"lr must be positive, got {self.lr}")


class ReferenceScorer:
    """Memoized sequence log-probabilities under a frozen model."""

    def __init__(self, params: Parameters, config: ModelConfig):
        self._params = params
        self._config = config
        self._cache: Dict[Tuple[int, ...], float] = {}

    def sequence_log_probs(self, seqs: Sequence[TokenSequence]) -> List[float]:
        missing = [s for s in seqs if s.ids not in self._cache]
        if missing:
            with torch.no_grad():
                values = batched_sequence_log_probs(
                    self._params, self._config, missing
                )
            for seq, value in zip(missing, values):
                self._cache[seq.ids] = float(value)
        return [self._cache[s.ids] for s in seqs]


def log_ratio(
    policy: Parameters,
    reference: Parameters,
    config: ModelConfig,
    seq: TokenSequence,
) -> float:
    return sequence_log_prob(policy, config, seq) - sequence_log_prob(
        reference, config, seq
    )


def preference_loss(delta: float, beta: float) -> float:
    """-log sigmoid(beta * delta) for a single ratio difference."""
    return float(F.softplus(torch.tensor(-beta * delta, dtype=torch.float64)))


@dataclass(frozen=True)
class DpoLossResult:
    loss: float
    gradients: Parameters
    mean_margin: float  # mean of beta * delta over the pair batch


def _pair_margins(
    policy: Parameters,
    config: ModelConfig,
    pairs: Sequence[PreferencePair],
    beta: float,
    reference: ReferenceScorer,
) -> torch.Tensor:
    winners = [p.winner for p in pairs]
    losers = [p.loser for p in pairs]
    policy_lp = batched_sequence_log_probs(policy, config, winners + losers)
    ref_lp = torch.tensor(
        reference.sequence_log_probs(winners + losers), dtype=policy_lp.dtype
    )
    delta = policy_lp - ref_lp
    n = len(pairs)
    return beta * (delta[:n] - delta[n:])


def dpo_loss(
    policy: Parameters,
    reference: ReferenceScorer,
    config: ModelConfig,
    pairs: Sequence[PreferencePair],
    beta: float,
) -> float:
    if len(pairs) == 0:
        raise EmptyPairs("no preference pairs to score")
    with torch.no_grad():
        margins = _pair_margins(policy, config, pairs, beta, reference)
        return float(F.softplus(-margins).mean())


def dpo_loss_and_grad(
    policy: Parameters,
    reference: ReferenceScorer,
    config: ModelConfig,
    pairs: Sequence[PreferencePair],
    beta: float,
) -> DpoLossResult:
    if len(pairs) == 0:
        raise EmptyPairs("no preference pairs to score")
    leaves = {name: t.detach().requires_grad_(True) for name, t in policy.items()}
    margins = _pair_margins(leaves, config, pairs, beta, reference)
    loss = F.softplus(-margins).mean()
    loss.backward()
    gradients = {
        name: leaf.grad.detach().clone()
        if leaf.grad is not None
        else torch.zeros_like(leaf)
        for name, leaf in leaves.items()
    }
    return DpoLossResult(
        loss=float(loss.detach()),
        gradients=gradients,
        mean_margin=float(margins.detach().mean()),
    )


def dpo_step(
    policy: Parameters,
    opt: OptimizerState,
    reference: ReferenceScorer,
    config: ModelConfig,
    pairs: Sequence[PreferencePair],
    dpo_config: DpoConfig,
) -> Tuple[Parameters, OptimizerState, DpoLossResult]:
    """One Adam update on the preference loss; returns the pre-update loss."""
    result = dpo_loss_and_grad(policy, reference, config, pairs, dpo_config.beta)
    new_params, new_opt = adam_step(policy, opt, result.gradients)
    return new_params, new_opt, result
