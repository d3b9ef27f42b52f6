"""Winner and loser selection for preference-pair construction.

Winners come from the shared memory under a score softmax whose temperature
controls greediness; an optional top-k cutoff restricts the support to the
k best entries so that agents with different k values explore differently.
Losers are drawn uniformly from the agent's current sample batch, invalid
samples included. Pairing is positional and silently drops pairs below the
stage score gap or pairs where both sides canonicalize to the same molecule.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from ..dpo import PreferencePair
from ..errors import EmptyBatch, EmptyMemory, InvalidTemperature, LengthMismatch
from .memory import Memory, SampledMolecule, ScoredMolecule


def softmax_weights(scores: Sequence[float], tau: float) -> np.ndarray:
    if tau <= 0:
        raise InvalidTemperature(f"selection temperature must be positive, got {tau}")
    logits = np.asarray(scores, dtype=np.float64) / tau
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def select_winners(
    memory: Memory,
    n: int,
    tau: float,
    rng: np.random.Generator,
    top_k: Optional[int] = None,
) -> List[ScoredMolecule]:
    entries = memory.snapshot()
    if not entries:
        raise EmptyMemory("cannot select winners from an empty memory")
    if top_k is not None:
        if top_k < 1:
            raise ValueError(f"top_k must be at least 1, got {top_k}")
        entries = entries[:top_k]
    weights = softmax_weights([e.score for e in entries], tau)
    draws = rng.choice(len(entries), size=n, replace=True, p=weights)
    return [entries[i] for i in draws]


def select_losers(
    batch: Sequence[SampledMolecule],
    n: int,
    rng: np.random.Generator,
) -> List[SampledMolecule]:
    if not batch:
        raise EmptyBatch("cannot select losers from an empty sample batch")
    draws = rng.integers(0, len(batch), size=n)
    return [batch[i] for i in draws]


def build_pairs(
    winners: Sequence[ScoredMolecule],
    losers: Sequence[SampledMolecule],
    min_gap: float,
) -> List[PreferencePair]:
    if len(winners) != len(losers):
        raise LengthMismatch(
            f"winner and loser lists differ in length: {len(winners)} vs {len(losers)}"
        )
    if min_gap < 0:
        raise ValueError(f"min_gap must be non-negative, got {min_gap}")
    pairs = []
    for winner, loser in zip(winners, losers):
        if winner.tokens is None:
            raise ValueError(f"memory entry {winner.canonical!r} carries no tokens")
        if winner.score - loser.score < min_gap:
            continue
        if loser.canonical is not None and loser.canonical == winner.canonical:
            continue
        pairs.append(
            PreferencePair(
                winner=winner.tokens,
                loser=loser.tokens,
                winner_score=winner.score,
                loser_score=loser.score,
            )
        )
    return pairs


def cold_start_winners(
    batch: Sequence[SampledMolecule],
    n: int,
) -> List[ScoredMolecule]:
    """Best current-batch molecules, cycled to length n; empty if none valid.

    Used on the first steps of a run while the memory has no entries yet.
    """
    valid = [m for m in batch if m.canonical is not None]
    if not valid:
        return []
    valid.sort(key=lambda m: (-m.score, m.canonical))
    out = []
    for i in range(n):
        mol = valid[i % len(valid)]
        out.append(
            ScoredMolecule(
                canonical=mol.canonical,
                tokens=mol.tokens,
                score=mol.score,
                agent_id=-1,
                step=0,
                stage=0,
            )
        )
    return out
