"""Multi-agent curriculum stages.

A stage fixes the selection temperature and the minimum winner-loser score
gap for a block of steps. Later stages tighten both, so pairs carry sharper
preferences as the memory improves. Each step runs every agent once:
sample, score, push valid molecules into the shared memory, draw winners
from memory under the agent's own top-k cutoff, draw losers uniformly from
the fresh batch, and take one preference-gradient update. The reference
model is the frozen pretrained prior for the whole run; agent resets
restore the prior weights and zero the optimizer but never touch memory.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..dpo import DpoConfig, ReferenceScorer, dpo_step
from ..errors import ConfigError, SmilesError
from ..model import (
    ModelConfig,
    OptimizerState,
    Parameters,
    Vocab,
    clone_params,
    init_optimizer,
    sample,
)
from ..smiles import canonical_smiles
from ..tasks import Oracle
from .memory import Memory, SampledMolecule, ScoredMolecule
from .selection import build_pairs, cold_start_winners, select_losers, select_winners

# Widening top-k ladder; agent i gets the i-th entry unless overridden.
DEFAULT_TOP_K: Tuple[int, ...] = (1, 5, 10, 25, 50, 100, 250, 500)

RngFactory = Callable[[int, str], np.random.Generator]


@dataclass(frozen=True, slots=True)
class StageConfig:
    n_steps: int
    tau: float
    min_gap: float
    reset_agents: bool = False

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError(f"stage needs at least one step, got {self.n_steps}")
        if self.tau <= 0:
            raise ConfigError(f"stage tau must be positive, got {self.tau}")
        if not 0.0 <= self.min_gap <= 1.0:
            raise ConfigError(f"stage min_gap must be in [0, 1], got {self.min_gap}")


def validate_stage_plan(stages: Sequence[StageConfig]) -> None:
    if not stages:
        raise ConfigError("stage plan is empty")
    for prev, cur in zip(stages, stages[1:]):
        if cur.tau > prev.tau:
            raise ConfigError(
                f"stage tau must not increase: {prev.tau} -> {cur.tau}"
            )
        if cur.min_gap > prev.min_gap:
            raise ConfigError(
                f"stage min_gap must not increase: {prev.min_gap} -> {cur.min_gap}"
            )


def default_stage_plan(total_steps: int = 1000) -> List[StageConfig]:
    """Three stages at 40/30/30 percent of the step budget."""
    if total_steps < 3:
        raise ConfigError(f"default plan needs at least 3 steps, got {total_steps}")
    n1 = round(0.4 * total_steps)
    n2 = round(0.3 * total_steps)
    n3 = total_steps - n1 - n2
    plan = [
        StageConfig(n_steps=n1, tau=0.20, min_gap=0.5, reset_agents=False),
        StageConfig(n_steps=n2, tau=0.10, min_gap=0.2, reset_agents=True),
        StageConfig(n_steps=n3, tau=0.05, min_gap=0.05, reset_agents=True),
    ]
    validate_stage_plan(plan)
    return plan


def default_top_k(num_agents: int) -> List[int]:
    if num_agents > len(DEFAULT_TOP_K):
        raise ConfigError(
            f"no default top_k ladder for {num_agents} agents; pass top_k explicitly"
        )
    return list(DEFAULT_TOP_K[:num_agents])


@dataclass(slots=True)
class AgentState:
    agent_id: int
    top_k: int
    params: Parameters
    opt: OptimizerState


@dataclass(slots=True)
class AgentPool:
    prior: Parameters
    reference: ReferenceScorer
    model_config: ModelConfig
    dpo_config: DpoConfig
    agents: List[AgentState] = field(default_factory=list)


def make_pool(
    prior: Parameters,
    model_config: ModelConfig,
    dpo_config: DpoConfig,
    num_agents: int,
    top_k: Optional[Sequence[int]] = None,
) -> AgentPool:
    if num_agents < 1:
        raise ConfigError(f"need at least one agent, got {num_agents}")
    ks = default_top_k(num_agents) if top_k is None else list(top_k)
    if len(ks) != num_agents:
        raise ConfigError(
            f"top_k list length {len(ks)} does not match num_agents {num_agents}"
        )
    if any(k < 1 for k in ks):
        raise ConfigError(f"top_k values must be at least 1, got {ks}")
    if len(set(ks)) != len(ks):
        raise ConfigError(f"top_k values must be distinct, got {ks}")
    pool = AgentPool(
        prior=prior,
        reference=ReferenceScorer(prior, model_config),
        model_config=model_config,
        dpo_config=dpo_config,
    )
    for agent_id, k in enumerate(ks):
        params = clone_params(prior)
        pool.agents.append(
            AgentState(
                agent_id=agent_id,
                top_k=k,
                params=params,
                opt=init_optimizer(params, lr=dpo_config.lr),
            )
        )
    return pool


def reset_agents(pool: AgentPool) -> None:
    """Restore every agent to the prior weights with a fresh optimizer."""
    for agent in pool.agents:
        agent.params = clone_params(pool.prior)
        agent.opt = init_optimizer(agent.params, lr=pool.dpo_config.lr)


def evaluate_samples(
    oracle: Oracle,
    vocab: Vocab,
    seqs: Sequence,
) -> List[SampledMolecule]:
    out = []
    for seq in seqs:
        text = vocab.decode(seq)
        try:
            canonical = canonical_smiles(text)
        except SmilesError:
            out.append(SampledMolecule(text=text, tokens=seq, score=0.0, canonical=None))
            continue
        out.append(
            SampledMolecule(
                text=text,
                tokens=seq,
                score=oracle.score_text(text),
                canonical=canonical,
            )
        )
    return out


@dataclass(frozen=True, slots=True)
class StepRecord:
    step: int
    stage: int
    agent_id: int
    top1: float
    top10_mean: float
    top100_mean: float
    best_smiles: str
    loss: Optional[float]
    mean_margin: Optional[float]
    n_pairs: int
    min_score_gap: Optional[float]
    mem_size: int
    wallclock_ms: float


def run_stage(
    pool: AgentPool,
    oracle: Oracle,
    vocab: Vocab,
    memory: Memory,
    stage: StageConfig,
    *,
    stage_index: int,
    start_step: int,
    rng_factory: RngFactory,
    sampling_ratio: float = 1.0,
    temperature: float = 1.0,
    max_len: Optional[int] = None,
    on_step: Optional[Callable[[StepRecord], None]] = None,
) -> List[StepRecord]:
    """Run one stage in place, mutating pool agents and the shared memory.

    `rng_factory(agent_id, purpose)` must hand out independent deterministic
    streams per agent for purposes "sample", "winners" and "losers"; the
    runner derives them from the master seed and the stage index so a stage
    replays identically on resume. Steps are numbered from `start_step`.
    """
    if sampling_ratio <= 0:
        raise ConfigError(f"sampling_ratio must be positive, got {sampling_ratio}")
    n_samples = math.ceil(sampling_ratio * pool.dpo_config.batch_pairs)
    streams = {
        agent.agent_id: {
            purpose: rng_factory(agent.agent_id, purpose)
            for purpose in ("sample", "winners", "losers")
        }
        for agent in pool.agents
    }
    records: List[StepRecord] = []
    for local_step in range(stage.n_steps):
        step = start_step + local_step
        for agent in pool.agents:
            t0 = time.perf_counter()
            rng = streams[agent.agent_id]
            seqs = sample(
                agent.params,
                pool.model_config,
                n_samples,
                temperature=temperature,
                max_len=max_len,
                seed=rng["sample"],
            )
            batch = evaluate_samples(oracle, vocab, seqs)
            memory.update(
                ScoredMolecule(
                    canonical=mol.canonical,
                    tokens=mol.tokens,
                    score=mol.score,
                    agent_id=agent.agent_id,
                    step=step,
                    stage=stage_index,
                )
                for mol in batch
                if mol.canonical is not None
            )
            if len(memory) > 0:
                winners = select_winners(
                    memory,
                    pool.dpo_config.batch_pairs,
                    stage.tau,
                    rng["winners"],
                    top_k=agent.top_k,
                )
            else:
                winners = cold_start_winners(batch, pool.dpo_config.batch_pairs)
            if winners:
                losers = select_losers(batch, len(winners), rng["losers"])
                pairs = build_pairs(winners, losers, stage.min_gap)
            else:
                pairs = []
            if pairs:
                agent.params, agent.opt, result = dpo_step(
                    agent.params,
                    agent.opt,
                    pool.reference,
                    pool.model_config,
                    pairs,
                    pool.dpo_config,
                )
                loss: Optional[float] = result.loss
                margin: Optional[float] = result.mean_margin
                min_score_gap: Optional[float] = min(p.gap for p in pairs)
            else:
                loss = margin = min_score_gap = None
            met = memory.metrics()
            best = memory.best()
            record = StepRecord(
                step=step,
                stage=stage_index,
                agent_id=agent.agent_id,
                top1=met.top1,
                top10_mean=met.top10_mean,
                top100_mean=met.top100_mean,
                best_smiles=best.canonical if best is not None else "",
                loss=loss,
                mean_margin=margin,
                n_pairs=len(pairs),
                min_score_gap=min_score_gap,
                mem_size=met.count,
                wallclock_ms=(time.perf_counter() - t0) * 1000.0,
            )
            records.append(record)
            if on_step is not None:
                on_step(record)
    return records
