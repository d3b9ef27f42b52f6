from .memory import (
    DEFAULT_CAPACITY,
    Memory,
    MemoryMetrics,
    SampledMolecule,
    ScoredMolecule,
    top_mean,
    update_memory,
)
from .runner import (
    RunConfig,
    RunManifest,
    load_manifest,
    load_run_config,
    make_rng_factory,
    resolve_oracle,
    run_optimization,
)
from .selection import (
    build_pairs,
    cold_start_winners,
    select_losers,
    select_winners,
    softmax_weights,
)
from .stages import (
    DEFAULT_TOP_K,
    AgentPool,
    AgentState,
    StageConfig,
    StepRecord,
    default_stage_plan,
    default_top_k,
    evaluate_samples,
    make_pool,
    reset_agents,
    run_stage,
    validate_stage_plan,
)

__all__ = [
    "DEFAULT_CAPACITY",
    "DEFAULT_TOP_K",
    "AgentPool",
    "AgentState",
    "Memory",
    "MemoryMetrics",
    "RunConfig",
    "RunManifest",
    "SampledMolecule",
    "ScoredMolecule",
    "StageConfig",
    "StepRecord",
    "build_pairs",
    "cold_start_winners",
    "default_stage_plan",
    "default_top_k",
    "evaluate_samples",
    "load_manifest",
    "load_run_config",
    "make_pool",
    "make_rng_factory",
    "reset_agents",
    "resolve_oracle",
    "run_optimization",
    "run_stage",
    "select_losers",
    "select_winners",
    "softmax_weights",
    "top_mean",
    "update_memory",
    "validate_stage_plan",
]
