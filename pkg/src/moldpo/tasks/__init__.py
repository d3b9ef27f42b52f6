"""Goal-directed scoring tasks and their JSON config plumbing."""

from .config import (
    build_oracle,
    load_oracle,
    load_pack_task,
    load_task,
    task_pack_names,
)
from .oracles import (
    AGGREGATIONS,
    MPO_SELECTORS,
    MpoTerm,
    Oracle,
    TaskKind,
    TaskSpec,
    isomer_task,
    median_task,
    mpo_task,
    multi_target_task,
    rediscovery_task,
    score_batch,
    similarity_task,
)

__all__ = [
    "AGGREGATIONS",
    "MPO_SELECTORS",
    "MpoTerm",
    "Oracle",
    "TaskKind",
    "TaskSpec",
    "build_oracle",
    "isomer_task",
    "load_oracle",
    "load_pack_task",
    "load_task",
    "median_task",
    "mpo_task",
    "multi_target_task",
    "rediscovery_task",
    "score_batch",
    "similarity_task",
    "task_pack_names",
]
