"""End-to-end optimization runs: config loading, seeding, artifacts, resume.

A run config is a strict JSON document naming the task, the pretrained
checkpoint and the schedule. Everything the run produces lands in one
output directory: per-agent metrics CSV, a JSONL step log, a per-step score
band CSV, the final memory dump, a top-k list, per-stage snapshots and a
manifest that ties them together with a content hash of the resolved
config. Random streams are derived per (seed, stage, agent, purpose), so an
interrupted run resumed from the last stage snapshot replays the remaining
stages byte-for-byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from ..dpo import DpoConfig
from ..errors import ConfigError
from ..model import Vocab, load_checkpoint, save_checkpoint
from ..tasks import Oracle, load_oracle, load_pack_task, task_pack_names
from .memory import DEFAULT_CAPACITY, Memory
from .stages import (
    StageConfig,
    StepRecord,
    default_stage_plan,
    make_pool,
    reset_agents,
    run_stage,
    validate_stage_plan,
)

METRICS_HEADER = ["step", "stage", "agent_id", "top1", "top10_mean", "top100_mean", "best_smiles"]
BANDS_HEADER = ["step", "top10_mean", "p10", "p50", "p90", "mem_size"]
MEMORY_HEADER = ["canonical", "score", "agent", "step"]
TOPK_HEADER = ["rank", "canonical", "score"]

_PURPOSE_CODES = {"sample": 0, "winners": 1, "losers": 2}

_RUN_KEYS_REQUIRED = {"task", "checkpoint"}
_RUN_KEYS_OPTIONAL = {
    "dpo",
    "stages",
    "num_agents",
    "top_k",
    "sampling_ratio",
    "temperature",
    "max_sample_len",
    "memory_capacity",
    "seed",
}
_DPO_KEYS = {"beta", "batch_pairs", "lr"}
_STAGE_KEYS_REQUIRED = {"n_steps", "tau", "min_gap"}
_STAGE_KEYS_OPTIONAL = {"reset_agents"}


def _fnum(x: float) -> str:
    return format(float(x), ".10g")


def _require(doc: Mapping[str, Any], key: str, types, context: str):
    if key not in doc:
        raise ConfigError(f"{context}: missing required field {key!r}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(f"{context}: field {key!r} has wrong type {type(value).__name__}")
    return value


@dataclass(frozen=True, slots=True)
class RunConfig:
    task: str
    checkpoint: str
    dpo: DpoConfig
    stages: Tuple[StageConfig, ...]
    num_agents: int
    top_k: Optional[Tuple[int, ...]]
    sampling_ratio: float
    temperature: float
    max_sample_len: Optional[int]
    memory_capacity: int
    seed: int

    @property
    def total_steps(self) -> int:
        return sum(s.n_steps for s in self.stages)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task": self.task,
            "checkpoint": self.checkpoint,
            "dpo": {
                "beta": self.dpo.beta,
                "batch_pairs": self.dpo.batch_pairs,
                "lr": self.dpo.lr,
            },
            "stages": [
                {
                    "n_steps": s.n_steps,
                    "tau": s.tau,
                    "min_gap": s.min_gap,
                    "reset_agents": s.reset_agents,
                }
                for s in self.stages
            ],
            "num_agents": self.num_agents,
            "top_k": list(self.top_k) if self.top_k is not None else None,
            "sampling_ratio": self.sampling_ratio,
            "temperature": self.temperature,
            "max_sample_len": self.max_sample_len,
            "memory_capacity": self.memory_capacity,
            "seed": self.seed,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def load_run_config(
    source: Union[str, Path, Mapping[str, Any]],
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    if isinstance(source, (str, Path)):
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"run config not found: {source}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"run config is not valid JSON: {exc}")
    else:
        doc = dict(source)
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object")
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})

    unknown = set(doc) - _RUN_KEYS_REQUIRED - _RUN_KEYS_OPTIONAL
    if unknown:
        raise ConfigError(f"run config: unknown fields {sorted(unknown)}")

    task = _require(doc, "task", str, "run config")
    checkpoint = _require(doc, "checkpoint", str, "run config")

    dpo_doc = doc.get("dpo", {})
    if not isinstance(dpo_doc, dict):
        raise ConfigError("run config: 'dpo' must be an object")
    bad = set(dpo_doc) - _DPO_KEYS
    if bad:
        raise ConfigError(f"run config: unknown dpo fields {sorted(bad)}")
    defaults = DpoConfig()
    for key in _DPO_KEYS & set(dpo_doc):
        _require(dpo_doc, key, (int, float), "dpo config")
    dpo = DpoConfig(
        beta=float(dpo_doc.get("beta", defaults.beta)),
        batch_pairs=int(dpo_doc.get("batch_pairs", defaults.batch_pairs)),
        lr=float(dpo_doc.get("lr", defaults.lr)),
    )

    if "stages" in doc:
        stage_docs = doc["stages"]
        if not isinstance(stage_docs, list) or not stage_docs:
            raise ConfigError("run config: 'stages' must be a non-empty list")
        stages = []
        for i, sdoc in enumerate(stage_docs):
            if not isinstance(sdoc, dict):
                raise ConfigError(f"stage {i}: must be an object")
            bad = set(sdoc) - _STAGE_KEYS_REQUIRED - _STAGE_KEYS_OPTIONAL
            if bad:
                raise ConfigError(f"stage {i}: unknown fields {sorted(bad)}")
            n_steps = _require(sdoc, "n_steps", int, f"stage {i}")
            tau = _require(sdoc, "tau", (int, float), f"stage {i}")
            min_gap = _require(sdoc, "min_gap", (int, float), f"stage {i}")
            reset = sdoc.get("reset_agents", False)
            if not isinstance(reset, bool):
                raise ConfigError(f"stage {i}: 'reset_agents' must be a boolean")
            stages.append(
                StageConfig(
                    n_steps=n_steps,
                    tau=float(tau),
                    min_gap=float(min_gap),
                    reset_agents=reset,
                )
            )
        validate_stage_plan(stages)
    else:
        stages = default_stage_plan()

    num_agents = doc.get("num_agents", 4)
    if isinstance(num_agents, bool) or not isinstance(num_agents, int) or num_agents < 1:
        raise ConfigError("run config: 'num_agents' must be a positive integer")

    top_k = doc.get("top_k")
    if top_k is not None:
        if not isinstance(top_k, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) for k in top_k
        ):
            raise ConfigError("run config: 'top_k' must be a list of integers")
        top_k = tuple(top_k)

    sampling_ratio = doc.get("sampling_ratio", 1.0)
    if isinstance(sampling_ratio, bool) or not isinstance(sampling_ratio, (int, float)):
        raise ConfigError("run config: 'sampling_ratio' must be a number")
    if sampling_ratio <= 0:
        raise ConfigError(f"run config: 'sampling_ratio' must be positive, got {sampling_ratio}")

    temperature = doc.get("temperature", 1.0)
    if isinstance(temperature, bool) or not isinstance(temperature, (int, float)):
        raise ConfigError("run config: 'temperature' must be a number")
    if temperature <= 0:
        raise ConfigError(f"run config: 'temperature' must be positive, got {temperature}")

    max_sample_len = doc.get("max_sample_len")
    if max_sample_len is not None:
        if isinstance(max_sample_len, bool) or not isinstance(max_sample_len, int):
            raise ConfigError("run config: 'max_sample_len' must be an integer")
        if max_sample_len < 2:
            raise ConfigError("run config: 'max_sample_len' must be at least 2")

    memory_capacity = doc.get("memory_capacity", DEFAULT_CAPACITY)
    if (
        isinstance(memory_capacity, bool)
        or not isinstance(memory_capacity, int)
        or memory_capacity < 1
    ):
        raise ConfigError("run config: 'memory_capacity' must be a positive integer")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("run config: 'seed' must be a non-negative integer")

    return RunConfig(
        task=task,
        checkpoint=checkpoint,
        dpo=dpo,
        stages=tuple(stages),
        num_agents=num_agents,
        top_k=top_k,
        sampling_ratio=float(sampling_ratio),
        temperature=float(temperature),
        max_sample_len=max_sample_len,
        memory_capacity=memory_capacity,
        seed=seed,
    )


def resolve_oracle(name_or_path: str) -> Oracle:
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        return load_oracle(path)
    if name_or_path in task_pack_names():
        return load_pack_task(name_or_path)
    raise ConfigError(
        f"task {name_or_path!r} is neither a config file nor a shipped task name"
    )


def make_rng_factory(seed: int, stage_index: int):
    def factory(agent_id: int, purpose: str) -> np.random.Generator:
        entropy = [seed, stage_index, agent_id, _PURPOSE_CODES[purpose]]
        return np.random.default_rng(np.random.SeedSequence(entropy))

    return factory


@dataclass(frozen=True, slots=True)
class RunManifest:
    run_id: str
    created: str
    config: Dict[str, Any]
    config_sha256: str
    paths: Dict[str, str]
    total_steps: int
    stages_completed: int
    completed: bool
    wallclock_s: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "created": self.created,
            "config": self.config,
            "config_sha256": self.config_sha256,
            "paths": self.paths,
            "total_steps": self.total_steps,
            "stages_completed": self.stages_completed,
            "completed": self.completed,
            "wallclock_s": self.wallclock_s,
        }


def load_manifest(path: Union[str, Path]) -> RunManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest is not valid JSON: {exc}")
    try:
        return RunManifest(
            run_id=doc["run_id"],
            created=doc["created"],
            config=doc["config"],
            config_sha256=doc["config_sha256"],
            paths=doc["paths"],
            total_steps=doc["total_steps"],
            stages_completed=doc["stages_completed"],
            completed=doc["completed"],
            wallclock_s=doc["wallclock_s"],
        )
    except KeyError as exc:
        raise ConfigError(f"manifest is missing field {exc}")


class _RunLogs:
    """Append-only writers for the three per-step artifact files."""

    def __init__(self, out_dir: Path, fresh: bool, keep_through_step: int = 0):
        self.metrics_path = out_dir / "metrics.csv"
        self.logs_path = out_dir / "logs.jsonl"
        self.bands_path = out_dir / "bands.csv"
        if fresh:
            self._write_headers()
        else:
            self._truncate(keep_through_step)

    def _write_headers(self) -> None:
        with self.metrics_path.open("w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(METRICS_HEADER)
        self.logs_path.write_text("", encoding="utf-8")
        with self.bands_path.open("w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(BANDS_HEADER)

    def _truncate(self, keep_through_step: int) -> None:
        # Drop rows from a stage that was interrupted mid-flight; the stage
        # replays deterministically from its snapshot.
        for path, has_header in ((self.metrics_path, True), (self.bands_path, True)):
            if not path.exists():
                raise ConfigError(f"cannot resume: {path} is missing")
            lines = path.read_text(encoding="utf-8").splitlines()
            kept = [lines[0]] if has_header else []
            for line in lines[1:]:
                step = int(line.split(",", 1)[0])
                if step <= keep_through_step:
                    kept.append(line)
            path.write_text("\n".join(kept) + "\n", encoding="utf-8")
        if not self.logs_path.exists():
            raise ConfigError(f"cannot resume: {self.logs_path} is missing")
        kept = [
            line
            for line in self.logs_path.read_text(encoding="utf-8").splitlines()
            if line and json.loads(line)["step"] <= keep_through_step
        ]
        self.logs_path.write_text(
            "".join(line + "\n" for line in kept), encoding="utf-8"
        )

    def write_metrics_row(self, rec: StepRecord) -> None:
        with self.metrics_path.open("a", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(
                [
                    rec.step,
                    rec.stage,
                    rec.agent_id,
                    _fnum(rec.top1),
                    _fnum(rec.top10_mean),
                    _fnum(rec.top100_mean),
                    rec.best_smiles,
                ]
            )

    def write_log_row(self, rec: StepRecord) -> None:
        row = {
            "step": rec.step,
            "stage": rec.stage,
            "agent_id": rec.agent_id,
            "loss": rec.loss,
            "mean_margin": rec.mean_margin,
            "n_pairs": rec.n_pairs,
            "min_score_gap": rec.min_score_gap,
            "mem_size": rec.mem_size,
            "wallclock_ms": rec.wallclock_ms,
        }
        with self.logs_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    def write_bands_row(self, step: int, memory: Memory) -> None:
        met = memory.metrics()
        scores = memory.top_scores(100)
        if scores:
            p10, p50, p90 = np.percentile(np.asarray(scores), [10, 50, 90])
        else:
            p10 = p50 = p90 = 0.0
        with self.bands_path.open("a", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(
                [
                    step,
                    _fnum(met.top10_mean),
                    _fnum(p10),
                    _fnum(p50),
                    _fnum(p90),
                    met.count,
                ]
            )


def _write_final_tables(out_dir: Path, memory: Memory) -> None:
    with (out_dir / "memory_final.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MEMORY_HEADER)
        for entry in memory.snapshot():
            writer.writerow(
                [entry.canonical, _fnum(entry.score), entry.agent_id, entry.step]
            )
    with (out_dir / "topk.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TOPK_HEADER)
        for rank, entry in enumerate(memory.snapshot()[:100], start=1):
            writer.writerow([rank, entry.canonical, _fnum(entry.score)])


def _snapshot_dir(out_dir: Path, stage_index: int) -> Path:
    return out_dir / "snapshots" / f"stage_{stage_index:03d}"


def _save_stage_snapshot(
    out_dir: Path,
    stage_index: int,
    pool,
    memory: Memory,
    vocab: Vocab,
    completed_steps: int,
) -> None:
    snap = _snapshot_dir(out_dir, stage_index)
    snap.mkdir(parents=True, exist_ok=True)
    for agent in pool.agents:
        save_checkpoint(
            snap / f"agent_{agent.agent_id}.mdpo",
            agent.params,
            pool.model_config,
            vocab,
            optimizer=agent.opt,
        )
    memory.save(snap / "memory.json")
    state = {"stage_index": stage_index, "completed_steps": completed_steps}
    (snap / "state.json").write_text(
        json.dumps(state, sort_keys=True), encoding="utf-8"
    )


def _load_stage_snapshot(
    out_dir: Path, stage_index: int, pool, vocab: Vocab
) -> Tuple[Memory, int]:
    snap = _snapshot_dir(out_dir, stage_index)
    for agent in pool.agents:
        bundle = load_checkpoint(snap / f"agent_{agent.agent_id}.mdpo", expect_vocab=vocab)
        agent.params = bundle.params
        if bundle.optimizer is None:
            raise ConfigError(f"snapshot for agent {agent.agent_id} lacks optimizer state")
        agent.opt = bundle.optimizer
    memory = Memory.load(snap / "memory.json")
    state = json.loads((snap / "state.json").read_text(encoding="utf-8"))
    return memory, state["completed_steps"]


def _last_complete_stage(out_dir: Path, n_stages: int) -> int:
    """Index of the last stage with a full snapshot, or -1."""
    last = -1
    for i in range(n_stages):
        state_path = _snapshot_dir(out_dir, i) / "state.json"
        if state_path.exists():
            last = i
        else:
            break
    return last


def run_optimization(
    config: RunConfig,
    out_dir: Union[str, Path],
    resume: bool = False,
) -> RunManifest:
    t_start = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    oracle = resolve_oracle(config.task)
    try:
        bundle = load_checkpoint(config.checkpoint)
    except FileNotFoundError:
        raise ConfigError(f"checkpoint not found: {config.checkpoint}")
    vocab = bundle.vocab
    model_config = bundle.config

    max_len = config.max_sample_len
    if max_len is not None and max_len > model_config.context_length:
        raise ConfigError(
            f"max_sample_len {max_len} exceeds model context {model_config.context_length}"
        )

    pool = make_pool(
        bundle.params,
        model_config,
        config.dpo,
        config.num_agents,
        top_k=list(config.top_k) if config.top_k is not None else None,
    )

    config_json = config.canonical_json()
    (out / "run_config.json").write_text(config_json, encoding="utf-8")

    start_stage = 0
    memory = Memory(capacity=config.memory_capacity)
    completed_steps = 0
    if resume:
        last = _last_complete_stage(out, len(config.stages))
        if last >= 0:
            memory, completed_steps = _load_stage_snapshot(out, last, pool, vocab)
            if memory.capacity != config.memory_capacity:
                raise ConfigError(
                    "cannot resume: snapshot memory capacity differs from config"
                )
            start_stage = last + 1
        logs = _RunLogs(out, fresh=last < 0, keep_through_step=completed_steps)
    else:
        logs = _RunLogs(out, fresh=True)

    paths = {
        "config_snapshot": "run_config.json",
        "metrics": "metrics.csv",
        "logs": "logs.jsonl",
        "bands": "bands.csv",
        "memory": "memory_final.csv",
        "topk": "topk.csv",
        "snapshots": "snapshots",
        "checkpoint": config.checkpoint,
    }

    def write_manifest(stages_done: int, completed: bool) -> RunManifest:
        manifest = RunManifest(
            run_id=config.sha256()[:12],
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            config=config.to_dict(),
            config_sha256=config.sha256(),
            paths=paths,
            total_steps=config.total_steps,
            stages_completed=stages_done,
            completed=completed,
            wallclock_s=round(time.perf_counter() - t_start, 3),
        )
        (out / "manifest.json").write_text(
            json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        return manifest

    last_agent_id = pool.agents[-1].agent_id

    def on_step(rec: StepRecord) -> None:
        logs.write_metrics_row(rec)
        logs.write_log_row(rec)
        if rec.agent_id == last_agent_id:
            logs.write_bands_row(rec.step, memory)

    manifest = write_manifest(start_stage, completed=start_stage == len(config.stages))
    for stage_index in range(start_stage, len(config.stages)):
        stage = config.stages[stage_index]
        if stage.reset_agents:
            reset_agents(pool)
        run_stage(
            pool,
            oracle,
            vocab,
            memory,
            stage,
            stage_index=stage_index,
            start_step=completed_steps + 1,
            rng_factory=make_rng_factory(config.seed, stage_index),
            sampling_ratio=config.sampling_ratio,
            temperature=config.temperature,
            max_len=max_len,
            on_step=on_step,
        )
        completed_steps += stage.n_steps
        _save_stage_snapshot(out, stage_index, pool, memory, vocab, completed_steps)
        manifest = write_manifest(stage_index + 1, completed=stage_index + 1 == len(config.stages))

    _write_final_tables(out, memory)
    manifest = write_manifest(len(config.stages), completed=True)
    return manifest
