"""Shared scored-molecule memory.

One memory instance is shared by every agent in a run. It deduplicates on
canonical SMILES, holds at most `capacity` entries, and once full only
trades its minimum-score entry for a strictly better newcomer, so the k-th
best score can never regress. All mutation and reading happens under a lock;
snapshots are consistent and sorted best-first.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..model.vocab import TokenSequence

DEFAULT_CAPACITY = 1000


@dataclass(frozen=True, slots=True)
class ScoredMolecule:
    canonical: str
    tokens: Optional[TokenSequence]
    score: float
    agent_id: int
    step: int
    stage: int


@dataclass(frozen=True, slots=True)
class SampledMolecule:
    """One decoded sample from an agent; canonical is None when invalid."""

    text: str
    tokens: TokenSequence
    score: float
    canonical: Optional[str]


@dataclass(frozen=True, slots=True)
class MemoryMetrics:
    top1: float
    top10_mean: float
    top100_mean: float
    count: int


def _sort_key(entry: ScoredMolecule) -> Tuple[float, str]:
    return (-entry.score, entry.canonical)


def top_mean(scores: Sequence[float], k: int) -> float:
    """Mean of the k best scores; mean over all of them when fewer than k."""
    if not scores:
        return 0.0
    ordered = sorted(scores, reverse=True)
    window = ordered[:k]
    return sum(window) / len(window)


class Memory:
    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity}")
        self.capacity = capacity
        self._entries: Dict[str, ScoredMolecule] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def update(self, records: Iterable[ScoredMolecule]) -> None:
        with self._lock:
            for record in records:
                self._insert(record)

    def _insert(self, record: ScoredMolecule) -> None:
        existing = self._entries.get(record.canonical)
        if existing is not None:
            if record.score > existing.score:
                self._entries[record.canonical] = record
            return
        if len(self._entries) < self.capacity:
            self._entries[record.canonical] = record
            return
        worst = min(self._entries.values(), key=lambda e: (e.score, e.canonical))
        if record.score > worst.score:
            del self._entries[worst.canonical]
            self._entries[record.canonical] = record

    def snapshot(self) -> List[ScoredMolecule]:
        with self._lock:
            return sorted(self._entries.values(), key=_sort_key)

    def best(self) -> Optional[ScoredMolecule]:
        with self._lock:
            if not self._entries:
                return None
            return min(self._entries.values(), key=_sort_key)

    def metrics(self) -> MemoryMetrics:
        with self._lock:
            scores = sorted((e.score for e in self._entries.values()), reverse=True)
        if not scores:
            return MemoryMetrics(top1=0.0, top10_mean=0.0, top100_mean=0.0, count=0)
        return MemoryMetrics(
            top1=scores[0],
            top10_mean=top_mean(scores, 10),
            top100_mean=top_mean(scores, 100),
            count=len(scores),
        )

    def top_scores(self, k: int) -> List[float]:
        with self._lock:
            scores = sorted((e.score for e in self._entries.values()), reverse=True)
        return scores[:k]

    def save(self, path: Union[str, Path]) -> None:
        rows = [
            {
                "canonical": e.canonical,
                "ids": list(e.tokens.ids) if e.tokens is not None else None,
                "truncated": e.tokens.truncated if e.tokens is not None else False,
                "score": e.score,
                "agent_id": e.agent_id,
                "step": e.step,
                "stage": e.stage,
            }
            for e in self.snapshot()
        ]
        doc = {"capacity": self.capacity, "entries": rows}
        Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Memory":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        memory = cls(capacity=doc["capacity"])
        records = []
        for row in doc["entries"]:
            tokens = (
                TokenSequence(tuple(row["ids"]), truncated=row["truncated"])
                if row["ids"] is not None
                else None
            )
            records.append(
                ScoredMolecule(
                    canonical=row["canonical"],
                    tokens=tokens,
                    score=row["score"],
                    agent_id=row["agent_id"],
                    step=row["step"],
                    stage=row["stage"],
                )
            )
        memory.update(records)
        return memory


def update_memory(
    memory: Memory,
    batch: Sequence[Tuple[str, float]],
    agent_id: int = 0,
    step: int = 0,
    stage: int = 0,
) -> Memory:
    """Insert (smiles, score) rows, canonicalizing and skipping invalid ones."""
    from ..errors import SmilesError
    from ..smiles import canonical_smiles

    records = []
    for smiles, score in batch:
        try:
            canonical = canonical_smiles(smiles)
        except SmilesError:
            continue
        records.append(
            ScoredMolecule(
                canonical=canonical,
                tokens=None,
                score=score,
                agent_id=agent_id,
                step=step,
                stage=stage,
            )
        )
    memory.update(records)
    return memory
