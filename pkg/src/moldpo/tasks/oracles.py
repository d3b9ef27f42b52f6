"""Scoring oracles for goal-directed molecule generation.

Every oracle maps a molecular graph to a score in [0, 1], is deterministic,
and is immutable after construction. Invalid SMILES text scores exactly 0.0
so that broken generations stay in the training signal instead of being
silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from ..descriptors.fingerprints import circular_fingerprint, tanimoto
from ..descriptors.modifiers import gaussian_modifier, geometric_mean
from ..descriptors.properties import PropertyVector, properties
from ..errors import (
    EmptyTerms,
    InvalidTarget,
    SmilesError,
    TooFewOracles,
    UnknownSelector,
)
from ..smiles import MolGraph, parse
from ..smiles.formula import formula, parse_formula


class TaskKind(str, Enum):
    REDISCOVERY = "rediscovery"
    SIMILARITY = "similarity"
    ISOMER = "isomer"
    MEDIAN = "median"
    MPO = "mpo"
    MULTI_TARGET = "multi_target"


@dataclass(frozen=True, slots=True)
class TaskSpec:
    name: str
    kind: TaskKind
    parameters: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Oracle:
    """A total, deterministic scoring function over molecular graphs."""

    spec: TaskSpec
    _score: Callable[[MolGraph], float]

    @property
    def name(self) -> str:
        return self.spec.name

    def score_graph(self, graph: MolGraph) -> float:
        return self._score(graph)

    def score_text(self, smiles: str) -> float:
        try:
            graph = parse(smiles)
        except SmilesError:
            return 0.0
        return self._score(graph)

    def score_batch(self, batch: Sequence[str]) -> List[float]:
        return [self.score_text(s) for s in batch]


def score_batch(oracle: Oracle, batch: Sequence[str]) -> List[float]:
    return oracle.score_batch(batch)


def _parse_target(target: str) -> MolGraph:
    try:
        return parse(target)
    except SmilesError as exc:
        raise InvalidTarget(f"target does not parse: {target!r} ({exc})") from exc


def rediscovery_task(target: str, name: str = "rediscovery") -> Oracle:
    target_fp = circular_fingerprint(_parse_target(target))

    def score(graph: MolGraph) -> float:
        return tanimoto(circular_fingerprint(graph), target_fp)

    spec = TaskSpec(name, TaskKind.REDISCOVERY, {"target": target})
    return Oracle(spec, score)


def similarity_task(
    target: str,
    modifier: Optional[Callable[[float], float]] = None,
    name: str = "similarity",
) -> Oracle:
    target_fp = circular_fingerprint(_parse_target(target))
    shape = modifier if modifier is not None else lambda x: x

    def score(graph: MolGraph) -> float:
        return shape(tanimoto(circular_fingerprint(graph), target_fp))

    spec = TaskSpec(name, TaskKind.SIMILARITY, {"target": target})
    return Oracle(spec, score)


def isomer_task(formula_text: str, name: str = "isomer") -> Oracle:
    target_counts = parse_formula(formula_text)

    def score(graph: MolGraph) -> float:
        actual = formula(graph)
        elements = set(target_counts) | set(actual)
        terms = [
            gaussian_modifier(actual.get(el, 0), target_counts.get(el, 0), 1.0)
            for el in sorted(elements)
        ]
        return geometric_mean(terms)

    spec = TaskSpec(name, TaskKind.ISOMER, {"formula": formula_text})
    return Oracle(spec, score)


def median_task(t1: str, t2: str, name: str = "median") -> Oracle:
    fp1 = circular_fingerprint(_parse_target(t1))
    fp2 = circular_fingerprint(_parse_target(t2))

    def score(graph: MolGraph) -> float:
        own = circular_fingerprint(graph)
        return geometric_mean([tanimoto(own, fp1), tanimoto(own, fp2)])

    spec = TaskSpec(name, TaskKind.MEDIAN, {"target": t1, "target2": t2})
    return Oracle(spec, score)


# PropertyVector selectors usable in MPO terms; "similarity" additionally
# needs a target SMILES on the term.
MPO_SELECTORS = (
    "mol_weight",
    "tpsa",
    "ring_count",
    "rotatable_bonds",
    "heavy_atoms",
    "carbon_fraction",
    "similarity",
)

AGGREGATIONS = ("geometric", "arithmetic")


@dataclass(frozen=True, slots=True)
class MpoTerm:
    selector: str
    modifier: Callable[[float], float]
    target: Optional[str] = None


def mpo_task(
    terms: Sequence[MpoTerm],
    aggregation: str = "geometric",
    name: str = "mpo",
) -> Oracle:
    if len(terms) == 0:
        raise EmptyTerms("mpo task needs at least one term")
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation: {aggregation!r}")

    extractors: List[Tuple[Callable[[MolGraph, PropertyVector], float], Any]] = []
    needs_properties = False
    for term in terms:
        if term.selector == "similarity":
            target_fp = circular_fingerprint(_parse_target(term.target or ""))
            extractors.append(
                (
                    lambda g, vec, fp=target_fp: tanimoto(
                        circular_fingerprint(g), fp
                    ),
                    term.modifier,
                )
            )
        elif term.selector in MPO_SELECTORS:
            needs_properties = True
            extractors.append(
                (
                    lambda g, vec, sel=term.selector: float(getattr(vec, sel)),
                    term.modifier,
                )
            )
        else:
            raise UnknownSelector(f"unknown property selector: {term.selector!r}")

    def score(graph: MolGraph) -> float:
        vec = properties(graph) if needs_properties else None
        values = [mod(extract(graph, vec)) for extract, mod in extractors]
        if aggregation == "geometric":
            return geometric_mean(values)
        return sum(values) / len(values)

    described = [
        {"property": t.selector, **({"target": t.target} if t.target else {})}
        for t in terms
    ]
    spec = TaskSpec(
        name, TaskKind.MPO, {"terms": described, "aggregation": aggregation}
    )
    return Oracle(spec, score)


def multi_target_task(oracles: Sequence[Oracle], name: str = "multi_target") -> Oracle:
    if len(oracles) < 2:
        raise TooFewOracles(f"need at least two component oracles, got {len(oracles)}")
    components = tuple(oracles)

    def score(graph: MolGraph) -> float:
        return sum(o.score_graph(graph) for o in components) / len(components)

    params: Dict[str, Any] = {"components": [o.name for o in components]}
    return Oracle(TaskSpec(name, TaskKind.MULTI_TARGET, params), score)
