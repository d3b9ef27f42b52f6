"""Physicochemical properties: weight, rings, rotatable bonds, polar surface.

Mass and polar-surface-area tables ship as TSV data files next to this
module and are loaded once. TPSA uses N/O fragment contributions matched on
atom features (see the table header for the matching rule).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from importlib import resources
from typing import Dict, FrozenSet, List, Tuple

from ..smiles.parser import MolGraph


@dataclass(frozen=True, slots=True)
class PropertyVector:
    mol_weight: float
    ring_count: int
    rotatable_bonds: int
    tpsa: float
    heavy_atoms: int
    hetero_counts: Dict[str, int]

    @property
    def carbon_fraction(self) -> float:
        """Carbon atoms over heavy atoms; 0.0 for the empty molecule."""
        if self.heavy_atoms == 0:
            return 0.0
        carbons = self.heavy_atoms - sum(self.hetero_counts.values())
        return carbons / self.heavy_atoms


def _data_text(name: str) -> str:
    return (resources.files("moldpo.descriptors") / "data" / name).read_text(
        encoding="utf-8"
    )


def _data_rows(name: str) -> List[List[str]]:
    rows = []
    for line in _data_text(name).splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append(line.split("\t"))
    return rows


@functools.lru_cache(maxsize=1)
def atomic_masses() -> Dict[str, float]:
    return {row[0]: float(row[1]) for row in _data_rows("atomic_masses.tsv")}


# (element, aromatic, charge, hydrogens, single, double, triple,
#  aromatic_bonds, in_ring3 [-1 wildcard]) -> contribution
_TpsaRow = Tuple[str, int, int, int, int, int, int, int, int, float]


@functools.lru_cache(maxsize=1)
def tpsa_table() -> List[_TpsaRow]:
    out = []
    for row in _data_rows("tpsa_contributions.tsv"):
        element = row[0]
        numbers = [int(x) for x in row[1:9]]
        out.append((element, *numbers, float(row[9])))
    return out


def mol_weight(graph: MolGraph) -> float:
    masses = atomic_masses()
    total = 0.0
    for idx, atom in enumerate(graph.atoms):
        total += masses[atom.element]
        total += masses["H"] * graph.total_h(idx)
    return total


def ring_count(graph: MolGraph) -> int:
    """Cycle rank: bonds - atoms + components."""
    return len(graph.bonds) - len(graph) + len(graph.components())


def bridge_keys(graph: MolGraph) -> FrozenSet[Tuple[int, int]]:
    """Bonds whose removal disconnects the graph (the non-ring bonds)."""
    n = len(graph)
    disc = [-1] * n
    low = [0] * n
    timer = 0
    bridges = set()
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(graph.neighbors(root)))]
        while stack:
            node, parent, nbrs = stack[-1]
            pushed = False
            for nbr in nbrs:
                if nbr == parent:
                    continue
                if disc[nbr] == -1:
                    disc[nbr] = low[nbr] = timer
                    timer += 1
                    stack.append((nbr, node, iter(graph.neighbors(nbr))))
                    pushed = True
                    break
                low[node] = min(low[node], disc[nbr])
            if not pushed:
                stack.pop()
                if stack:
                    upper = stack[-1][0]
                    low[upper] = min(low[upper], low[node])
                    if low[node] > disc[upper]:
                        bridges.add((min(upper, node), max(upper, node)))
    return frozenset(bridges)


def ring_bond_keys(graph: MolGraph) -> FrozenSet[Tuple[int, int]]:
    bridges = bridge_keys(graph)
    return frozenset(
        (min(b.a, b.b), max(b.a, b.b))
        for b in graph.bonds
        if (min(b.a, b.b), max(b.a, b.b)) not in bridges
    )


def rotatable_bonds(graph: MolGraph) -> int:
    """Non-ring single bonds between heavy atoms of heavy-degree >= 2."""
    ring_keys = ring_bond_keys(graph)

    def heavy_degree(idx: int) -> int:
        return sum(
            1 for nbr in graph.neighbors(idx) if graph.atoms[nbr].element != "H"
        )

    count = 0
    for bond in graph.bonds:
        if bond.order != 1 or bond.aromatic:
            continue
        if (min(bond.a, bond.b), max(bond.a, bond.b)) in ring_keys:
            continue
        if graph.atoms[bond.a].element == "H" or graph.atoms[bond.b].element == "H":
            continue
        if heavy_degree(bond.a) >= 2 and heavy_degree(bond.b) >= 2:
            count += 1
    return count


def _in_three_ring(graph: MolGraph, idx: int) -> bool:
    nbrs = graph.neighbors(idx)
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1 :]:
            if graph.bond_between(a, b) is not None:
                return True
    return False


def tpsa(graph: MolGraph) -> float:
    total = 0.0
    for idx, atom in enumerate(graph.atoms):
        if atom.element not in ("N", "O"):
            continue
        hydrogens = graph.total_h(idx)
        single = double = triple = aromatic_bonds = 0
        for nbr in graph.neighbors(idx):
            if graph.atoms[nbr].element == "H":
                hydrogens += 1
                continue
            bond = graph.bond_between(idx, nbr)
            if bond.aromatic:
                aromatic_bonds += 1
            elif bond.order == 1:
                single += 1
            elif bond.order == 2:
                double += 1
            else:
                triple += 1
        ring3 = 1 if _in_three_ring(graph, idx) else 0
        features = (
            atom.element,
            int(atom.aromatic),
            atom.charge,
            hydrogens,
            single,
            double,
            triple,
            aromatic_bonds,
        )
        for row in tpsa_table():
            if row[:8] == features and row[8] in (-1, ring3):
                total += row[9]
                break
    return total


def heavy_atoms(graph: MolGraph) -> int:
    return sum(1 for atom in graph.atoms if atom.element != "H")


def hetero_counts(graph: MolGraph) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for atom in graph.atoms:
        if atom.element in ("C", "H"):
            continue
        counts[atom.element] = counts.get(atom.element, 0) + 1
    return counts


def properties(graph: MolGraph) -> PropertyVector:
    return PropertyVector(
        mol_weight=mol_weight(graph),
        ring_count=ring_count(graph),
        rotatable_bonds=rotatable_bonds(graph),
        tpsa=tpsa(graph),
        heavy_atoms=heavy_atoms(graph),
        hetero_counts=hetero_counts(graph),
    )
