"""Circular substructure fingerprints and Tanimoto similarity.

Each atom contributes one identifier per radius 0..r: radius 0 hashes the
atom's own invariant (element, charge, degree, hydrogen count, aromatic
flag); each further radius folds the sorted (bond order, neighbor id) list
into the previous identifier. Identifiers are reduced modulo the fingerprint
width into a bit set. The hash is a fixed 64-bit FNV-1a over the identifier's
byte encoding, so fingerprints are identical across platforms and runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List

from ..errors import WidthMismatch
from ..smiles.parser import MolGraph

DEFAULT_WIDTH = 2048
DEFAULT_RADIUS = 2

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _fnv1a(data: bytes) -> int:
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & _MASK64
    return value


@dataclass(frozen=True, slots=True)
class Fingerprint:
    bits: FrozenSet[int]
    width: int = DEFAULT_WIDTH
    radius: int = DEFAULT_RADIUS

    def popcount(self) -> int:
        return len(self.bits)


def _bond_code(bond) -> int:
    return 4 if bond.aromatic else bond.order


def atom_environment_ids(graph: MolGraph, radius: int) -> List[List[int]]:
    """Per-radius atom identifiers; index [r][atom]."""
    ids = [
        _fnv1a(
            f"{atom.element},{atom.charge},{graph.degree(idx)},"
            f"{graph.total_h(idx)},{int(atom.aromatic)}".encode()
        )
        for idx, atom in enumerate(graph.atoms)
    ]
    layers = [ids]
    for _ in range(radius):
        prev = layers[-1]
        nxt = []
        for idx in range(len(graph)):
            neighborhood = sorted(
                (_bond_code(graph.bond_between(idx, nbr)), prev[nbr])
                for nbr in graph.neighbors(idx)
            )
            encoded = f"{prev[idx]}|" + ";".join(
                f"{code},{nid}" for code, nid in neighborhood
            )
            nxt.append(_fnv1a(encoded.encode()))
        layers.append(nxt)
    return layers


def circular_fingerprint(
    graph: MolGraph,
    radius: int = DEFAULT_RADIUS,
    width: int = DEFAULT_WIDTH,
) -> Fingerprint:
    """Hash every atom neighborhood up to `radius` into a `width`-bit set.

    Args:
        graph: a valence-checked molecule.
        radius: neighborhood depth, 0..4.
        width: bit-vector width, a power of two.
    """
    if width <= 0 or width & (width - 1):
        raise ValueError(f"width must be a power of two, got {width}")
    if not 0 <= radius <= 4:
        raise ValueError(f"radius must be in 0..4, got {radius}")
    bits = set()
    for layer in atom_environment_ids(graph, radius):
        for identifier in layer:
            bits.add(identifier % width)
    return Fingerprint(frozenset(bits), width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """Intersection over union of bit sets; 1.0 when both are empty."""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = len(a.bits | b.bits)
    if union == 0:
        return 1.0
    return len(a.bits & b.bits) / union
