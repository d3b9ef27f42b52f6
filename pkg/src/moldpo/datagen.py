"""Synthetic drug-like SMILES corpus generation.

Molecules are assembled from ring templates and acyclic chains whose pieces
are valence-safe by construction, then filtered through the package's own
validator and deduplicated on canonical form. Everything is driven by one
numpy generator, so a (size, seed) pair always yields the same corpus.
Benchmark corpora can embed extra lines (for example a known optimum for a
rediscovery task) repeated enough times to be learnable.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from .errors import SmilesError
from .smiles import canonical_smiles, is_valid

# Substituents attach through their first atom with one single bond.
SUBSTITUENTS = (
    "C", "CC", "CCC", "C(C)C", "CCCC",
    "O", "OC", "OCC", "N", "NC", "N(C)C",
    "F", "Cl", "Br",
    "C#N", "C(=O)O", "C(=O)OC", "C(=O)N", "C(=O)C", "C=O",
    "CO", "CN", "CCO", "S", "SC", "C(F)(F)F",
    "[N+](=O)[O-]", "S(C)(=O)=O", "S(N)(=O)=O",
)

# Two-ring cores; a substituent may chain off the final atom.
FUSED_SCAFFOLDS = (
    "c1ccc2ccccc2c1",
    "c1ccc2[nH]ccc2c1",
    "c1ccc2occc2c1",
    "c1ccc2sccc2c1",
    "c1ccc2ncccc2c1",
    "C1CCC2(CC1)CCCC2",
    "c1ccc2c(c1)CCCC2",
    "c1ccc2c(c1)OCCO2",
)

CHAIN_DECORATIONS = ("C", "O", "N", "=O", "F", "Cl")
CHAIN_TAILS = ("O", "N", "C#N", "C(=O)O", "C(=O)N", "Cl", "F", "")

# (ring atoms, indices that may carry a substituent); index 0 never does.
RING_TEMPLATES = (
    (("c", "c", "c", "c", "c", "c"), (1, 2, 3, 4, 5)),
    (("c", "n", "c", "c", "c", "c"), (2, 3, 4, 5)),
    (("c", "c", "n", "c", "c", "c"), (1, 3, 4, 5)),
    (("c", "c", "[nH]", "c", "c"), (1, 3, 4)),
    (("c", "c", "o", "c", "c"), (1, 3, 4)),
    (("c", "c", "s", "c", "c"), (1, 3, 4)),
    (("C", "C", "C", "C", "C", "C"), (1, 2, 3, 4, 5)),
    (("C", "C", "C", "C", "C"), (1, 2, 3, 4)),
    (("C", "C", "O", "C", "C", "C"), (1, 3, 4, 5)),
    (("C", "C", "N", "C", "C", "C"), (1, 3, 4, 5)),
)


def _ring_molecule(rng: np.random.Generator) -> str:
    atoms, open_positions = RING_TEMPLATES[rng.integers(0, len(RING_TEMPLATES))]
    n_subs = int(rng.integers(0, 4))
    positions = set(
        rng.choice(open_positions, size=min(n_subs, len(open_positions)), replace=False)
    )
    out = [atoms[0], "1"]
    for i in range(1, len(atoms)):
        out.append(atoms[i])
        if i in positions and i < len(atoms) - 1:
            out.append(f"({SUBSTITUENTS[rng.integers(0, len(SUBSTITUENTS))]})")
    out.append("1")
    if (len(atoms) - 1) in positions:
        out.append(SUBSTITUENTS[rng.integers(0, len(SUBSTITUENTS))])
    return "".join(out)


def _fused_molecule(rng: np.random.Generator) -> str:
    core = FUSED_SCAFFOLDS[rng.integers(0, len(FUSED_SCAFFOLDS))]
    if rng.random() < 0.5:
        return core + SUBSTITUENTS[rng.integers(0, len(SUBSTITUENTS))]
    return core


def _chain_molecule(rng: np.random.Generator) -> str:
    length = int(rng.integers(2, 9))
    out = []
    for i in range(length):
        element = rng.choice(["C", "C", "C", "C", "N", "O"])
        out.append(element)
        # Decorations stay on carbon; one per atom keeps valence legal.
        if element == "C" and rng.random() < 0.25:
            out.append(f"({CHAIN_DECORATIONS[rng.integers(0, len(CHAIN_DECORATIONS))]})")
    tail = CHAIN_TAILS[rng.integers(0, len(CHAIN_TAILS))]
    if out[-1] != "C" and tail:
        tail = ""
    return "".join(out) + tail


def generate_corpus(
    size: int,
    seed: int = 0,
    include: Sequence[str] = (),
    include_copies: int = 1,
) -> List[str]:
    """Generate `size` unique valid molecules plus repeated include lines."""
    if size < 1:
        raise ValueError(f"corpus size must be positive, got {size}")
    for line in include:
        if not is_valid(line):
            raise SmilesError("include line is not a valid molecule", line)
    rng = np.random.default_rng(seed)
    seen = set()
    lines: List[str] = []
    attempts = 0
    max_attempts = 200 * size
    while len(lines) < size:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError(f"corpus generation stalled after {attempts} attempts")
        kind = rng.random()
        if kind < 0.45:
            text = _ring_molecule(rng)
        elif kind < 0.60:
            text = _fused_molecule(rng)
        else:
            text = _chain_molecule(rng)
        if not is_valid(text):
            continue
        try:
            key = canonical_smiles(text)
        except SmilesError:
            continue
        if key in seen:
            continue
        seen.add(key)
        lines.append(text)
    for line in include:
        lines.extend([line] * include_copies)
    return lines


def write_corpus(path: Union[str, Path], lines: Sequence[str]) -> None:
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
