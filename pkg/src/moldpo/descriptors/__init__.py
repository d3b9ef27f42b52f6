"""Molecular descriptors: fingerprints, properties, score modifiers."""

from .fingerprints import (
    DEFAULT_RADIUS,
    DEFAULT_WIDTH,
    Fingerprint,
    atom_environment_ids,
    circular_fingerprint,
    tanimoto,
)
from .modifiers import gaussian_modifier, geometric_mean, threshold_modifier
from .properties import (
    PropertyVector,
    heavy_atoms,
    hetero_counts,
    mol_weight,
    properties,
    ring_count,
    rotatable_bonds,
    tpsa,
)

__all__ = [
    "DEFAULT_RADIUS",
    "DEFAULT_WIDTH",
    "Fingerprint",
    "atom_environment_ids",
    "circular_fingerprint",
    "tanimoto",
    "gaussian_modifier",
    "geometric_mean",
    "threshold_modifier",
    "PropertyVector",
    "heavy_atoms",
    "hetero_counts",
    "mol_weight",
    "properties",
    "ring_count",
    "rotatable_bonds",
    "tpsa",
]
