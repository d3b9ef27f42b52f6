"""Molecular formulas: graph -> element counts, and formula-text parsing."""

from __future__ import annotations

import re
from typing import Dict

from ..errors import MalformedFormula
from .parser import MolGraph

_ELEMENT_COUNT_RE = re.compile(r"([A-Z][a-z]?)(\d*)")


def formula(graph: MolGraph) -> Dict[str, int]:
    """Element counts including implicit and explicit hydrogens.

    Hydrogens appear under "H" whether implicit, bracket-declared or written
    as explicit [H] atoms.
    """
    counts: Dict[str, int] = {}
    for idx, atom in enumerate(graph.atoms):
        counts[atom.element] = counts.get(atom.element, 0) + 1
        h = graph.total_h(idx)
        if h:
            counts["H"] = counts.get("H", 0) + h
    return counts


def formula_text(counts: Dict[str, int]) -> str:
    """Hill-system spelling: C, then H, then the rest alphabetically."""
    parts = []
    for element in _hill_order(counts):
        count = counts[element]
        parts.append(element if count == 1 else f"{element}{count}")
    return "".join(parts)


def _hill_order(counts: Dict[str, int]):
    rest = sorted(e for e in counts if e not in ("C", "H"))
    if "C" in counts:
        return ["C"] + (["H"] if "H" in counts else []) + rest
    return sorted(counts)


def parse_formula(text: str) -> Dict[str, int]:
    """Parse "C11H24"-style element-count text.

    Raises:
        MalformedFormula: empty text, unknown residue, zero counts, or an
            element repeated.
    """
    if not text or not text.strip():
        raise MalformedFormula("empty formula")
    counts: Dict[str, int] = {}
    pos = 0
    for match in _ELEMENT_COUNT_RE.finditer(text):
        if match.start() != pos:
            raise MalformedFormula(f"unexpected {text[pos:match.start()]!r} in {text!r}")
        element, digits = match.group(1), match.group(2)
        if element in counts:
            raise MalformedFormula(f"element {element} repeated in {text!r}")
        count = int(digits) if digits else 1
        if count < 1:
            raise MalformedFormula(f"zero count for {element} in {text!r}")
        counts[element] = count
        pos = match.end()
    if pos != len(text) or not counts:
        raise MalformedFormula(f"trailing {text[pos:]!r} in {text!r}")
    return counts
