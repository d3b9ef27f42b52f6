"""Canonical SMILES emission.

Atom ranks come from iterative neighborhood refinement: the starting invariant
is (element, charge, total hydrogens, aromatic flag, degree, isotope), then
each round folds in the sorted (bond order, neighbor rank) multiset until the
partition stabilizes. Remaining ties are split one atom at a time followed by
re-refinement; after full refinement, tied atoms are symmetry-equivalent for
molecule-like graphs, so the split does not depend on input atom order.

Emission is a depth-first walk from the first-ranked atom of each component,
visiting neighbors in rank order, with ring-closure labels allocated in
emission order and reused after closing. Stereo markers are dropped (they are
inert in the graph). Components are emitted in sorted string order joined by
dots.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .parser import Bond, MolGraph, parse
from .tokenizer import TWO_LETTER_ORGANIC

_ORGANIC_SUBSET = frozenset(
    {"B", "C", "N", "O", "P", "S", "F", "I"} | set(TWO_LETTER_ORGANIC)
)


def _bond_code(bond: Bond) -> int:
    return 4 if bond.aromatic else bond.order


def _dense_ranks(keys: List) -> List[int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def canonical_ranks(graph: MolGraph) -> List[int]:
    """Permutation-invariant atom ranks, 0 .. n-1, unique per atom."""
    n = len(graph)
    if n == 0:
        return []

    def refine(ranks: List[int]) -> List[int]:
        while True:
            keys = [
                (
                    ranks[idx],
                    tuple(
                        sorted(
                            (_bond_code(graph.bond_between(idx, nbr)), ranks[nbr])
                            for nbr in graph.neighbors(idx)
                        )
                    ),
                )
                for idx in range(n)
            ]
            new_ranks = _dense_ranks(keys)
            if new_ranks == ranks:
                return ranks
            ranks = new_ranks

    initial = [
        (
            atom.element,
            atom.charge,
            graph.total_h(idx),
            atom.aromatic,
            graph.degree(idx),
            atom.isotope or 0,
        )
        for idx, atom in enumerate(graph.atoms)
    ]
    ranks = refine(_dense_ranks(initial))
    while len(set(ranks)) < n:
        counts: Dict[int, int] = {}
        for rank in ranks:
            counts[rank] = counts.get(rank, 0) + 1
        tied = min(rank for rank, count in counts.items() if count > 1)
        chosen = min(idx for idx in range(n) if ranks[idx] == tied)
        ranks = refine(
            _dense_ranks([(ranks[i], 0 if i == chosen else 1) for i in range(n)])
        )
    return ranks


def _atom_text(graph: MolGraph, idx: int) -> str:
    """Shortest faithful spelling: bare organic-subset symbol when possible."""
    atom = graph.atoms[idx]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_ok = (
        atom.element in _ORGANIC_SUBSET
        and atom.charge == 0
        and atom.isotope is None
        and graph.total_h(idx) == graph.bare_implicit_h(idx)
    )
    if bare_ok:
        return symbol
    h = graph.total_h(idx)
    h_text = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    if atom.charge == 0:
        charge_text = ""
    elif atom.charge == 1:
        charge_text = "+"
    elif atom.charge == -1:
        charge_text = "-"
    elif atom.charge > 0:
        charge_text = f"+{atom.charge}"
    else:
        charge_text = f"-{-atom.charge}"
    isotope_text = "" if atom.isotope is None else str(atom.isotope)
    return f"[{isotope_text}{symbol}{h_text}{charge_text}]"


def _bond_text(graph: MolGraph, bond: Bond) -> str:
    """Bond symbol, empty when it is the default for its endpoints."""
    both_aromatic = graph.atoms[bond.a].aromatic and graph.atoms[bond.b].aromatic
    if bond.aromatic:
        return "" if both_aromatic else ":"
    if bond.order == 1:
        return "-" if both_aromatic else ""
    return "=" if bond.order == 2 else "#"


def _ring_label(number: int) -> str:
    return str(number) if number < 10 else f"%{number:02d}"


def _emit_component(graph: MolGraph, ranks: List[int], root: int) -> str:
    # Pass 1: spanning tree in rank order; non-tree edges become closures.
    parent: Dict[int, Optional[int]] = {root: None}
    children: Dict[int, List[int]] = {}
    ring_edges: List[Tuple[int, int]] = []
    ring_seen: set[Tuple[int, int]] = set()
    emit_pos: Dict[int, int] = {}
    stack = [root]
    visited = {root}
    while stack:
        cur = stack.pop()
        emit_pos[cur] = len(emit_pos)
        kids = []
        for nbr in sorted(graph.neighbors(cur), key=lambda j: ranks[j]):
            if nbr not in visited:
                visited.add(nbr)
                parent[nbr] = cur
                kids.append(nbr)
            elif nbr != parent[cur]:
                key = (min(cur, nbr), max(cur, nbr))
                if key not in ring_seen:
                    ring_seen.add(key)
                    ring_edges.append((cur, nbr))
        children[cur] = kids
        for kid in reversed(kids):
            stack.append(kid)

    # Each closure opens at whichever endpoint is emitted first.
    ring_at: Dict[int, List[int]] = {}  # atom -> edge ids touching it
    for edge_id, (a, b) in enumerate(ring_edges):
        ring_at.setdefault(a, []).append(edge_id)
        ring_at.setdefault(b, []).append(edge_id)

    open_labels: Dict[int, int] = {}  # edge id -> allocated ring number
    free = list(range(99, 0, -1))  # pop() hands out 1, 2, ...
    out: List[str] = []
    # Pass 2: emit. Work items are literal text or (atom, incoming bond).
    work: List[Tuple[str, object]] = [("atom", (root, None))]
    while work:
        op, payload = work.pop()
        if op == "text":
            out.append(payload)  # type: ignore[arg-type]
            continue
        cur, incoming = payload  # type: ignore[misc]
        if incoming is not None:
            out.append(_bond_text(graph, incoming))
        out.append(_atom_text(graph, cur))
        pending_open = []
        for edge_id in ring_at.get(cur, ()):
            if edge_id in open_labels:  # closing end: bare label
                number = open_labels.pop(edge_id)
                out.append(_ring_label(number))
                free.append(number)
            else:
                a, b = ring_edges[edge_id]
                partner = b if a == cur else a
                pending_open.append((ranks[partner], partner, edge_id))
        for _, partner, edge_id in sorted(pending_open):
            number = free.pop()
            open_labels[edge_id] = number
            bond = graph.bond_between(cur, partner)
            out.append(_bond_text(graph, bond) + _ring_label(number))
        kids = children[cur]
        for i in range(len(kids) - 1, -1, -1):
            kid = kids[i]
            bond = graph.bond_between(cur, kid)
            if i == len(kids) - 1:
                work.append(("atom", (kid, bond)))
            else:
                work.append(("text", ")"))
                work.append(("atom", (kid, bond)))
                work.append(("text", "("))
    return "".join(out)


def canonicalize(graph: MolGraph) -> str:
    """Deterministic, permutation-invariant SMILES for a valid graph."""
    ranks = canonical_ranks(graph)
    parts = []
    for comp in graph.components():
        root = min(comp, key=lambda idx: ranks[idx])
        parts.append(_emit_component(graph, ranks, root))
    return ".".join(sorted(parts))


def canonical_smiles(smiles: str) -> str:
    """Parse then canonicalize; raises whatever `parse` raises."""
    return canonicalize(parse(smiles))
