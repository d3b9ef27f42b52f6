"""SMILES parser: token stream to molecular graph, plus valence validation.

The grammar covered is the organic subset (B, C, N, O, P, S, F, Cl, Br, I and
their aromatic lowercase forms) plus bracket atoms with isotope, chirality
marker, hydrogen count, charge and atom class. Chirality and bond stereo
symbols are carried through parsing but do not influence the graph, and
aromaticity is trusted from lowercase symbols (no perception pass).

Hydrogen and valence model
--------------------------
Bond orders sum per atom with aromatic bonds counted as one, plus a pi
increment: +1 for aromatic carbon, +1 for two-connected aromatic N/P without
an explicit hydrogen (pyridine-type). Divalent aromatic O/S donate a lone
pair instead of a pi bond and get no increment, as does three-connected
aromatic nitrogen (N-substituted pyrrole-type) and any aromatic atom with an
exocyclic double bond (the pi electron is spoken for). Unbracketed atoms fill up to
the smallest allowed valence with implicit hydrogens; bracket atoms carry
exactly the hydrogens they declare. A formal charge shifts every allowed
valence by the charge.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import (
    EmptyInput,
    MalformedBracketAtom,
    SmilesError,
    UnmatchedParenthesis,
    UnmatchedRingBond,
    ValenceViolation,
)
from .tokenizer import Token, TokenKind, tokenize

# Allowed valences per element, lowest first. Covers the supported alphabet.
VALENCES: Dict[str, Tuple[int, ...]] = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "F": (1,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Elements that may carry the aromatic flag.
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S"})

_BOND_ORDERS = {"-": 1, "=": 2, "#": 3, ":": 1, "/": 1, "\\": 1}

_BRACKET_RE = re.compile(
    r"""^\[
        (?P<isotope>\d+)?
        (?P<symbol>[A-Z][a-z]?|[bcnops])
        (?P<chiral>@{1,2})?
        (?P<hcount>H\d*)?
        (?P<charge>\+\d+|-\d+|\++|-+)?
        (?::(?P<cls>\d+))?
        \]$""",
    re.VERBOSE,
)


@dataclass(slots=True)
class Atom:
    element: str
    aromatic: bool = False
    charge: int = 0
    isotope: Optional[int] = None
    explicit_h: Optional[int] = None  # None: infer from valence (unbracketed)
    chiral: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Bond:
    a: int
    b: int
    order: int = 1  # 1, 2 or 3; aromatic bonds store 1 with the flag set
    aromatic: bool = False
    stereo: Optional[str] = None  # '/' or '\\', preserved but inert

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


class MolGraph:
    """A parsed molecule: atoms, bonds and derived adjacency."""

    def __init__(self, atoms: List[Atom], bonds: List[Bond]):
        self.atoms = atoms
        self.bonds = bonds
        self._neighbors: List[List[int]] = [[] for _ in atoms]
        self._bond_index: Dict[Tuple[int, int], Bond] = {}
        for bond in bonds:
            self._neighbors[bond.a].append(bond.b)
            self._neighbors[bond.b].append(bond.a)
            key = (min(bond.a, bond.b), max(bond.a, bond.b))
            self._bond_index[key] = bond

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int) -> List[int]:
        return self._neighbors[idx]

    def bond_between(self, a: int, b: int) -> Optional[Bond]:
        return self._bond_index.get((min(a, b), max(a, b)))

    def degree(self, idx: int) -> int:
        return len(self._neighbors[idx])

    def bonds_of(self, idx: int) -> List[Bond]:
        return [self.bond_between(idx, j) for j in self._neighbors[idx]]

    # -- hydrogen / valence accounting --

    def bond_order_sum(self, idx: int) -> int:
        """Bond orders incident to the atom, aromatic as 1 plus pi increment."""
        atom = self.atoms[idx]
        total = 0
        for bond in self.bonds_of(idx):
            total += 1 if bond.aromatic else bond.order
        return total + self._pi_increment(idx, atom)

    def _pi_increment(self, idx: int, atom: Atom) -> int:
        if not atom.aromatic:
            return 0
        for bond in self.bonds_of(idx):
            # An exocyclic double/triple bond claims the pi electron
            # (aromatic carbonyl carbons and the like).
            if not bond.aromatic and bond.order >= 2:
                return 0
        if atom.element == "C":
            return 1
        if atom.element in ("N", "P"):
            # Two-connected bare n is pyridine-type and owns a pi bond;
            # [nH] and three-connected n are pyrrole-type and do not.
            if self.degree(idx) == 2 and not atom.explicit_h:
                return 1
        return 0

    def implicit_h(self, idx: int) -> int:
        atom = self.atoms[idx]
        if atom.explicit_h is not None:
            return 0
        used = self.bond_order_sum(idx)
        for valence in VALENCES[atom.element]:
            if valence >= used:
                return valence - used
        return 0

    def bare_implicit_h(self, idx: int) -> int:
        """Hydrogens a bracketless, uncharged spelling of the atom would get.

        Mirrors `implicit_h` but ignores the atom's own explicit_h/charge;
        used by the canonical emitter to decide whether brackets are needed.
        """
        atom = self.atoms[idx]
        used = 0
        has_exo_multiple = False
        for bond in self.bonds_of(idx):
            used += 1 if bond.aromatic else bond.order
            has_exo_multiple = has_exo_multiple or (
                not bond.aromatic and bond.order >= 2
            )
        if atom.aromatic and not has_exo_multiple:
            if atom.element == "C":
                used += 1
            elif atom.element in ("N", "P") and self.degree(idx) == 2:
                used += 1
        for valence in VALENCES[atom.element]:
            if valence >= used:
                return valence - used
        return 0

    def total_h(self, idx: int) -> int:
        atom = self.atoms[idx]
        if atom.explicit_h is not None:
            return atom.explicit_h
        return self.implicit_h(idx)

    def components(self) -> List[List[int]]:
        """Connected components as sorted atom-index lists."""
        seen = [False] * len(self.atoms)
        out: List[List[int]] = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack = [start]
            seen[start] = True
            comp = []
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nxt in self._neighbors[cur]:
                    if not seen[nxt]:
                        seen[nxt] = True
                        stack.append(nxt)
            out.append(sorted(comp))
        return out


def max_valence(element: str, charge: int) -> int:
    """Largest allowed valence for an element at a formal charge (floor 0)."""
    return max(0, max(VALENCES[element]) + charge)


def check_valences(graph: MolGraph, smiles: str = "") -> None:
    """Raise ValenceViolation on the first over-bonded atom."""
    for idx, atom in enumerate(graph.atoms):
        used = graph.bond_order_sum(idx) + graph.total_h(idx)
        allowed = max_valence(atom.element, atom.charge)
        if used > allowed:
            raise ValenceViolation(
                f"atom {idx} ({atom.element}{'+' if atom.charge > 0 else ''}"
                f"{atom.charge or ''}) has valence {used}, allowed {allowed}",
                smiles,
                element=atom.element,
                atom_index=idx,
                valence=used,
            )


def _parse_bracket(token: Token, smiles: str, pos: int) -> Atom:
    match = _BRACKET_RE.match(token.text)
    if match is None:
        raise MalformedBracketAtom(f"bad bracket atom {token.text!r}", smiles, pos)
    symbol = match.group("symbol")
    aromatic = symbol.islower()
    element = symbol.capitalize()
    if element not in VALENCES:
        raise MalformedBracketAtom(
            f"unsupported element {symbol!r} in {token.text!r}", smiles, pos
        )
    if aromatic and element not in AROMATIC_ELEMENTS:
        raise MalformedBracketAtom(
            f"element {element} cannot be aromatic", smiles, pos
        )
    hcount_text = match.group("hcount")
    if hcount_text is None:
        hcount = 0
    elif hcount_text == "H":
        hcount = 1
    else:
        hcount = int(hcount_text[1:])
    charge_text = match.group("charge")
    if charge_text is None:
        charge = 0
    elif charge_text[0] == "+" and charge_text[1:].isdigit():
        charge = int(charge_text[1:])
    elif charge_text[0] == "-" and charge_text[1:].isdigit():
        charge = -int(charge_text[1:])
    else:  # runs of + or -
        charge = len(charge_text) if charge_text[0] == "+" else -len(charge_text)
    isotope = match.group("isotope")
    return Atom(
        element=element,
        aromatic=aromatic,
        charge=charge,
        isotope=int(isotope) if isotope else None,
        explicit_h=hcount,
        chiral=match.group("chiral"),
    )


@dataclass(slots=True)
class _RingOpening:
    atom: int
    order: Optional[int]  # bond symbol at the opening site, if any
    aromatic: bool
    stereo: Optional[str]
    position: int


@dataclass(slots=True)
class _State:
    prev_atom: Optional[int] = None
    pending_order: Optional[int] = None
    pending_aromatic: bool = False
    pending_stereo: Optional[str] = None
    branch_stack: List[int] = field(default_factory=list)
    open_rings: Dict[str, _RingOpening] = field(default_factory=dict)

    def take_pending(self) -> Tuple[Optional[int], bool, Optional[str]]:
        pending = (self.pending_order, self.pending_aromatic, self.pending_stereo)
        self.pending_order = None
        self.pending_aromatic = False
        self.pending_stereo = None
        return pending


def parse(smiles: str) -> MolGraph:
    """Parse a SMILES string into a valence-checked MolGraph.

    Args:
        smiles: SMILES text; leading/trailing whitespace is rejected as part
            of the grammar (tokenizer level).

    Raises:
        EmptyInput: empty or whitespace-only input.
        IllegalCharacter, UnclosedBracket: tokenizer-level rejections.
        MalformedBracketAtom, UnmatchedRingBond, UnmatchedParenthesis,
        SmilesError: structural problems.
        ValenceViolation: an atom bonded beyond its allowed valence.
    """
    if not smiles or smiles.strip() == "":
        raise EmptyInput("empty SMILES", smiles)

    tokens = tokenize(smiles)
    atoms: List[Atom] = []
    bonds: List[Bond] = []
    bonded_pairs: set[Tuple[int, int]] = set()
    state = _State()
    pos = 0  # character offset for diagnostics

    def add_bond(a: int, b: int, order: Optional[int], aromatic_sym: bool,
                 stereo: Optional[str]) -> None:
        if a == b:
            raise UnmatchedRingBond("ring bond to the same atom", smiles, pos)
        key = (min(a, b), max(a, b))
        if key in bonded_pairs:
            raise UnmatchedRingBond("duplicate bond between atoms", smiles, pos)
        bonded_pairs.add(key)
        if order is None and not aromatic_sym:
            aromatic = atoms[a].aromatic and atoms[b].aromatic
            bonds.append(Bond(a, b, 1, aromatic, stereo))
        else:
            bonds.append(Bond(a, b, order or 1, aromatic_sym, stereo))

    def add_atom(atom: Atom) -> None:
        atoms.append(atom)
        idx = len(atoms) - 1
        order, aromatic_sym, stereo = state.take_pending()
        if state.prev_atom is not None:
            add_bond(state.prev_atom, idx, order, aromatic_sym, stereo)
        elif order is not None or aromatic_sym or stereo:
            raise SmilesError("bond symbol with no preceding atom", smiles, pos)
        state.prev_atom = idx

    for token in tokens:
        kind = token.kind
        if kind is TokenKind.ATOM:
            text = token.text
            if text.islower():
                add_atom(Atom(element=text.capitalize(), aromatic=True))
            else:
                add_atom(Atom(element=text))
        elif kind is TokenKind.BRACKET_ATOM:
            add_atom(_parse_bracket(token, smiles, pos))
        elif kind is TokenKind.BOND:
            if state.pending_order is not None or state.pending_aromatic:
                raise SmilesError("two bond symbols in a row", smiles, pos)
            if token.text == ":":
                state.pending_aromatic = True
            elif token.text in ("/", "\\"):
                state.pending_stereo = token.text
            else:
                state.pending_order = _BOND_ORDERS[token.text]
        elif kind is TokenKind.RING_BOND:
            if state.prev_atom is None:
                raise UnmatchedRingBond("ring bond before any atom", smiles, pos)
            label = token.text[1:] if token.text.startswith("%") else token.text
            order, aromatic_sym, stereo = state.take_pending()
            opening = state.open_rings.pop(label, None)
            if opening is None:
                state.open_rings[label] = _RingOpening(
                    state.prev_atom, order, aromatic_sym, stereo, pos
                )
            else:
                if order is not None and opening.order is not None \
                        and order != opening.order:
                    raise UnmatchedRingBond(
                        f"ring {label} closed with conflicting bond symbols",
                        smiles, pos,
                    )
                add_bond(
                    opening.atom,
                    state.prev_atom,
                    order if order is not None else opening.order,
                    aromatic_sym or opening.aromatic,
                    stereo if stereo is not None else opening.stereo,
                )
        elif kind is TokenKind.BRANCH_OPEN:
            if state.prev_atom is None:
                raise UnmatchedParenthesis("branch before any atom", smiles, pos)
            if state.pending_order is not None or state.pending_aromatic:
                raise SmilesError("bond symbol before '('", smiles, pos)
            state.branch_stack.append(state.prev_atom)
        elif kind is TokenKind.BRANCH_CLOSE:
            if not state.branch_stack:
                raise UnmatchedParenthesis("')' without '('", smiles, pos)
            if state.pending_order is not None or state.pending_aromatic \
                    or state.pending_stereo is not None:
                raise SmilesError("dangling bond before ')'", smiles, pos)
            state.prev_atom = state.branch_stack.pop()
        elif kind is TokenKind.DOT:
            if state.branch_stack:
                raise SmilesError("'.' inside a branch", smiles, pos)
            if state.pending_order is not None or state.pending_aromatic \
                    or state.pending_stereo is not None:
                raise SmilesError("bond symbol before '.'", smiles, pos)
            if state.prev_atom is None:
                raise EmptyInput("empty component before '.'", smiles)
            state.prev_atom = None
        else:  # BOS/EOS/PAD never come from tokenize
            raise SmilesError(f"unexpected token {token.text}", smiles, pos)
        pos += len(token.text)

    if state.branch_stack:
        raise UnmatchedParenthesis("unclosed '('", smiles, pos)
    if state.open_rings:
        labels = ", ".join(sorted(state.open_rings))
        raise UnmatchedRingBond(f"unclosed ring bond(s): {labels}", smiles, pos)
    if state.pending_order is not None or state.pending_aromatic \
            or state.pending_stereo is not None:
        raise SmilesError("dangling bond at end of input", smiles, pos)
    if not atoms or state.prev_atom is None:
        raise EmptyInput("no atoms", smiles)

    graph = MolGraph(atoms, bonds)
    for bond in bonds:
        if bond.aromatic and not (
            atoms[bond.a].aromatic and atoms[bond.b].aromatic
        ):
            raise SmilesError(
                "aromatic bond between non-aromatic atoms", smiles
            )
    check_valences(graph, smiles)
    return graph


@dataclass(frozen=True, slots=True)
class ValidationResult:
    valid: bool
    diagnostic: Optional[SmilesError] = None

    def __bool__(self) -> bool:
        return self.valid


def validate(smiles: str) -> ValidationResult:
    """Never-raising validity check: grammar plus valence.

    Returns a result whose ``diagnostic`` holds the rejection when invalid.
    """
    try:
        parse(smiles)
    except SmilesError as exc:
        return ValidationResult(False, exc)
    except Exception as exc:  # non-SMILES inputs must still not raise
        return ValidationResult(False, SmilesError(str(exc), smiles))
    return ValidationResult(True, None)


def is_valid(smiles: str) -> bool:
    return validate(smiles).valid
