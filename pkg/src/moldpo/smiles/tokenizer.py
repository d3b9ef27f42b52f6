"""SMILES tokenizer.

Splits a SMILES string into grammar tokens: one token per atom (two-letter
halogens and bracket atoms included), per bond symbol, per ring-closure label
(``%nn`` is a single token), per branch parenthesis and per dot. Greedy
longest-match, so ``Cl`` never splits into ``C`` + ``l``.

The special markers BOS/EOS/PAD exist as token kinds for the model layer but
are never produced from raw text; `detokenize` rejects them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, List

from ..errors import IllegalCharacter, UnclosedBracket


class TokenKind(enum.Enum):
    ATOM = "atom"
    BRACKET_ATOM = "bracket_atom"
    BOND = "bond"
    RING_BOND = "ring_bond"
    BRANCH_OPEN = "branch_open"
    BRANCH_CLOSE = "branch_close"
    DOT = "dot"
    BOS = "bos"
    EOS = "eos"
    PAD = "pad"


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str

    def __str__(self) -> str:
        return self.text


BOS = Token(TokenKind.BOS, "<BOS>")
EOS = Token(TokenKind.EOS, "<EOS>")
PAD = Token(TokenKind.PAD, "<PAD>")

SPECIAL_TEXTS = (PAD.text, BOS.text, EOS.text)

# Organic subset: written without brackets, implicit hydrogens allowed.
TWO_LETTER_ORGANIC = ("Cl", "Br")
ONE_LETTER_ORGANIC = frozenset("BCNOPSFI")
AROMATIC_ORGANIC = frozenset("bcnops")

BOND_CHARS = frozenset("-=#:/\\")


def tokenize(smiles: str) -> List[Token]:
    """Split a SMILES string into grammar tokens.

    Args:
        smiles: raw SMILES text.

    Returns:
        Tokens whose concatenated texts reproduce the input exactly.

    Raises:
        IllegalCharacter: on any byte outside the grammar.
        UnclosedBracket: on a ``[`` with no closing ``]``.
    """
    tokens: List[Token] = []
    i = 0
    n = len(smiles)
    while i < n:
        ch = smiles[i]
        if ch == "[":
            end = smiles.find("]", i + 1)
            if end < 0:
                raise UnclosedBracket("unterminated bracket atom", smiles, i)
            tokens.append(Token(TokenKind.BRACKET_ATOM, smiles[i : end + 1]))
            i = end + 1
        elif smiles.startswith(TWO_LETTER_ORGANIC, i):
            tokens.append(Token(TokenKind.ATOM, smiles[i : i + 2]))
            i += 2
        elif ch in ONE_LETTER_ORGANIC or ch in AROMATIC_ORGANIC:
            tokens.append(Token(TokenKind.ATOM, ch))
            i += 1
        elif ch.isdigit():
            tokens.append(Token(TokenKind.RING_BOND, ch))
            i += 1
        elif ch == "%":
            if i + 2 >= n or not (smiles[i + 1].isdigit() and smiles[i + 2].isdigit()):
                raise IllegalCharacter("'%' must be followed by two digits", smiles, i)
            tokens.append(Token(TokenKind.RING_BOND, smiles[i : i + 3]))
            i += 3
        elif ch in BOND_CHARS:
            tokens.append(Token(TokenKind.BOND, ch))
            i += 1
        elif ch == "(":
            tokens.append(Token(TokenKind.BRANCH_OPEN, ch))
            i += 1
        elif ch == ")":
            tokens.append(Token(TokenKind.BRANCH_CLOSE, ch))
            i += 1
        elif ch == ".":
            tokens.append(Token(TokenKind.DOT, ch))
            i += 1
        else:
            raise IllegalCharacter(f"character {ch!r} is not SMILES", smiles, i)
    return tokens


def detokenize(tokens: Iterable[Token]) -> str:
    """Concatenate token texts; exact inverse of `tokenize` on accepted input."""
    parts = []
    for tok in tokens:
        if tok.kind in (TokenKind.BOS, TokenKind.EOS, TokenKind.PAD):
            raise ValueError(f"special token {tok.text} has no surface form")
        parts.append(tok.text)
    return "".join(parts)


def token_texts(smiles: str) -> List[str]:
    """Tokenize and return only the texts (the model layer's view)."""
    return [tok.text for tok in tokenize(smiles)]
