"""SMILES handling: tokenizing, parsing, validation, canonical form."""

from .canon import canonical_ranks, canonical_smiles, canonicalize
from .corpus import iter_corpus, read_corpus
from .formula import formula, formula_text, parse_formula
from .parser import (
    AROMATIC_ELEMENTS,
    VALENCES,
    Atom,
    Bond,
    MolGraph,
    ValidationResult,
    is_valid,
    parse,
    validate,
)
from .tokenizer import (
    BOS,
    EOS,
    PAD,
    SPECIAL_TEXTS,
    Token,
    TokenKind,
    detokenize,
    token_texts,
    tokenize,
)

__all__ = [
    "AROMATIC_ELEMENTS",
    "Atom",
    "Bond",
    "BOS",
    "EOS",
    "MolGraph",
    "PAD",
    "SPECIAL_TEXTS",
    "Token",
    "TokenKind",
    "VALENCES",
    "ValidationResult",
    "canonical_ranks",
    "canonical_smiles",
    "canonicalize",
    "detokenize",
    "formula",
    "formula_text",
    "is_valid",
    "iter_corpus",
    "parse",
    "parse_formula",
    "read_corpus",
    "token_texts",
    "tokenize",
    "validate",
]
