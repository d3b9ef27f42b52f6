"""Token vocabulary and id-sequence types for the sequence model.

Ids 0, 1, 2 are pinned to PAD, BOS, EOS in every vocabulary; SMILES tokens
follow in sorted order, so a vocabulary is a pure function of the token set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

from ..smiles.tokenizer import tokenize

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2

PAD_TEXT = "<PAD>"
BOS_TEXT = "<BOS>"
EOS_TEXT = "<EOS>"

_SPECIALS = (PAD_TEXT, BOS_TEXT, EOS_TEXT)


@dataclass(frozen=True, slots=True)
class TokenSequence:
    """BOS-prefixed, EOS-terminated id sequence with no interior padding."""

    ids: Tuple[int, ...]
    truncated: bool = False

    def __post_init__(self):
        ids = tuple(self.ids)
        object.__setattr__(self, "ids", ids)
        if len(ids) < 2:
            raise ValueError("sequence needs at least BOS and EOS")
        if ids[0] != BOS_ID:
            raise ValueError("sequence must start with BOS")
        if ids[-1] != EOS_ID:
            raise ValueError("sequence must end with EOS")
        interior = ids[1:-1]
        if BOS_ID in interior or EOS_ID in interior or PAD_ID in interior:
            raise ValueError("special ids are not allowed inside a sequence")

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class Vocab:
    tokens: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if tuple(self.tokens[:3]) != _SPECIALS:
            raise ValueError(f"vocabulary must start with {_SPECIALS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        object.__setattr__(
            self, "_index", {text: i for i, text in enumerate(self.tokens)}
        )

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, smiles: str) -> TokenSequence:
        ids = [BOS_ID]
        for token in tokenize(smiles):
            token_id = self._index.get(token.text)
            if token_id is None:
                raise ValueError(f"token not in vocabulary: {token.text!r}")
            ids.append(token_id)
        ids.append(EOS_ID)
        return TokenSequence(tuple(ids))

    def decode(self, seq: TokenSequence) -> str:
        return "".join(self.tokens[i] for i in seq.ids[1:-1])


def build_vocab(smiles_iter: Iterable[str]) -> Vocab:
    texts = set()
    for smiles in smiles_iter:
        for token in tokenize(smiles):
            texts.add(token.text)
    return Vocab(tokens=_SPECIALS + tuple(sorted(texts)))
