"""Corpus file reading: one SMILES per line, # comments and blanks ignored."""

from __future__ import annotations

from pathlib import Path
from typing import Iterator, List


def iter_corpus(path: str | Path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            yield line


def read_corpus(path: str | Path) -> List[str]:
    return list(iter_corpus(path))
