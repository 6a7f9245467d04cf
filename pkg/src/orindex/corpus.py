"""Corpus records, the line-oriented corpus file, and synthetic corpora.

A corpus file has one document per line: ``url<TAB>text`` with an optional
third ``<TAB>rank`` field.  Document ids are line numbers starting at 1.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Document:
    url: str
    text: str
    rank: float = 0.0


def read_corpus(path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 2)
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected url<TAB>text")
            rank = float(parts[2]) if len(parts) == 3 else 0.0
            docs.append(Document(parts[0], parts[1], rank))
    return docs


def write_corpus(path, documents: Iterable[Document]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in documents:
            if "\t" in doc.url or "\n" in doc.url or "\n" in doc.text or "\t" in doc.text:
                raise ValueError(f"document {doc.url!r} contains a tab or newline")
            rank = f"\t{doc.rank!r}" if doc.rank else ""
            fh.write(f"{doc.url}\t{doc.text}{rank}\n")


@dataclass(frozen=True)
class GenSpec:
    """Synthetic corpus shape: ``docs`` documents averaging ``avg_len``
    tokens, drawn Zipf(``zipf_s``) from ``vocab`` synthetic words."""

    docs: int
    vocab: int
    avg_len: int
    zipf_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.docs < 0:
            raise ValueError("docs must be >= 0")
        if self.vocab < 1 or self.avg_len < 1:
            raise ValueError("vocab and avg_len must be >= 1")
        if self.zipf_s <= 0:
            raise ValueError("zipf_s must be > 0")


def synthetic_word(rank: int) -> str:
    """Bijective base-26 spelling of a 0-based rank: a, b, ..., z, aa, ab, ..."""
    letters = []
    n = rank + 1
    while n:
        n, r = divmod(n - 1, 26)
        letters.append(chr(ord("a") + r))
    return "".join(reversed(letters))


def generate(spec: GenSpec) -> list[Document]:
    rng = np.random.default_rng(spec.seed)
    if spec.docs == 0:
        return []
    words = [synthetic_word(r) for r in range(spec.vocab)]
    weights = 1.0 / np.arange(1, spec.vocab + 1, dtype=np.float64) ** spec.zipf_s
    weights /= weights.sum()
    lengths = np.maximum(1, rng.poisson(spec.avg_len, size=spec.docs))
    tokens = rng.choice(spec.vocab, size=int(lengths.sum()), p=weights)
    docs = []
    start = 0
    for i, n in enumerate(lengths.tolist(), start=1):
        text = " ".join(words[t] for t in tokens[start:start + n].tolist())
        docs.append(Document(f"http://corpus.example/d{i}", text))
        start += n
    return docs


def gen_corpus(spec: GenSpec, path) -> Path:
    path = Path(path)
    write_corpus(path, generate(spec))
    return path
