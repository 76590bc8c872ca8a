"""Bag-of-words presence vectors over a capped training vocabulary."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..base import Estimator, check_fitted

__all__ = ["BowVocab", "build_bow_vocab", "bow_vectorize", "BowVectorizer"]


@dataclass(frozen=True)
class BowVocab:
    """Ordered token list; position defines the vector component."""

    words: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")

    def __len__(self) -> int:
        return len(self.words)

    @property
    def index(self) -> dict[str, int]:
        cached = self.__dict__.get("_index")
        if cached is None:
            cached = {w: i for i, w in enumerate(self.words)}
            object.__setattr__(self, "_index", cached)
        return cached


def build_bow_vocab(token_lists: list[list[str]], max_size: int = 5000) -> BowVocab:
    """Top ``max_size`` tokens by corpus frequency, ties lexicographic.

    Built from the training split only; the resulting ordering is
    deterministic, so vectors are stable across runs.
    """
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    freq = Counter(t for tokens in token_lists for t in tokens)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return BowVocab(words=tuple(w for w, _ in ranked[:max_size]))


def bow_vectorize(tokens: list[str], vocab: BowVocab) -> np.ndarray:
    """Binary presence vector: component i is 1 iff vocab[i] occurs."""
    vec = np.zeros(len(vocab), dtype=np.float64)
    index = vocab.index
    for t in tokens:
        j = index.get(t)
        if j is not None:
            vec[j] = 1.0
    return vec


class BowVectorizer(Estimator):
    """fit builds the vocabulary, transform emits presence rows."""

    def __init__(self, max_size: int = 5000):
        self.max_size = max_size

    def fit(self, X: list[list[str]], y=None) -> "BowVectorizer":
        self.vocab_ = build_bow_vocab(X, self.max_size)
        return self

    def transform(self, X: list[list[str]]) -> np.ndarray:
        check_fitted(self, "vocab_")
        out = np.zeros((len(X), len(self.vocab_)), dtype=np.float64)
        index = self.vocab_.index
        for i, tokens in enumerate(X):
            for t in tokens:
                j = index.get(t)
                if j is not None:
                    out[i, j] = 1.0
        return out

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X, y).transform(X)
