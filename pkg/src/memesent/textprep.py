"""Deterministic caption-to-token pipeline.

``preprocess`` applies, in order: punctuation/special-character
stripping (every non-alphanumeric byte becomes a space; non-ASCII,
including emoji, counts as special), lower-casing, whitespace
tokenization, stopword removal, and rule-based lemmatization. The
stopword list and lemmatizer exception list ship as versioned data
files so runs are reproducible without any external resources.

The lemmatizer is a small fixed-point suffix reducer (plural
-s/-es/-ies, -ing, -ed with a minimum stem length of 3 and an exception
list), not a dictionary lemmatizer; token-level parity with any
particular external toolkit is not a goal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

__all__ = [
    "PrepConfig",
    "preprocess",
    "lemmatize",
    "read_wordlist",
    "default_stopwords",
    "default_lemma_exceptions",
]

_STRIP_ALNUM = re.compile(r"[^A-Za-z0-9]+")
_STRIP_ALPHA = re.compile(r"[^A-Za-z]+")

_DOUBLE_KEEP = {"ll", "ss", "ee"}  # tell, kiss, see


def read_wordlist(path: str | Path) -> frozenset[str]:
    """Read a one-entry-per-line UTF-8 word list; '#' starts a comment."""
    words = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            entry = line.split("#", 1)[0].strip()
            if entry:
                words.add(entry.lower())
    return frozenset(words)


def _bundled(name: str) -> frozenset[str]:
    text = resources.files("memesent.data").joinpath(name).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            words.add(entry.lower())
    return frozenset(words)


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    return _bundled("stopwords.txt")


@lru_cache(maxsize=None)
def default_lemma_exceptions() -> frozenset[str]:
    return _bundled("lemma_exceptions.txt")


@dataclass(frozen=True)
class PrepConfig:
    """Preprocessing options.

    An empty ``stopwords`` set disables stopword removal. Digits are
    kept by default because meme captions reference years and counts.
    """

    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    lemmatize: bool = True
    strip_digits: bool = False

    def to_dict(self) -> dict:
        return {
            "stopwords": sorted(self.stopwords),
            "lemmatize": self.lemmatize,
            "strip_digits": self.strip_digits,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrepConfig":
        return cls(
            stopwords=frozenset(d["stopwords"]),
            lemmatize=bool(d["lemmatize"]),
            strip_digits=bool(d["strip_digits"]),
        )


def _apply_suffix_rules(token: str, exceptions: frozenset[str]) -> str:
    """One rule application; returns the token unchanged if no rule fits."""
    if token in exceptions:
        return token
    n = len(token)
    # studies -> study, cities -> city
    if n >= 5 and token.endswith("ies"):
        return token[:-3] + "y"
    # boxes -> box, churches -> church, classes -> class
    if n >= 5 and token.endswith(("sses", "xes", "zes", "ches", "shes")):
        return token[:-2]
    if token.endswith(("ss", "us", "is")):
        return token
    if n >= 4 and token.endswith("s") and not token.endswith("es"):
        return token[:-1]
    if n >= 4 and token.endswith("es"):
        return token[:-1]  # memes -> meme
    if n >= 6 and token.endswith("ing"):
        stem = token[:-3]
        if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-2:] not in _DOUBLE_KEEP:
            stem = stem[:-1]  # running -> run
        if len(stem) >= 3:
            return stem
        return token
    if n >= 5 and token.endswith("ed") and not token.endswith("eed"):
        stem = token[:-2]
        if len(stem) >= 4 and stem[-1] == stem[-2] and stem[-2:] not in _DOUBLE_KEEP:
            stem = stem[:-1]  # stopped -> stop
        if len(stem) >= 3:
            return stem
        return token
    return token


def lemmatize(token: str, exceptions: frozenset[str] | None = None) -> str:
    """Reduce a lowercase token to its suffix-rule fixed point.

    Iterating to a fixed point makes the function idempotent:
    "feelings" -> "feeling" (exception) stays put, "sayings" ->
    "saying" -> "say".
    """
    if exceptions is None:
        exceptions = default_lemma_exceptions()
    while True:
        reduced = _apply_suffix_rules(token, exceptions)
        if reduced == token:
            return token
        token = reduced


def preprocess(raw: str, cfg: PrepConfig | None = None) -> list[str]:
    """Turn a raw caption into a list of clean lowercase tokens.

    Total function: any string, including the empty one, yields a
    (possibly empty) token list. Every output token matches [a-z0-9]+
    ([a-z]+ when digits are stripped) and is outside the stopword set.
    """
    if cfg is None:
        cfg = PrepConfig()
    pattern = _STRIP_ALPHA if cfg.strip_digits else _STRIP_ALNUM
    tokens = pattern.sub(" ", raw).lower().split()
    if cfg.stopwords:
        tokens = [t for t in tokens if t not in cfg.stopwords]
    if cfg.lemmatize:
        tokens = [lemmatize(t) for t in tokens]
        if cfg.stopwords:
            # A lemma can land in the stopword set even when the surface
            # form did not ("shes" -> "she"); sweep again so the
            # no-stopword guarantee holds and reprocessing is a no-op.
            tokens = [t for t in tokens if t not in cfg.stopwords]
    return tokens
