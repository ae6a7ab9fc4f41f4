"""Deterministic reference text embedder: signed hashed bag-of-words, L2-normalized.

The embedder is intentionally dependency-free and bit-reproducible across
platforms: integer hashing (FNV-1a 64-bit), a pinned stopword list, no locale
dependence. Stored vectors are part of the session file format, so the
stoplist and hashing scheme are frozen; changing either is a breaking format
change.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

# Pinned stoplist, version 1: exactly 30 common English function words.
# "s" covers the contraction artifact from tokenizing "it's" / "who's".
STOPWORDS = frozenset(
    [
        "the", "a", "an", "and", "or", "but",
        "of", "to", "in", "on", "at", "by",
        "for", "with", "from", "as",
        "is", "are", "was", "be",
        "it", "this", "that",
        "you", "he", "she", "him", "they",
        "how", "s",
    ]
)

MIN_DIM = 8

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Split text into lowercase content tokens.

    Unicode letters and digits are kept, everything else is a separator.
    Stopwords are removed; order and repetitions are preserved.
    """
    out = []
    buf = []
    for ch in text.lower():
        if ch.isalnum():
            buf.append(ch)
        elif buf:
            tok = "".join(buf)
            if tok not in STOPWORDS:
                out.append(tok)
            buf.clear()
    if buf:
        tok = "".join(buf)
        if tok not in STOPWORDS:
            out.append(tok)
    return out


def _bucket(token: str, dim: int) -> tuple[int, float]:
    h = fnv1a_64(token.encode("utf-8"))
    sign = 1.0 if (h // dim) & 1 == 0 else -1.0
    return h % dim, sign


def embed_text(text: str, dim: int = 128) -> np.ndarray:
    """Embed text as a signed hashed bag-of-words vector.

    Each token hashes to a bucket h mod dim with sign taken from bit 0 of
    h // dim; occurrences accumulate, then the vector is L2-normalized.
    Text with no content tokens maps to the all-zeros vector.
    """
    if dim < MIN_DIM:
        raise ValueError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        idx, sign = _bucket(token, dim)
        vec[idx] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero-norm inputs yield 0.0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    val = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, val))


class Embedder(Protocol):
    """Contract for pluggable embedders: pure, deterministic, fixed dim."""

    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashedEmbedder:
    """Reference embedder wrapping :func:`embed_text` at a fixed dimension."""

    def __init__(self, dim: int = 128):
        if dim < MIN_DIM:
            raise ValueError(f"embedding dim must be >= {MIN_DIM}, got {dim}")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        return embed_text(text, self.dim)
