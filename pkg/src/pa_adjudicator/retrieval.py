"""Shared embedding space and exact top-k evidence selection.

Chunks and checklist items are embedded with a pluggable encoder and
scored by cosine similarity on unit-normalized vectors (so the dot
product suffices). The index is an exact brute-force scan: document sets
are at most a few hundred chunks per case, so exactness is cheap and the
top-k set is a strict prefix of the full deterministic ordering.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx
import numpy as np

from .ingest import DocumentChunk, EmptyInput

_NORM_TOLERANCE = 1e-6


class RetrievalError(Exception):
    pass


class BackendUnavailable(RetrievalError):
    pass


class DimensionMismatch(RetrievalError):
    pass


class EmptyIndex(RetrievalError):
    pass


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple

    @property
    def dim(self) -> int:
        return len(self.values)

    def __post_init__(self):
        norm = float(np.linalg.norm(self.values))
        if abs(norm - 1.0) > _NORM_TOLERANCE:
            raise ValueError(f"embedding is not unit-norm (|v| = {norm})")


@dataclass(frozen=True)
class ScoredChunk:
    chunk: DocumentChunk
    score: float


class Embedder(Protocol):
    dim: int

    def embed_many(self, texts: Sequence[str]) -> np.ndarray: ...


class HashEmbedder:
    """Deterministic test encoder: hash-seeded pseudo-random unit vectors.

    Identical strings always map to identical vectors, across processes
    and runs; distinct strings are near-orthogonal in expectation.
    """

    def __init__(self, dim: int = 32):
        self.dim = dim

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self._embed_one(t) for t in texts])

    def _embed_one(self, text: str) -> np.ndarray:
        if not text:
            raise EmptyInput("cannot embed empty text")
        seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
        rng = np.random.default_rng(seed)
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)


class HttpEmbedder:
    """Client for an encoder endpoint: POST {"texts": [...]} -> {"vectors": [...]}."""

    def __init__(self, url: str, timeout: float = 30.0, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client(timeout=timeout)
        self.dim: int | None = None

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if any(not t for t in texts):
            raise EmptyInput("cannot embed empty text")
        try:
            response = self._client.post(self.url, json={"texts": list(texts)})
            response.raise_for_status()
            vectors = response.json()["vectors"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise BackendUnavailable(f"encoder backend at {self.url}: {exc}") from exc
        matrix = np.asarray(vectors, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(texts):
            raise BackendUnavailable(f"encoder returned malformed vectors for {len(texts)} texts")
        if self.dim is None:
            self.dim = matrix.shape[1]
        elif matrix.shape[1] != self.dim:
            raise DimensionMismatch(f"encoder dim changed from {self.dim} to {matrix.shape[1]}")
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        return matrix / norms


class EvidenceIndex:
    """Immutable per-adjudication index over a document set's chunks."""

    def __init__(self, chunks: Sequence[DocumentChunk], embedder: Embedder):
        self.chunks = list(chunks)
        self.embedder = embedder
        if self.chunks:
            self._matrix = embedder.embed_many([c.text for c in self.chunks])
            self.dim = self._matrix.shape[1]
        else:
            self._matrix = None
            self.dim = None

    def top_k(self, query_text: str, k: int) -> list[ScoredChunk]:
        """Top-k chunks by cosine score, descending; ties broken by chunk_id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.chunks:
            raise EmptyIndex("no chunks in index")
        qvec = self.embedder.embed_many([query_text])[0]
        if qvec.shape[0] != self.dim:
            raise DimensionMismatch(
                f"query vector dim {qvec.shape[0]} differs from index dim {self.dim}"
            )
        scores = self._matrix @ qvec
        order = sorted(range(len(self.chunks)), key=lambda i: (-scores[i], self.chunks[i].chunk_id))
        return [ScoredChunk(chunk=self.chunks[i], score=float(scores[i])) for i in order[:k]]
