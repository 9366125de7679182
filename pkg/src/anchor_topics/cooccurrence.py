"""Word co-occurrence statistics and their normalizations.

``Q[i, j]`` estimates the probability that two distinct token positions drawn
from the same document carry words ``i`` and ``j``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, DegenerateCorpusError

# Fixed chunking makes the reduction order independent of the worker count.
_DOCS_PER_CHUNK = 256


class DegenerateMatrixError(ValueError):
    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    q: np.ndarray
    row_sums: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = _readonly(self.q)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("co-occurrence matrix must be square")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "row_sums", _readonly(q.sum(axis=1)))

    @property
    def n_words(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Word similarity graph; ``weights[i, j]`` is the edge weight of ``(i, j)``."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _readonly(self.weights))

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class RowNormalizedQ:
    rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rows", _readonly(self.rows))


@dataclass(frozen=True, eq=False)
class SyntheticModel:
    a_true: np.ndarray
    r: np.ndarray

    @property
    def anchors(self) -> list[int]:
        return list(range(self.a_true.shape[1]))


def _chunk_moment(x, lengths, scale, lo, hi, n_words):
    part = np.zeros((n_words, n_words))
    for d in range(lo, hi):
        n = lengths[d]
        if n < 2:
            continue
        idx = x.indices[x.indptr[d]:x.indptr[d + 1]]
        w = x.data[x.indptr[d]:x.indptr[d + 1]]
        # Integer outer product keeps each (i, j)/(j, i) pair bitwise equal.
        pairs = np.outer(w, w)
        pairs[np.diag_indices_from(pairs)] -= w
        part[np.ix_(idx, idx)] += pairs * scale[d]
    return part


def build_q(corpus: Corpus, n_jobs: int = 1) -> CooccurrenceMatrix:
    """Average of per-document unbiased second moments.

    Each document with ``n_d >= 2`` tokens contributes
    ``(w w^T - diag(w)) / (n_d (n_d - 1))``; documents with fewer tokens are
    skipped. The result sums to one and is exactly symmetric.
    """
    x = corpus.counts
    lengths = corpus.doc_lengths
    usable = int(np.count_nonzero(lengths >= 2))
    if usable == 0:
        raise DegenerateCorpusError("no document has two or more tokens")
    scale = np.zeros(len(lengths))
    ok = lengths >= 2
    scale[ok] = 1.0 / (lengths[ok] * (lengths[ok] - 1)).astype(np.float64)

    bounds = [(lo, min(lo + _DOCS_PER_CHUNK, corpus.n_docs))
              for lo in range(0, corpus.n_docs, _DOCS_PER_CHUNK)]
    q = np.zeros((corpus.n_words, corpus.n_words))
    args = lambda b: (x, lengths, scale, b[0], b[1], corpus.n_words)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for part in pool.map(lambda b: _chunk_moment(*args(b)), bounds):
                q += part
    else:
        for b in bounds:
            q += _chunk_moment(*args(b))
    q /= usable
    return CooccurrenceMatrix(q)


def to_similarity_graph(q: CooccurrenceMatrix) -> SimilarityGraph:
    top = q.q.max()
    if not top > 0:
        raise DegenerateMatrixError("co-occurrence matrix has no positive entry")
    return SimilarityGraph(q.q / top)


def row_normalize(q: CooccurrenceMatrix) -> RowNormalizedQ:
    sums = q.row_sums
    bad = np.flatnonzero(~(sums > 0))
    if bad.size:
        raise DegenerateMatrixError(
            f"word {bad[0]} has zero co-occurrence mass ({bad.size} such rows)", word=int(bad[0]))
    return RowNormalizedQ(q.q / sums[:, None])


def separable_q(a: np.ndarray, r: np.ndarray) -> CooccurrenceMatrix:
    """``A R A^T`` for a column-stochastic ``A`` and symmetric ``R``."""
    q = a @ r @ a.T
    return CooccurrenceMatrix(np.triu(q) + np.triu(q, 1).T)


def generate_synthetic(v: int, k: int, seed: int) -> tuple[SyntheticModel, CooccurrenceMatrix]:
    """Random exactly separable instance whose anchor words are ``0..k-1``."""
    if not 1 <= k <= v:
        raise ValueError(f"need 1 <= k <= v, got k={k}, v={v}")
    rng = np.random.default_rng(seed)
    a = np.zeros((v, k))
    a[np.arange(k), np.arange(k)] = rng.uniform(0.5, 1.5, size=k)
    if v > k:
        a[k:] = rng.dirichlet(np.ones(k), size=v - k) * rng.uniform(0.2, 1.0, size=(v - k, 1))
    a /= a.sum(axis=0)
    # Topic-topic moment of 20 * k documents with Dirichlet(1) proportions.
    w = rng.dirichlet(np.ones(k), size=20 * k).T
    r = w @ w.T
    r = (r + r.T) / 2
    r /= r.sum()
    return SyntheticModel(a, r), separable_q(a, r)
