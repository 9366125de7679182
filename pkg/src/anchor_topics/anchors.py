"""Anchor-word selection.

Two strategies are provided:

* :func:`soft_clique` looks for a ``K``-clique of small total edge weight in
  the word similarity graph, seeding it with :func:`merge_init` and polishing
  it with single-node swaps in :func:`local_search`.
* :func:`fast_anchor_words` picks rows of the row-normalized co-occurrence
  matrix by repeated farthest-point search away from the span of the rows
  already chosen.

Every tie is broken towards the lowest word index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cooccurrence import RowNormalizedQ, SimilarityGraph

SOFT_CLIQUE = "soft_clique"
FAST_ANCHOR_WORDS = "fast_anchor_words"


class RankDeficiencyError(ValueError):
    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class AnchorSet:
    indices: tuple[int, ...]
    method: str
    total_weight: Optional[float] = None
    seed: Optional[int] = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"anchor indices are not distinct: {self.indices}")

    @property
    def k(self) -> int:
        return len(self.indices)

    def to_dict(self, vocab: Optional[Sequence[str]] = None) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "params": self.params,
            "indices": list(self.indices),
            "words": [vocab[i] for i in self.indices] if vocab is not None else None,
            "total_weight": self.total_weight,
        }

    def to_json(self, vocab: Optional[Sequence[str]] = None) -> str:
        return json.dumps(self.to_dict(vocab), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "AnchorSet":
        return cls(tuple(d["indices"]), d["method"], d.get("total_weight"),
                   d.get("seed"), d.get("params") or {})


@dataclass(frozen=True)
class SoftCliqueParams:
    k: int
    max_iter: int = 1000
    num_starts: Optional[int] = None  # None means ceil(V / k)
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("SoftClique needs k >= 2")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.num_starts is not None and self.num_starts < 1:
            raise ValueError("num_starts must be >= 1")


@dataclass(frozen=True)
class FawParams:
    k: int
    proj_dim: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.proj_dim != 0 and self.proj_dim < self.k:
            raise ValueError("proj_dim must be 0 or at least k")


def _weights(graph) -> np.ndarray:
    return graph.weights if isinstance(graph, SimilarityGraph) else np.asarray(graph, dtype=float)


def clique_weight(x: int, clique, graph) -> float:
    """Total weight of the edges from ``x`` to the members of ``clique`` (self-loop excluded)."""
    w = _weights(graph)
    others = [c for c in clique if c != x]
    return float(w[x, others].sum()) if others else 0.0


def total_weight(clique, graph) -> float:
    """Sum of edge weights over unordered pairs of ``clique``."""
    w = _weights(graph)
    idx = np.asarray(sorted(clique), dtype=np.intp)
    sub = w[np.ix_(idx, idx)]
    return float(np.triu(sub, 1).sum())


def merge_init(graph, params: SoftCliqueParams, starts: Optional[Sequence[int]] = None) -> AnchorSet:
    """Greedy multi-start clique seeding.

    From each start node a clique is grown by repeatedly adding the node with
    the smallest total edge weight to the current clique. The ``k`` nodes
    that took part in the most cliques are returned. ``starts`` overrides the
    seeded random draw of start nodes.
    """
    w = _weights(graph)
    v, k = w.shape[0], params.k
    if v < k:
        raise ValueError(f"graph has {v} nodes, fewer than k={k}")
    if starts is None:
        n_starts = params.num_starts if params.num_starts is not None else math.ceil(v / k)
        n_starts = min(n_starts, v)
        starts = np.random.default_rng(params.seed).choice(v, size=n_starts, replace=False)
    starts = np.asarray(starts, dtype=np.intp)
    n = starts.size

    off_diag = w.copy()
    np.fill_diagonal(off_diag, 0.0)
    member = np.zeros((n, v), dtype=bool)
    member[np.arange(n), starts] = True
    score = off_diag[starts].copy()
    for _ in range(k - 1):
        masked = np.where(member, np.inf, score)
        pick = np.argmin(masked, axis=1)
        member[np.arange(n), pick] = True
        score += off_diag[pick]

    counts = member.sum(axis=0)
    chosen = np.argsort(-counts, kind="stable")[:k]
    chosen = sorted(int(i) for i in chosen)
    return AnchorSet(tuple(chosen), SOFT_CLIQUE, total_weight(chosen, w), params.seed,
                     {"stage": "merge_init", "num_starts": int(n)})


def _swap_tolerance(w: np.ndarray, k: int) -> float:
    return 1e-12 * k * float(np.abs(w).max(initial=0.0))


def best_swap(w: np.ndarray, clique: Sequence[int]) -> tuple[int, int, float]:
    """Best single substitution ``(incoming word, outgoing member, weight change)``."""
    s = np.asarray(clique, dtype=np.intp)
    order = np.argsort(s, kind="stable")
    s = s[order]
    cols = w[:, s].copy()
    cols[s, np.arange(s.size)] = 0.0
    row_total = cols.sum(axis=1)
    # gain[w, j] = Weight(w, S - s_j) - Weight(s_j, S - s_j)
    incoming = row_total[:, None] - cols
    outgoing = row_total[s]
    gain = incoming - outgoing[None, :]
    gain[s, :] = np.inf
    flat = int(np.argmin(gain))
    word, j = divmod(flat, s.size)
    return word, int(s[j]), float(gain[word, j])


def local_search(graph, init: AnchorSet, max_iter: int = 1000) -> AnchorSet:
    """Swap clique members for outside words while the total weight strictly drops.

    Stops when no swap lowers the weight by more than a tiny relative
    tolerance, or after ``max_iter`` swaps.
    """
    w = _weights(graph)
    clique = list(init.indices)
    if len(clique) >= w.shape[0]:
        return AnchorSet(tuple(clique), SOFT_CLIQUE, total_weight(clique, w), init.seed,
                         {**init.params, "stage": "local_search", "swaps": 0, "converged": True})
    tol = _swap_tolerance(w, len(clique))
    swaps = 0
    converged = False
    for _ in range(max_iter):
        word, out, gain = best_swap(w, clique)
        if gain >= -tol:
            converged = True
            break
        clique[clique.index(out)] = word
        swaps += 1
    else:
        converged = best_swap(w, clique)[2] >= -tol
    return AnchorSet(tuple(clique), SOFT_CLIQUE, total_weight(clique, w), init.seed,
                     {**init.params, "stage": "local_search", "swaps": swaps, "converged": converged})


def soft_clique(graph, params: SoftCliqueParams) -> AnchorSet:
    init = merge_init(graph, params)
    found = local_search(graph, init, params.max_iter)
    meta = {"k": params.k, "max_iter": params.max_iter, "num_starts": init.params["num_starts"],
            "swaps": found.params["swaps"], "converged": found.params["converged"],
            "init_weight": init.total_weight}
    return AnchorSet(found.indices, SOFT_CLIQUE, found.total_weight, params.seed, meta)


def random_projection(x: np.ndarray, proj_dim: int, seed: int) -> np.ndarray:
    """Gaussian Johnson-Lindenstrauss map with entries ``N(0, 1/proj_dim)``."""
    rng = np.random.default_rng(seed)
    proj = rng.standard_normal((x.shape[1], proj_dim)) / math.sqrt(proj_dim)
    return x @ proj


def fast_anchor_words(qprime, params: FawParams) -> AnchorSet:
    """Farthest-point anchor search over the rows of ``Q'``.

    The first anchor is the row of largest norm; each further anchor is the
    row farthest from the linear span of the anchors picked so far, measured
    by the residual of a modified Gram-Schmidt sweep with one
    re-orthogonalization pass.
    """
    rows = qprime.rows if isinstance(qprime, RowNormalizedQ) else np.asarray(qprime, dtype=float)
    v = rows.shape[0]
    if v < params.k:
        raise ValueError(f"only {v} rows, fewer than k={params.k}")
    x = random_projection(rows, params.proj_dim, params.seed) if params.proj_dim else rows.copy()

    residual = np.array(x, dtype=np.float64)
    scale = float(np.sqrt((residual ** 2).sum(axis=1)).max(initial=0.0))
    floor = 1e-12 * max(scale, np.finfo(float).tiny)
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    for it in range(params.k):
        norms = np.sqrt((residual ** 2).sum(axis=1))
        norms[chosen] = -1.0
        pick = int(np.argmax(norms))
        if norms[pick] <= floor:
            raise RankDeficiencyError(
                f"rows are numerically dependent: no independent row left at iteration {it + 1}", it + 1)
        b = residual[pick].copy()
        for _ in range(2):
            for u in basis:
                b -= (b @ u) * u
        b /= np.linalg.norm(b)
        basis.append(b)
        chosen.append(pick)
        residual -= np.outer(residual @ b, b)
    return AnchorSet(tuple(chosen), FAST_ANCHOR_WORDS, None, params.seed,
                     {"k": params.k, "proj_dim": params.proj_dim})
