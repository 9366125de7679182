"""Topic recovery from anchor words.

Every row of ``Q'`` is written as a convex combination of the anchor rows,
``Q'[i] ~= C[i] @ Q'[S]``, by exponentiated gradient on the probability
simplex. The word-topic matrix is then the column-normalized
``diag(Q 1) C``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .anchors import AnchorSet
from .cooccurrence import CooccurrenceMatrix, RowNormalizedQ, row_normalize
from .matrix_io import read_matrix, write_matrix

_MAX_HALVINGS = 60
_ARMIJO = 0.5


class DegenerateTopicError(ValueError):
    def __init__(self, message, topic):
        super().__init__(message)
        self.topic = topic


@dataclass(frozen=True)
class EgParams:
    """Exponentiated-gradient settings.

    ``step_size`` is measured in units of the mean squared anchor-row norm so
    the solver behaves the same for any overall scaling of the problem.
    A row has converged once the square root of the duality gap
    ``c . (g - min g)``, relative to that same scale, drops below ``tol``.
    The gap is quadratic in the coefficient error near an exact fit, so its
    root tracks that error linearly.
    """

    step_size: float = 50.0
    max_iter: int = 500
    tol: float = 1e-7

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class SimplexFit:
    coef: np.ndarray
    converged: bool
    iterations: int
    gap: float
    objective: float
    history: Optional[list] = None


@dataclass
class ReconstructionCoefficients:
    c: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    gaps: np.ndarray

    @property
    def nonconverged_rows(self) -> list[int]:
        return np.flatnonzero(~self.converged).tolist()


@dataclass
class TopicModel:
    a: np.ndarray
    anchors: Optional[AnchorSet] = None
    vocab: Optional[Sequence[str]] = None
    coefficients: Optional[ReconstructionCoefficients] = field(default=None, repr=False)

    @property
    def n_topics(self) -> int:
        return self.a.shape[1]

    def save(self, path, extra: Optional[dict] = None) -> None:
        meta = {
            "anchors": self.anchors.to_dict(self.vocab) if self.anchors is not None else None,
            "shape": list(self.a.shape),
        }
        if self.coefficients is not None:
            meta["converged"] = self.coefficients.converged.astype(int).tolist()
            meta["nonconverged_rows"] = self.coefficients.nonconverged_rows
        if extra:
            meta.update(extra)
        write_matrix(path, self.a, meta)

    @classmethod
    def load(cls, path, vocab=None) -> "TopicModel":
        with open(os.fspath(path) + ".json") as fh:
            meta = json.load(fh)
        anchors = AnchorSet.from_dict(meta["anchors"]) if meta.get("anchors") else None
        return cls(read_matrix(path), anchors, vocab)


def lsq_objective(c, target, anchor_rows) -> float:
    r = np.asarray(target) - np.asarray(c) @ np.asarray(anchor_rows)
    return float(r @ r)


def lsq_gradient(c, target, anchor_rows) -> np.ndarray:
    b = np.asarray(anchor_rows)
    return 2.0 * b @ (np.asarray(c) @ b - np.asarray(target))


def _eg_batch(targets, anchor_rows, params: EgParams, record_history=False):
    b = np.asarray(anchor_rows, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(t))):
        raise FloatingPointError("non-finite value in exponentiated-gradient input")
    n, k = t.shape[0], b.shape[0]
    gram = b @ b.T
    cross = t @ b.T
    tt = np.einsum("ij,ij->i", t, t)
    scale = float(np.mean(np.diag(gram)))
    if not scale > 0:
        scale = 1.0

    logc = np.full((n, k), -np.log(k))
    c = np.exp(logc)
    f = tt - 2.0 * np.einsum("ij,ij->i", c, cross) + np.einsum("ij,ij->i", c @ gram, c)
    eta0 = params.step_size / scale
    eta = np.full(n, eta0)
    done = np.zeros(n, dtype=bool)
    converged = np.zeros(n, dtype=bool)
    iterations = np.zeros(n, dtype=np.int64)
    gaps = np.full(n, np.inf)
    history = [f.copy()] if record_history else None

    for _ in range(params.max_iter + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        grad = 2.0 * (c[act] @ gram - cross[act])
        gap = np.einsum("ij,ij->i", c[act], grad - grad.min(axis=1, keepdims=True)) / scale
        gaps[act] = gap
        hit = gap < params.tol ** 2
        converged[act[hit]] = True
        done[act[hit]] = True
        capped = iterations[act] >= params.max_iter
        done[act[capped]] = True
        keep = ~(hit | capped)
        act, grad = act[keep], grad[keep]
        if act.size == 0:
            break

        todo = np.arange(act.size)
        new_logc = np.empty((act.size, k))
        new_f = np.empty(act.size)
        for _ in range(_MAX_HALVINGS):
            rows = act[todo]
            trial = logc[rows] - eta[rows, None] * grad[todo]
            trial -= logsumexp(trial, axis=1, keepdims=True)
            # Change in objective from the old point, free of the |t|^2 cancellation.
            step = np.exp(trial) - c[rows]
            linear = np.einsum("ij,ij->i", step, grad[todo])
            change = linear + np.einsum("ij,ij->i", step @ gram, step)
            # Sufficient decrease; plain descent lets the iterate bounce across a valley.
            ok = change <= _ARMIJO * linear
            new_logc[todo[ok]] = trial[ok]
            new_f[todo[ok]] = f[rows[ok]] + change[ok]
            eta[rows[~ok]] *= 0.5
            todo = todo[~ok]
            if todo.size == 0:
                break
        moved = np.ones(act.size, dtype=bool)
        moved[todo] = False
        stalled = act[~moved]
        done[stalled] = True
        upd = act[moved]
        logc[upd] = new_logc[moved]
        c[upd] = np.exp(logc[upd])
        f[upd] = new_f[moved]
        eta[upd] = np.minimum(eta[upd] * 2.0, eta0 * 2.0 ** 20)
        iterations[upd] += 1
        if record_history:
            history.append(f.copy())

    c /= c.sum(axis=1, keepdims=True)
    return c, converged, iterations, gaps, f, history


def eg_simplex_lsq(target, anchor_rows, params: EgParams = EgParams(), record_history=False) -> SimplexFit:
    """Minimize ``||target - c @ anchor_rows||^2`` over the probability simplex.

    Multiplicative updates ``c <- c * exp(-eta * grad) / Z`` start at the
    uniform point; ``eta`` is halved until the objective drops by at least
    half of its first-order prediction and doubled after each accepted step. If ``max_iter`` is reached the
    last iterate is returned with ``converged=False``.
    """
    b = np.atleast_2d(np.asarray(anchor_rows, dtype=np.float64))
    if b.shape[0] < 1:
        raise ValueError("need at least one anchor row")
    c, conv, its, gaps, f, hist = _eg_batch(np.asarray(target, dtype=np.float64)[None, :], b, params,
                                            record_history)
    history = [float(h[0]) for h in hist] if hist is not None else None
    return SimplexFit(c[0], bool(conv[0]), int(its[0]), float(gaps[0]), float(f[0]), history)


def recover_c(qprime: RowNormalizedQ, anchors: AnchorSet, params: EgParams = EgParams()) -> ReconstructionCoefficients:
    rows = qprime.rows if isinstance(qprime, RowNormalizedQ) else np.asarray(qprime, dtype=float)
    idx = list(anchors.indices)
    if max(idx) >= rows.shape[0]:
        raise IndexError("anchor index outside the vocabulary")
    c, conv, its, gaps, _, _ = _eg_batch(rows, rows[idx], params)
    return ReconstructionCoefficients(c, conv, its, gaps)


def recover_a(q: CooccurrenceMatrix, c: ReconstructionCoefficients, anchors: Optional[AnchorSet] = None,
              vocab=None) -> TopicModel:
    coef = c.c if isinstance(c, ReconstructionCoefficients) else np.asarray(c, dtype=float)
    row_sums = q.row_sums if isinstance(q, CooccurrenceMatrix) else np.asarray(q, dtype=float).sum(axis=1)
    if coef.shape[0] != row_sums.shape[0]:
        raise ValueError(f"C has {coef.shape[0]} rows but Q has {row_sums.shape[0]}")
    joint = row_sums[:, None] * coef
    mass = joint.sum(axis=0)
    empty = np.flatnonzero(~(mass > 0))
    if empty.size:
        raise DegenerateTopicError(f"topic {empty[0]} receives no word mass", int(empty[0]))
    a = joint / mass
    return TopicModel(a, anchors, vocab, c if isinstance(c, ReconstructionCoefficients) else None)


def recover_topics(q: CooccurrenceMatrix, anchors: AnchorSet, params: EgParams = EgParams(), vocab=None) -> TopicModel:
    coef = recover_c(row_normalize(q), anchors, params)
    return recover_a(q, coef, anchors, vocab)
