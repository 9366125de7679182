"""UMass topic coherence over a topic's most probable words."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import Corpus, doc_frequencies


class CoherenceError(ValueError):
    pass


@dataclass(frozen=True)
class CoherenceParams:
    h: int = 10
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


class DocCooccurrenceCounts:
    """Document-level presence counts for a subset of the vocabulary.

    ``pair(i, j)`` is the number of documents containing both words and
    ``pair(i, i) == word_counts[i]``.
    """

    def __init__(self, words: Sequence[int], pair_matrix: np.ndarray, word_counts: np.ndarray):
        self.words = tuple(int(w) for w in words)
        self._pos = {w: p for p, w in enumerate(self.words)}
        self.pair_matrix = pair_matrix
        self.word_counts = word_counts

    def pair(self, i: int, j: int) -> int:
        try:
            return int(self.pair_matrix[self._pos[i], self._pos[j]])
        except KeyError as exc:
            raise KeyError(f"word {exc.args[0]} was not counted") from None

    @property
    def pair_counts(self) -> dict:
        n = len(self.words)
        return {(self.words[a], self.words[b]): int(self.pair_matrix[a, b])
                for a in range(n) for b in range(a, n) if self.pair_matrix[a, b]}


def count_cooccurrence(corpus: Corpus, words: Iterable[int]) -> DocCooccurrenceCounts:
    words = sorted(set(int(w) for w in words))
    if words and not (0 <= words[0] and words[-1] < corpus.n_words):
        raise IndexError("word index outside the vocabulary")
    present = corpus.counts[:, words].astype(bool).astype(np.int64)
    pairs = (present.T @ present).toarray()
    return DocCooccurrenceCounts(words, pairs, doc_frequencies(corpus))


def topic_coherence(counts: DocCooccurrenceCounts, top_words: Sequence[int],
                    params: CoherenceParams = CoherenceParams()) -> float:
    """``sum_{i>j} log((Num(w_i, w_j) + eps) / Num(w_j))`` with natural log.

    ``top_words`` must be ordered by decreasing in-topic probability.
    """
    score = 0.0
    for w in top_words:
        if counts.word_counts[w] <= 0:
            raise CoherenceError(f"word {w} occurs in no document")
    for i in range(1, len(top_words)):
        for j in range(i):
            wi, wj = top_words[i], top_words[j]
            score += math.log((counts.pair(wi, wj) + params.epsilon) / counts.word_counts[wj])
    return score


def top_words(model, topic: int, h: int) -> list[int]:
    a = model.a if hasattr(model, "a") else np.asarray(model)
    col = a[:, topic]
    return np.argsort(-col, kind="stable")[:h].tolist()


@dataclass
class CoherenceReport:
    per_topic: list
    average: float
    h: int
    top_words: Optional[list] = None

    def to_tsv(self, vocab: Optional[Sequence[str]] = None) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, delimiter="\t", lineterminator="\n")
        out.writerow(["topic", "score", "top_words"])
        for k, score in enumerate(self.per_topic):
            words = self.top_words[k] if self.top_words else []
            shown = " ".join(vocab[w] for w in words) if vocab is not None else " ".join(map(str, words))
            out.writerow([k, repr(float(score)), shown])
        return buf.getvalue()


def average_coherence(model, corpus: Corpus, params: CoherenceParams = CoherenceParams()) -> CoherenceReport:
    a = model.a if hasattr(model, "a") else np.asarray(model)
    tops = [top_words(a, k, params.h) for k in range(a.shape[1])]
    counts = count_cooccurrence(corpus, {w for t in tops for w in t})
    scores = [topic_coherence(counts, t, params) for t in tops]
    return CoherenceReport(scores, float(np.mean(scores)), params.h, tops)


def coherence_summary(reports: Iterable[CoherenceReport]) -> str:
    """JSON keyed by H, one entry per report."""
    body = {str(r.h): {"average": r.average, "per_topic": [float(s) for s in r.per_topic]} for r in reports}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
