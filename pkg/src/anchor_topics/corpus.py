"""Bag-of-words corpora in the UCI ``docword``/``vocab`` format.

A :class:`Corpus` wraps a sparse ``M x V`` document-word count matrix and the
vocabulary strings. Documents never contain zero tokens.
"""
from __future__ import annotations

import gzip
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp


class CorpusError(ValueError):
    """Base class for corpus loading and preprocessing failures."""


class CorpusFormatError(CorpusError):
    pass


class CorpusIndexError(CorpusError, IndexError):
    pass


class TruncatedCorpusError(CorpusError):
    pass


class DegenerateCorpusError(CorpusError):
    pass


@dataclass(frozen=True, eq=False)
class Corpus:
    """Immutable document-word counts plus vocabulary.

    ``counts`` is a canonical CSR matrix (sorted indices, no explicit zeros,
    no empty rows) of shape ``(n_docs, n_words)``.
    """

    counts: sp.csr_matrix
    vocab: tuple[str, ...]
    doc_lengths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = sp.csr_matrix(self.counts, dtype=np.int64)
        x.sum_duplicates()
        x.eliminate_zeros()
        x.sort_indices()
        vocab = tuple(self.vocab)
        if x.shape[1] != len(vocab):
            raise CorpusFormatError(
                f"count matrix has {x.shape[1]} columns but vocab has {len(vocab)} words")
        if x.nnz and x.data.min() < 1:
            raise CorpusFormatError("counts must be positive integers")
        if len(set(vocab)) != len(vocab) or any(not w for w in vocab):
            raise CorpusFormatError("vocab entries must be unique, non-empty strings")
        lengths = np.asarray(x.sum(axis=1)).ravel()
        if np.any(lengths == 0):
            raise CorpusFormatError("corpus contains empty documents")
        x.data.setflags(write=False)
        lengths.setflags(write=False)
        object.__setattr__(self, "counts", x)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "doc_lengths", lengths)

    @property
    def n_docs(self) -> int:
        return self.counts.shape[0]

    @property
    def n_words(self) -> int:
        return self.counts.shape[1]

    def doc(self, d: int) -> dict[int, int]:
        """Return document ``d`` as ``{word_index: count}``."""
        lo, hi = self.counts.indptr[d], self.counts.indptr[d + 1]
        return dict(zip(self.counts.indices[lo:hi].tolist(), self.counts.data[lo:hi].tolist()))

    @property
    def docs(self) -> list[dict[int, int]]:
        return [self.doc(d) for d in range(self.n_docs)]

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        a, b = self.counts, other.counts
        return (self.vocab == other.vocab and a.shape == b.shape
                and np.array_equal(a.indptr, b.indptr)
                and np.array_equal(a.indices, b.indices)
                and np.array_equal(a.data, b.data))

    __hash__ = None

    def fingerprint(self) -> str:
        """SHA-256 over counts and vocabulary; stable across runs."""
        h = hashlib.sha256()
        h.update(np.asarray(self.counts.shape, dtype="<i8").tobytes())
        for arr in (self.counts.indptr, self.counts.indices, self.counts.data):
            h.update(np.ascontiguousarray(arr, dtype="<i8").tobytes())
        h.update("\n".join(self.vocab).encode("utf-8"))
        return h.hexdigest()


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: frozenset = frozenset()
    df_cutoff: int = 0
    high_freq_fraction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        if self.df_cutoff < 0:
            raise ValueError("df_cutoff must be non-negative")
        if not 0 < self.high_freq_fraction <= 1:
            raise ValueError("high_freq_fraction must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {"df_cutoff": self.df_cutoff,
                "high_freq_fraction": self.high_freq_fraction,
                "n_stopwords": len(self.stopwords),
                "stopwords_sha256": hashlib.sha256(
                    "\n".join(sorted(self.stopwords)).encode()).hexdigest()}


# Document-frequency cutoffs per UCI corpus.
PRESETS = {"nips": 50, "kos": 60, "enron": 200, "20news": 150}


def default_stopwords() -> frozenset:
    """The 524-entry MALLET English stopword list (523 distinct words)."""
    text = resources.files("anchor_topics").joinpath("data/mallet_en.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def read_stopwords(path) -> frozenset:
    with _open_text(path) as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def preset_config(name: str, stopwords=None) -> PreprocessConfig:
    try:
        cutoff = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return PreprocessConfig(stopwords=default_stopwords() if stopwords is None else stopwords,
                            df_cutoff=cutoff, high_freq_fraction=0.8)


def _open_text(path):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def _header_int(lines: Iterator[str], name: str) -> int:
    for raw in lines:
        s = raw.strip()
        if not s:
            continue
        try:
            value = int(s)
        except ValueError:
            raise CorpusFormatError(f"bad {name} header line: {raw!r}") from None
        if value < 0:
            raise CorpusFormatError(f"negative {name} in header")
        return value
    raise CorpusFormatError(f"missing {name} header line")


def load_uci(docword_source: Iterable[str], vocab_source: Iterable[str]) -> Corpus:
    """Parse a UCI bag-of-words corpus from two line streams.

    The docword stream holds the three header lines ``D``, ``W``, ``NNZ``
    followed by ``NNZ`` lines ``docID wordID count`` with 1-based IDs.
    Duplicate ``(doc, word)`` triples are summed and documents without any
    triple are dropped.
    """
    lines = iter(docword_source)
    n_docs = _header_int(lines, "D")
    n_words = _header_int(lines, "W")
    nnz = _header_int(lines, "NNZ")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.int64)
    n = 0
    for lineno, raw in enumerate(lines, start=4):
        parts = raw.split()
        if not parts:
            continue
        if n >= nnz:
            raise TruncatedCorpusError(f"more than NNZ={nnz} triples (line {lineno})")
        if len(parts) != 3:
            raise CorpusFormatError(f"line {lineno}: expected 3 fields, got {raw!r}")
        try:
            d, w, c = (int(p) for p in parts)
        except ValueError:
            raise CorpusFormatError(f"line {lineno}: non-integer field in {raw!r}") from None
        if not 1 <= d <= n_docs:
            raise CorpusIndexError(f"line {lineno}: docID {d} outside 1..{n_docs}")
        if not 1 <= w <= n_words:
            raise CorpusIndexError(f"line {lineno}: wordID {w} outside 1..{n_words}")
        if c < 1:
            raise CorpusFormatError(f"line {lineno}: count must be positive")
        rows[n], cols[n], vals[n] = d - 1, w - 1, c
        n += 1
    if n != nnz:
        raise TruncatedCorpusError(f"header declares NNZ={nnz} but found {n} triples")

    vocab = [line.strip() for line in vocab_source]
    while vocab and not vocab[-1]:
        vocab.pop()
    if len(vocab) != n_words:
        raise CorpusFormatError(f"vocab has {len(vocab)} lines, header declares W={n_words}")

    x = sp.coo_matrix((vals, (rows, cols)), shape=(n_docs, n_words)).tocsr()
    x.sum_duplicates()
    keep = np.diff(x.indptr) > 0
    return Corpus(x[keep], tuple(vocab))


def load_uci_files(docword_path, vocab_path) -> Corpus:
    with _open_text(docword_path) as dw, _open_text(vocab_path) as vf:
        return load_uci(dw, vf)


def iter_uci_lines(corpus: Corpus) -> Iterator[str]:
    x = corpus.counts
    yield f"{x.shape[0]}\n"
    yield f"{x.shape[1]}\n"
    yield f"{x.nnz}\n"
    for d in range(x.shape[0]):
        for w, c in zip(x.indices[x.indptr[d]:x.indptr[d + 1]], x.data[x.indptr[d]:x.indptr[d + 1]]):
            yield f"{d + 1} {w + 1} {c}\n"


def write_uci(corpus: Corpus, docword_path, vocab_path) -> None:
    opener = (lambda p: gzip.open(p, "wt", encoding="utf-8")) if os.fspath(docword_path).endswith(".gz") \
        else (lambda p: open(p, "w", encoding="utf-8"))
    with opener(docword_path) as fh:
        fh.writelines(iter_uci_lines(corpus))
    with open(vocab_path, "w", encoding="utf-8") as fh:
        fh.writelines(w + "\n" for w in corpus.vocab)


def doc_frequencies(corpus: Corpus) -> np.ndarray:
    """Number of documents containing each word, length ``V``."""
    return np.bincount(corpus.counts.indices, minlength=corpus.n_words)


def doc_frequency(corpus: Corpus, word: int) -> int:
    if not 0 <= word < corpus.n_words:
        raise CorpusIndexError(f"word index {word} outside 0..{corpus.n_words - 1}")
    col = corpus.counts.indices
    return int(np.count_nonzero(col == word))


def preprocess(corpus: Corpus, cfg: PreprocessConfig) -> Corpus:
    """Drop stopwords, rare words and very common words.

    A word survives iff it is not a stopword and its document frequency ``df``
    satisfies ``df_cutoff <= df <= high_freq_fraction * M``. Vocabulary order
    is preserved; documents left without tokens are dropped.
    """
    df = doc_frequencies(corpus)
    stop = np.fromiter((w in cfg.stopwords for w in corpus.vocab), dtype=bool, count=corpus.n_words)
    keep = ~stop & (df >= cfg.df_cutoff) & (df <= cfg.high_freq_fraction * corpus.n_docs)
    kept = np.flatnonzero(keep)
    if kept.size == 0:
        raise DegenerateCorpusError("preprocessing removed every word")
    x = corpus.counts[:, kept].tocsr()
    x = x[np.diff(x.indptr) > 0]
    if x.shape[0] == 0:
        raise DegenerateCorpusError("preprocessing removed every document")
    return Corpus(x, tuple(corpus.vocab[i] for i in kept))


def save_preprocessed(corpus: Corpus, original: Corpus, cfg: PreprocessConfig, out_dir, name: str) -> dict:
    """Write the filtered corpus in UCI format with a JSON metadata sidecar."""
    os.makedirs(out_dir, exist_ok=True)
    docword = os.path.join(out_dir, f"docword.{name}.txt")
    vocab = os.path.join(out_dir, f"vocab.{name}.txt")
    write_uci(corpus, docword, vocab)
    meta = {
        "config": cfg.to_dict(),
        "original": {"n_docs": original.n_docs, "n_words": original.n_words,
                     "fingerprint": original.fingerprint()},
        "preprocessed": {"n_docs": corpus.n_docs, "n_words": corpus.n_words,
                         "fingerprint": corpus.fingerprint()},
    }
    with open(os.path.join(out_dir, f"{name}.meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return meta
