"""End-to-end runs: topic discovery, anchor-selection timing and multi-seed exploration."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import corpus as corpus_mod
from .anchors import AnchorSet, FawParams, SoftCliqueParams, fast_anchor_words, soft_clique
from .cooccurrence import (CooccurrenceMatrix, build_q, generate_synthetic, row_normalize,
                           to_similarity_graph)
from .corpus import Corpus, PreprocessConfig
from .evaluation import CoherenceParams, average_coherence, coherence_summary
from .matrix_io import read_matrix, write_matrix
from .recovery import EgParams, recover_topics

logger = logging.getLogger(__name__)

METHODS = ("sc", "faw")


@dataclass
class RunConfig:
    corpus: Optional[str] = None
    vocab: Optional[str] = None
    preset: Optional[str] = None
    stopwords: Optional[str] = None  # None -> bundled MALLET list
    df_cutoff: Optional[int] = None
    high_freq_fraction: float = 0.8
    method: str = "sc"
    k: int = 100
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    h_values: list = field(default_factory=lambda: [5, 10, 20])
    epsilon: float = 1e-8
    max_iter: int = 1000
    num_starts: Optional[int] = None
    proj_dim: int = 1000
    eg_step_size: float = 50.0
    eg_max_iter: int = 500
    eg_tol: float = 1e-7
    out: str = "runs/out"
    cache: Optional[str] = None
    jobs: int = 1
    parallel: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(h < 1 for h in self.h_values):
            raise ValueError("H values must be >= 1")

    def preprocess_config(self) -> PreprocessConfig:
        stop = corpus_mod.read_stopwords(self.stopwords) if self.stopwords else corpus_mod.default_stopwords()
        cutoff = self.df_cutoff
        if cutoff is None:
            cutoff = corpus_mod.PRESETS[self.preset] if self.preset else 0
        return PreprocessConfig(stop, cutoff, self.high_freq_fraction)

    def eg_params(self) -> EgParams:
        return EgParams(self.eg_step_size, self.eg_max_iter, self.eg_tol)

    def digest(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k not in ("out", "cache", "jobs", "parallel")}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        with open(path) as fh:
            data = json.load(fh)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass
class PreparedCorpus:
    corpus: Corpus
    q: CooccurrenceMatrix
    fingerprint: str
    timings: dict


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def prepare(cfg: RunConfig) -> PreparedCorpus:
    """Load, preprocess and build Q, reusing cached stages keyed by content hash."""
    timings = {}
    t0 = time.perf_counter()
    raw = corpus_mod.load_uci_files(cfg.corpus, cfg.vocab)
    timings["load"] = time.perf_counter() - t0

    pcfg = cfg.preprocess_config()
    key = hashlib.sha256(json.dumps([raw.fingerprint(), pcfg.to_dict()], sort_keys=True).encode()).hexdigest()[:16]
    cache_dir = os.path.join(cfg.cache or os.path.join(cfg.out, "cache"), key)
    q_path = os.path.join(cache_dir, "q.bin")
    docword = os.path.join(cache_dir, "docword.pre.txt")

    t0 = time.perf_counter()
    if os.path.exists(docword):
        corpus = corpus_mod.load_uci_files(docword, os.path.join(cache_dir, "vocab.pre.txt"))
    else:
        corpus = corpus_mod.preprocess(raw, pcfg)
        corpus_mod.save_preprocessed(corpus, raw, pcfg, cache_dir, "pre")
    timings["preprocess"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if os.path.exists(q_path):
        q = CooccurrenceMatrix(read_matrix(q_path))
    else:
        q = build_q(corpus, n_jobs=cfg.jobs)
        write_matrix(q_path, q.q, {"kind": "Q", "corpus_fingerprint": corpus.fingerprint(),
                                   "preprocess": pcfg.to_dict()})
    timings["build_q"] = time.perf_counter() - t0
    logger.info("corpus: %d docs, %d words after preprocessing", corpus.n_docs, corpus.n_words)
    return PreparedCorpus(corpus, q, corpus.fingerprint(), timings)


def select_anchors(method, q: CooccurrenceMatrix, k, seed, cfg: RunConfig, graph=None, qprime=None) -> AnchorSet:
    if method == "sc":
        graph = graph if graph is not None else to_similarity_graph(q)
        return soft_clique(graph, SoftCliqueParams(k, cfg.max_iter, cfg.num_starts, seed))
    qprime = qprime if qprime is not None else row_normalize(q)
    return fast_anchor_words(qprime, FawParams(k, cfg.proj_dim, seed))


def run_seed(prep: PreparedCorpus, cfg: RunConfig, seed: int, graph=None, qprime=None) -> dict:
    out_dir = os.path.join(cfg.out, f"seed-{seed}")
    os.makedirs(out_dir, exist_ok=True)
    vocab = prep.corpus.vocab
    timings = {}
    t0 = time.perf_counter()
    anchors = select_anchors(cfg.method, prep.q, cfg.k, seed, cfg, graph, qprime)
    timings["anchors"] = time.perf_counter() - t0
    _write_text(os.path.join(out_dir, "anchors.json"), anchors.to_json(vocab))

    t0 = time.perf_counter()
    model = recover_topics(prep.q, anchors, cfg.eg_params(), vocab)
    timings["recover"] = time.perf_counter() - t0
    model.save(os.path.join(out_dir, "topics.bin"), {"eg": asdict(cfg.eg_params())})

    t0 = time.perf_counter()
    reports = [average_coherence(model, prep.corpus, CoherenceParams(h, cfg.epsilon)) for h in cfg.h_values]
    timings["coherence"] = time.perf_counter() - t0
    for rep in reports:
        _write_text(os.path.join(out_dir, f"coherence-h{rep.h}.tsv"), rep.to_tsv(vocab))
    _write_text(os.path.join(out_dir, "coherence.json"), coherence_summary(reports))
    return {"seed": seed, "status": "ok", "timings": timings,
            "anchors": list(anchors.indices), "anchor_words": [vocab[i] for i in anchors.indices],
            "nonconverged_rows": len(model.coefficients.nonconverged_rows),
            "coherence": {str(r.h): r.average for r in reports}}


def run_pipeline(cfg: RunConfig) -> dict:
    os.makedirs(cfg.out, exist_ok=True)
    prep = prepare(cfg)
    graph = to_similarity_graph(prep.q) if cfg.method == "sc" else None
    qprime = row_normalize(prep.q) if cfg.method == "faw" else None

    def one(seed):
        try:
            return run_seed(prep, cfg, seed, graph, qprime)
        except Exception as exc:  # a failing seed must not stop the others
            logger.exception("seed %s failed", seed)
            return {"seed": seed, "status": "error", "error": f"{type(exc).__name__}: {exc}"}

    if cfg.parallel and len(cfg.seeds) > 1:
        with ThreadPoolExecutor(max_workers=min(len(cfg.seeds), os.cpu_count() or 1)) as pool:
            runs = list(pool.map(one, cfg.seeds))
    else:
        runs = [one(s) for s in cfg.seeds]

    ok = [r for r in runs if r["status"] == "ok"]
    mean = {str(h): statistics.fmean(r["coherence"][str(h)] for r in ok) if ok else None for h in cfg.h_values}
    manifest = {
        "config": asdict(cfg),
        "config_hash": cfg.digest(),
        "corpus_fingerprint": prep.fingerprint,
        "corpus": {"n_docs": prep.corpus.n_docs, "n_words": prep.corpus.n_words},
        "stage_seconds": prep.timings,
        "runs": runs,
        "mean_coherence": mean,
    }
    _write_json(os.path.join(cfg.out, "manifest.json"), manifest)
    return manifest


def run_synthetic(v: int, k: int, seeds, cfg: RunConfig) -> dict:
    """Pipeline on exactly separable instances; checks anchor and topic recovery."""
    os.makedirs(cfg.out, exist_ok=True)
    runs = []
    for seed in seeds:
        model, q = generate_synthetic(v, k, seed)
        anchors = select_anchors(cfg.method, q, k, seed, cfg)
        topics = recover_topics(q, anchors, cfg.eg_params())
        exact = sorted(anchors.indices) == list(range(k))
        err = None
        if exact:
            order = [anchors.indices.index(i) for i in range(k)]
            err = float(np.abs(topics.a[:, order] - model.a_true).sum(axis=0).max())
        runs.append({"seed": seed, "anchors": list(anchors.indices), "exact_anchors": exact,
                     "max_column_l1_error": err})
    report = {"v": v, "k": k, "method": cfg.method, "runs": runs,
              "all_exact": all(r["exact_anchors"] for r in runs)}
    _write_json(os.path.join(cfg.out, "synthetic.json"), report)
    return report


def k_sweep(start=10, stop=100, step=10):
    return list(range(start, stop + 1, step))


def run_benchmark(cfg: RunConfig, ks=None, methods=METHODS) -> list[dict]:
    """Time anchor selection alone for each K, method and seed."""
    os.makedirs(cfg.out, exist_ok=True)
    prep = prepare(cfg)
    graph = to_similarity_graph(prep.q)
    qprime = row_normalize(prep.q)
    rows = []
    for k in ks or k_sweep():
        for method in methods:
            for seed in cfg.seeds:
                t0 = time.perf_counter()
                select_anchors(method, prep.q, k, seed, cfg, graph, qprime)
                ms = (time.perf_counter() - t0) * 1e3
                rows.append({"K": k, "method": method, "seed": seed, "milliseconds": ms})
    with open(os.path.join(cfg.out, "timings.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["K", "method", "seed", "milliseconds"])
        w.writeheader()
        w.writerows(rows)
    _write_json(os.path.join(cfg.out, "timing_summary.json"), summarize_timings(rows))
    return rows


def summarize_timings(rows) -> dict:
    out = {}
    for (k, method), grp in itertools.groupby(sorted(rows, key=lambda r: (r["K"], r["method"])),
                                              key=lambda r: (r["K"], r["method"])):
        out.setdefault(str(k), {})[method] = statistics.median(r["milliseconds"] for r in grp)
    return out


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    return len(a & b) / len(a | b) if a | b else 1.0


def run_explore(cfg: RunConfig, rounds: int, seeds=None, top_n: int = 10) -> dict:
    """Run SoftClique under many seeds and compare the distinct anchor sets found."""
    if cfg.method != "sc":
        raise ValueError("exploration is defined for the sc method only")
    os.makedirs(cfg.out, exist_ok=True)
    prep = prepare(cfg)
    graph = to_similarity_graph(prep.q)
    seeds = list(seeds) if seeds is not None else list(range(cfg.seeds[0], cfg.seeds[0] + rounds))
    vocab = prep.corpus.vocab

    groups: dict = {}
    for seed in seeds:
        found = select_anchors("sc", prep.q, cfg.k, seed, cfg, graph=graph)
        key = tuple(sorted(found.indices))
        groups.setdefault(key, {"anchors": found, "seeds": []})["seeds"].append(seed)

    sets = []
    for key, grp in groups.items():
        anchors = grp["anchors"]
        model = recover_topics(prep.q, anchors, cfg.eg_params(), vocab)
        coh = {str(h): average_coherence(model, prep.corpus, CoherenceParams(h, cfg.epsilon)).average
               for h in cfg.h_values}
        tops = average_coherence(model, prep.corpus, CoherenceParams(top_n, cfg.epsilon)).top_words
        sets.append({
            "anchors": list(anchors.indices),
            "anchor_words": [vocab[i] for i in anchors.indices],
            "seeds": grp["seeds"],
            "total_weight": anchors.total_weight,
            "coherence": coh,
            "top_words": [[vocab[w] for w in t] for t in tops],
        })
    overlap = [[jaccard(a["anchors"], b["anchors"]) for b in sets] for a in sets]
    per_round = [[jaccard(groups_key_for(groups, s1), groups_key_for(groups, s2)) for s2 in seeds] for s1 in seeds]
    report = {"k": cfg.k, "rounds": len(seeds), "distinct_sets": len(sets), "sets": sets,
              "jaccard": overlap, "round_jaccard": per_round}
    _write_json(os.path.join(cfg.out, "explore.json"), report)
    return report


def groups_key_for(groups, seed):
    for key, grp in groups.items():
        if seed in grp["seeds"]:
            return key
    raise KeyError(seed)
