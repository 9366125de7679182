"""LDA-sampled bag-of-words corpora for tests."""
import numpy as np
import scipy.sparse as sp

from anchor_topics.corpus import Corpus


def sample_lda_corpus(n_docs, n_words, n_topics, mean_length, seed, alpha=0.1, beta=0.05):
    rng = np.random.default_rng(seed)
    # Zipf-like background popularity shapes the topic-word distributions.
    popularity = 1.0 / np.arange(1, n_words + 1) ** 0.8
    topics = rng.dirichlet(beta * np.ones(n_words) + 20 * popularity / popularity.sum(), size=n_topics)
    rows, cols, vals = [], [], []
    for d in range(n_docs):
        theta = rng.dirichlet(alpha * np.ones(n_topics))
        n = max(2, rng.poisson(mean_length))
        counts = rng.multinomial(n, theta @ topics)
        idx = np.flatnonzero(counts)
        rows.extend([d] * idx.size)
        cols.extend(idx.tolist())
        vals.extend(counts[idx].tolist())
    x = sp.csr_matrix((vals, (rows, cols)), shape=(n_docs, n_words))
    vocab = tuple(f"w{i:05d}" for i in range(n_words))
    return Corpus(x, vocab), topics
