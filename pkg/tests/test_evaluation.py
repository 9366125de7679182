import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from anchor_topics.evaluation import (CoherenceError, CoherenceParams, CoherenceReport,
                                      average_coherence, coherence_summary, count_cooccurrence,
                                      top_words, topic_coherence)

from test_corpus import corpora, make_corpus

EPS = 1e-8


def toy_corpus():
    # a b c d  -> 0 1 2 3
    docs = [{0: 1, 1: 2}, {0: 1, 1: 1, 2: 3}, {0: 4}, {2: 1, 3: 1}, {1: 1, 2: 2}]
    return make_corpus(docs, ["a", "b", "c", "d"])


def brute_pairs(docs, i, j):
    return sum(1 for d in docs if i in d and j in d)


# count_cooccurrence

def test_count_trivial_cases():
    c = make_corpus([{0: 1}, {1: 1}, {0: 2, 1: 1}], ["x", "y"])
    counts = count_cooccurrence(c, {0, 1})
    assert counts.pair(0, 1) == 1
    never = count_cooccurrence(make_corpus([{0: 1}, {1: 1}], ["x", "y"]), {0, 1})
    assert never.pair(0, 1) == 0
    every = count_cooccurrence(make_corpus([{0: 3, 1: 1}] * 4, ["x", "y"]), {0, 1})
    assert every.pair(1, 0) == 4


def test_count_matches_per_document_sets():
    rng = np.random.default_rng(4)
    docs = [{int(w): int(rng.integers(1, 5)) for w in rng.choice(8, size=rng.integers(1, 6), replace=False)}
            for _ in range(10)]
    c = make_corpus(docs, [f"w{i}" for i in range(8)])
    counts = count_cooccurrence(c, range(8))
    for i in range(8):
        for j in range(8):
            assert counts.pair(i, j) == brute_pairs(docs, i, j)
        assert counts.word_counts[i] == brute_pairs(docs, i, i)


@given(corpora(max_docs=20), st.data())
@settings(max_examples=40, deadline=None)
def test_count_restriction_agrees_with_full(c, data):
    subset = data.draw(st.sets(st.integers(0, c.n_words - 1), min_size=1))
    full = count_cooccurrence(c, range(c.n_words))
    part = count_cooccurrence(c, subset)
    for i in subset:
        for j in subset:
            assert part.pair(i, j) == full.pair(i, j)


def test_count_bad_index():
    with pytest.raises(IndexError):
        count_cooccurrence(toy_corpus(), {7})


# topic_coherence

def test_single_word_scores_zero():
    counts = count_cooccurrence(toy_corpus(), {0})
    assert topic_coherence(counts, [0]) == 0.0


def test_two_words_single_term():
    # Num(w2, w1) = 1, Num(w1) = 2
    c = make_corpus([{0: 1, 1: 1}, {0: 2}, {1: 1}], ["w1", "w2"])
    score = topic_coherence(count_cooccurrence(c, {0, 1}), [0, 1])
    assert score == pytest.approx(math.log(0.5 + 5e-9), abs=1e-12)
    assert score == pytest.approx(-0.693147, abs=1e-6)


def test_three_words_hand_expansion():
    c = toy_corpus()
    # df: a=3, b=3, d=1; a&b in 2 docs, d never with a or b
    expected = (math.log((2 + EPS) / 3)   # (b | a)
                + math.log((0 + EPS) / 3)  # (d | a)
                + math.log((0 + EPS) / 3))  # (d | b)
    score = topic_coherence(count_cooccurrence(c, {0, 1, 3}), [0, 1, 3], CoherenceParams(3, EPS))
    assert abs(score - expected) < 1e-9
    assert score == pytest.approx(-39.44405117, abs=1e-7)


def test_order_defines_conditioning_word():
    c = toy_corpus()
    counts = count_cooccurrence(c, {0, 3})
    # denominator is the earlier word's document frequency
    assert topic_coherence(counts, [0, 3]) == pytest.approx(math.log(EPS / 3))
    assert topic_coherence(counts, [3, 0]) == pytest.approx(math.log(EPS / 1))


def test_zero_frequency_word_is_an_error():
    c = make_corpus([{0: 2}], ["a", "b"])
    with pytest.raises(CoherenceError):
        topic_coherence(count_cooccurrence(c, {0, 1}), [0, 1])


def test_params_validation():
    with pytest.raises(ValueError):
        CoherenceParams(h=0)
    with pytest.raises(ValueError):
        CoherenceParams(epsilon=0)


@given(corpora(max_docs=20), st.data())
@settings(max_examples=60, deadline=None)
def test_coherence_upper_bound(c, data):
    present = [w for w in range(c.n_words) if c.counts[:, w].nnz]
    words = data.draw(st.permutations(present))[:data.draw(st.integers(1, max(1, len(present))))]
    h = len(words)
    score = topic_coherence(count_cooccurrence(c, words), words, CoherenceParams(h, EPS))
    assert score <= h * (h - 1) / 2 * math.log(1 + EPS) + 1e-12


# top_words

def test_top_words_examples():
    a = np.zeros((5, 2))
    a[3, 0] = 1.0
    a[:, 1] = 0.2
    assert top_words(a, 0, 1) == [3]
    assert top_words(a, 1, 2) == [0, 1]


@pytest.mark.parametrize("seed", range(5))
def test_top_words_matches_sort(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, size=(30, 3)).astype(float)  # plenty of ties
    for k in range(3):
        oracle = sorted(range(30), key=lambda w: (-a[w, k], w))[:7]
        assert top_words(a, k, 7) == oracle


# average_coherence

def test_average_single_topic():
    c = toy_corpus()
    a = np.array([[0.5], [0.3], [0.15], [0.05]])
    rep = average_coherence(a, c, CoherenceParams(3, EPS))
    assert rep.per_topic[0] == rep.average
    assert rep.top_words == [[0, 1, 2]]


def test_average_two_topics_by_hand():
    c = toy_corpus()
    a = np.array([[0.6, 0.0], [0.4, 0.1], [0.0, 0.7], [0.0, 0.2]])
    # topic 0: [a, b]; topic 1: [c, d]
    t0 = math.log((2 + EPS) / 3)
    t1 = math.log((1 + EPS) / 3)
    rep = average_coherence(a, c, CoherenceParams(2, EPS))
    np.testing.assert_allclose(rep.per_topic, [t0, t1], rtol=0, atol=1e-9)
    assert abs(rep.average - (t0 + t1) / 2) < 1e-9
    assert abs(rep.average - np.mean(rep.per_topic)) <= 1e-12


def test_report_outputs():
    rep = CoherenceReport([-1.5, -2.5], -2.0, 2, [[0, 1], [2, 3]])
    tsv = rep.to_tsv(["a", "b", "c", "d"]).splitlines()
    assert tsv[0] == "topic\tscore\ttop_words"
    assert tsv[2] == "1\t-2.5\tc d"
    summary = json.loads(coherence_summary([rep, CoherenceReport([0.0], 0.0, 5)]))
    assert set(summary) == {"2", "5"} and summary["2"]["average"] == -2.0
