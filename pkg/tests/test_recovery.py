import numpy as np
import pytest

from anchor_topics.anchors import AnchorSet
from anchor_topics.cooccurrence import CooccurrenceMatrix, generate_synthetic, row_normalize
from anchor_topics.recovery import (DegenerateTopicError, EgParams, ReconstructionCoefficients,
                                    TopicModel, eg_simplex_lsq, lsq_gradient, lsq_objective,
                                    recover_a, recover_c, recover_topics)


def matched_l1(a_hat, a_true, anchors):
    order = [list(anchors).index(k) for k in range(a_true.shape[1])]
    return np.abs(a_hat[:, order] - a_true).sum(axis=0)


# eg_simplex_lsq

@pytest.mark.parametrize("j", range(4))
def test_eg_vertex_solution(j):
    b = np.random.default_rng(0).random((4, 12))
    fit = eg_simplex_lsq(b[j], b)
    np.testing.assert_allclose(fit.coef, np.eye(4)[j], atol=1e-6)


def test_eg_orthonormal_anchors():
    fit = eg_simplex_lsq([0.3, 0.7], np.eye(2))
    np.testing.assert_allclose(fit.coef, [0.3, 0.7], atol=1e-5)
    assert fit.converged


@pytest.mark.parametrize("seed", range(10))
def test_eg_recovers_convex_combination(seed):
    rng = np.random.default_rng(seed)
    b = rng.random((4, 10))
    c_star = rng.dirichlet(np.ones(4))
    fit = eg_simplex_lsq(c_star @ b, b)
    assert np.abs(fit.coef - c_star).max() < 1e-4


@pytest.mark.parametrize("seed", range(5))
def test_eg_objective_non_increasing(seed):
    rng = np.random.default_rng(seed)
    b = rng.random((5, 30))
    target = rng.random(30)
    fit = eg_simplex_lsq(target, b, record_history=True)
    h = np.array(fit.history)
    assert np.all(np.diff(h) <= 0)
    assert fit.coef.min() >= 0 and abs(fit.coef.sum() - 1) < 1e-12


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    b = rng.random((5, 9))
    t = rng.random(9)
    step = 1e-6
    for _ in range(20):
        c = rng.dirichlet(np.ones(5))
        g = lsq_gradient(c, t, b)
        fd = np.array([(lsq_objective(c + step * e, t, b) - lsq_objective(c - step * e, t, b)) / (2 * step)
                       for e in np.eye(5)])
        assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-12)) < 1e-5


def test_eg_non_finite_input():
    with pytest.raises(FloatingPointError):
        eg_simplex_lsq([np.nan, 1.0], np.eye(2))


def test_eg_reports_non_convergence():
    b = np.random.default_rng(1).random((3, 6))
    fit = eg_simplex_lsq(np.random.default_rng(2).random(6), b, EgParams(max_iter=1))
    assert not fit.converged and fit.iterations == 1
    assert abs(fit.coef.sum() - 1) < 1e-12


def test_eg_params_validation():
    for bad in (dict(step_size=0), dict(max_iter=0), dict(tol=0)):
        with pytest.raises(ValueError):
            EgParams(**bad)


# recover_c

def test_recover_c_identity():
    rows = np.random.default_rng(0).dirichlet(np.ones(3), size=3)
    coef = recover_c(rows, AnchorSet((0, 1, 2), "x"))
    np.testing.assert_allclose(coef.c, np.eye(3), atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_recover_c_synthetic_residual(seed):
    _, q = generate_synthetic(10, 3, seed)
    qp = row_normalize(q).rows
    coef = recover_c(qp, AnchorSet((0, 1, 2), "x"))
    assert np.linalg.norm(qp - coef.c @ qp[:3]) < 1e-3
    assert coef.c.min() >= 0
    np.testing.assert_allclose(coef.c.sum(axis=1), 1, atol=1e-6)
    np.testing.assert_allclose(coef.c[:3], np.eye(3), atol=1e-6)


# recover_a

def test_recover_a_identity():
    q = CooccurrenceMatrix([[1 / 3, 1 / 3], [1 / 3, 0]])
    model = recover_a(q, np.eye(2))
    np.testing.assert_allclose(model.a, np.eye(2), atol=1e-15)


def test_recover_a_hand_example():
    q = CooccurrenceMatrix([[1 / 3, 1 / 3], [1 / 3, 0]])
    model = recover_a(q, np.array([[0.5, 0.5], [1.0, 0.0]]))
    np.testing.assert_allclose(model.a, [[0.5, 1.0], [0.5, 0.0]], atol=1e-15)


def test_recover_a_scale_invariant():
    rng = np.random.default_rng(3)
    m = rng.random((6, 6))
    q = CooccurrenceMatrix(m + m.T)
    c = rng.dirichlet(np.ones(3), size=6)
    a1 = recover_a(q, c).a
    a2 = recover_a(CooccurrenceMatrix(q.q * 7.25), c).a
    np.testing.assert_allclose(a1, a2, rtol=1e-14, atol=0)


def test_recover_a_degenerate_topic():
    q = CooccurrenceMatrix(np.eye(3) / 3)
    c = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DegenerateTopicError) as err:
        recover_a(q, c)
    assert err.value.topic == 1


# recover_topics

@pytest.mark.parametrize("seed", range(5))
def test_recover_topics_synthetic(seed):
    model, q = generate_synthetic(10, 3, seed)
    topics = recover_topics(q, AnchorSet((0, 1, 2), "x"))
    assert matched_l1(topics.a, model.a_true, (0, 1, 2)).max() < 0.05
    np.testing.assert_allclose(topics.a.sum(axis=0), 1, atol=1e-9)


def test_recover_topics_identity_like():
    q = CooccurrenceMatrix(np.diag([0.5, 0.3, 0.2]))
    topics = recover_topics(q, AnchorSet((2, 0, 1), "x"))
    np.testing.assert_allclose(topics.a, np.eye(3)[:, [2, 0, 1]], atol=1e-6)


def test_topic_model_save_load(tmp_path):
    model, q = generate_synthetic(8, 2, 0)
    anchors = AnchorSet((0, 1), "fast_anchor_words", seed=3)
    topics = recover_topics(q, anchors)
    topics.save(tmp_path / "a.bin")
    again = TopicModel.load(tmp_path / "a.bin")
    assert np.array_equal(again.a, topics.a)
    assert again.anchors == anchors
    assert isinstance(topics.coefficients, ReconstructionCoefficients)
