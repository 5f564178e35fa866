import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc

from conftest import random_instance
from dalc.data import Dataset, DiscreteDomainPair, GaussianShiftPair
from dalc.estimators import (
    beta_q_monte_carlo,
    capped_eta,
    empirical_disagreement,
    empirical_domain_disagreement,
    empirical_gibbs_risk,
    empirical_joint_error,
    empirical_vote_risk,
    estimate_all,
)
from dalc.model import train


def _tail(x):
    return 0.5 * erfc(x / math.sqrt(2))


def _loop_margins(w, sample):
    return [float(np.dot(w, x) / np.linalg.norm(x)) for x in sample.dense()]


def test_zero_weights():
    src = Dataset(np.array([[1.0, 2.0], [-1.0, 0.5], [0.3, -2.0]]), np.array([1.0, -1.0, 1.0]))
    w = np.zeros(2)
    assert empirical_disagreement(w, src) == 0.5
    assert empirical_joint_error(w, src) == 0.25
    assert empirical_gibbs_risk(w, src) == 0.5
    assert empirical_domain_disagreement(w, src, src.unlabeled()) == 0.0


def test_large_margin_limits():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    # normalized margin 20 on every point
    w = np.array([20.0, 20.0])
    s = Dataset(X, np.array([1.0, 1.0]))
    assert empirical_disagreement(w, s) <= 1e-12
    assert empirical_joint_error(w, s) <= 1e-12


def test_against_loop_oracle(rng):
    for _ in range(5):
        src, tgt = random_instance(rng, d=6, m_s=15, m_t=12)
        w = rng.normal(size=6)
        ms = _loop_margins(w, src)
        mt = _loop_margins(w, tgt)
        sm = [y * m for y, m in zip(src.labels, ms)]
        dis_t = sum(2 * _tail(m) * _tail(-m) for m in mt) / len(mt)
        dis_s = sum(2 * _tail(m) * _tail(-m) for m in ms) / len(ms)
        joint = sum(_tail(m) ** 2 for m in sm) / len(sm)
        gibbs = sum(_tail(m) for m in sm) / len(sm)
        vote = sum((1.0 if m >= 0 else -1.0) != y for m, y in zip(ms, src.labels)) / len(ms)
        assert empirical_disagreement(w, tgt) == pytest.approx(dis_t, rel=1e-12)
        assert empirical_joint_error(w, src) == pytest.approx(joint, rel=1e-12)
        assert empirical_gibbs_risk(w, src) == pytest.approx(gibbs, rel=1e-12)
        assert empirical_vote_risk(w, src) == vote
        assert empirical_domain_disagreement(w, src, tgt) == pytest.approx(abs(dis_s - dis_t), abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 30.0))
def test_gibbs_decomposition_identity(seed, scale):
    rng = np.random.default_rng(seed)
    src, _ = random_instance(rng, d=4, m_s=20, m_t=5)
    w = scale * rng.normal(size=4)
    est = estimate_all(w, src)
    assert abs(est.gibbs_risk - (0.5 * est.disagreement + est.joint_error)) <= 1e-10
    assert 0 < est.disagreement <= 0.5
    assert 0 < est.gibbs_risk < 1


def test_estimates_accept_trained_model(rng):
    src, tgt = random_instance(rng, d=3, m_s=20, m_t=20)
    model = train(src, tgt)
    w = model.support.T @ model.weights
    assert empirical_disagreement(model, tgt) == pytest.approx(empirical_disagreement(w, tgt), rel=1e-10)
    assert empirical_gibbs_risk(model, src) == pytest.approx(empirical_gibbs_risk(w, src), rel=1e-10)


def test_unlabeled_estimates_leave_label_fields_empty(rng):
    _, tgt = random_instance(rng, d=3, m_s=5, m_t=5)
    est = estimate_all(np.ones(3), tgt)
    assert est.joint_error is None and est.gibbs_risk is None and est.vote_risk is None


def test_estimator_errors(rng):
    src, tgt = random_instance(rng, d=3, m_s=5, m_t=5)
    with pytest.raises(ValueError):
        empirical_joint_error(np.ones(3), tgt)
    with pytest.raises(ValueError):
        empirical_disagreement(np.ones(3), src.subset([]))
    with pytest.raises(ValueError):
        empirical_disagreement(np.ones(4), src)


def test_beta_ratio_one_is_exactly_one():
    sampler = lambda n, rng: (rng.normal(size=(n, 2)), np.ones(n))
    for q in (0.5, 1, 2, 7.5, math.inf):
        for n in (1, 10, 1000):
            est = beta_q_monte_carlo(lambda X, y: np.ones(len(X)), sampler, q, n)
            assert est.beta_q == 1.0


def test_beta_two_atom_closed_forms():
    pair = DiscreteDomainPair((0.5, 0.5), (0.25, 0.75))
    assert pair.beta(2) == pytest.approx(math.sqrt(1.25), abs=1e-15)
    assert pair.beta(math.inf) == 1.5
    e2 = beta_q_monte_carlo(pair.ratio, pair.sample_source, 2, 100_000, seed=0)
    einf = beta_q_monte_carlo(pair.ratio, pair.sample_source, math.inf, 100_000, seed=0)
    assert abs(e2.beta_q - math.sqrt(1.25)) <= 1e-2
    assert abs(einf.beta_q - 1.5) <= 1e-2
    assert einf.lower_bound_only and not e2.lower_bound_only


def test_beta_monotone_in_q():
    pair = DiscreteDomainPair((0.5, 0.5), (0.25, 0.75))
    qs = (1, 2, 4, math.inf)
    exact = [pair.beta(q) for q in qs]
    mc = [beta_q_monte_carlo(pair.ratio, pair.sample_source, q, 20_000, seed=3).beta_q for q in qs]
    assert exact[0] == pytest.approx(1.0)
    assert all(a <= b for a, b in zip(exact, exact[1:]))
    # same seed, same draws: Lyapunov holds for the empirical measure too
    assert all(a <= b + 1e-15 for a, b in zip(mc, mc[1:]))


def test_beta_gaussian_shift():
    pair = GaussianShiftPair((0.0, 0.0), (0.3, 0.0))
    est = beta_q_monte_carlo(pair.ratio, pair.sample_source, 2, 200_000, seed=1)
    assert est.beta_q == pytest.approx(pair.beta(2), rel=1e-2)


def test_beta_errors_and_eta():
    sampler = lambda n, rng: (np.zeros((n, 1)), np.ones(n))
    with pytest.raises(ValueError):
        beta_q_monte_carlo(lambda X, y: -np.ones(len(X)), sampler, 2, 5)
    with pytest.raises(ValueError):
        beta_q_monte_carlo(lambda X, y: np.ones(len(X)), sampler, 2, 0)
    with pytest.raises(ValueError):
        capped_eta(1.5)
    assert capped_eta(0.3, outside_mass=0.1) == 0.1
    assert beta_q_monte_carlo(lambda X, y: np.ones(len(X)), sampler, 2, 5, eta=0.2).eta == 0.2


def test_beta_deterministic_per_seed():
    pair = DiscreteDomainPair((0.2, 0.3, 0.5), (0.4, 0.4, 0.2))
    a = beta_q_monte_carlo(pair.ratio, pair.sample_source, 3, 1000, seed=9)
    b = beta_q_monte_carlo(pair.ratio, pair.sample_source, 3, 1000, seed=9)
    assert a == b
