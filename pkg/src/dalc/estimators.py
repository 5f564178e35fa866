"""Empirical estimates of disagreement, joint error, Gibbs and vote risk, and beta_q.

Estimates are means over a sample (the objective uses sums). Each estimator
accepts either a trained :class:`~dalc.model.DalcModel` or a raw weight
vector ``w`` of a linear classifier.
"""

import math
from dataclasses import dataclass

import numpy as np

from .losses import phi, phi_dis, phi_err
from .model import DalcModel


@dataclass(frozen=True)
class EmpiricalEstimates:
    disagreement: float
    joint_error: float | None
    gibbs_risk: float | None
    vote_risk: float | None
    sample_size: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class DivergenceEstimate:
    q: float
    beta_q: float
    eta: float
    mc_samples: int
    lower_bound_only: bool  # q = inf: the max over draws only bounds the sup from below

    def to_dict(self):
        return dict(self.__dict__)


def _margins(model_or_w, sample):
    if len(sample) == 0:
        raise ValueError("empty sample")
    if isinstance(model_or_w, DalcModel):
        return model_or_w.normalized_margins(sample.X)
    w = np.asarray(model_or_w, dtype=float).ravel()
    if w.shape[0] != sample.dim:
        raise ValueError(f"dimension mismatch: weights {w.shape[0]} vs data {sample.dim}")
    return np.asarray(sample.X @ w).ravel() / sample.norms


def _signed_margins(model_or_w, sample):
    if not sample.labeled:
        raise ValueError("sample must be labeled")
    return sample.labels * _margins(model_or_w, sample)


def empirical_disagreement(model_or_w, sample):
    return float(np.mean(phi_dis(_margins(model_or_w, sample))))


def empirical_joint_error(model_or_w, sample):
    return float(np.mean(phi_err(_signed_margins(model_or_w, sample))))


def empirical_gibbs_risk(model_or_w, sample):
    return float(np.mean(phi(_signed_margins(model_or_w, sample))))


def empirical_vote_risk(model_or_w, sample):
    """Zero-one error of the sign classifier (sgn(0) = +1)."""
    if not sample.labeled:
        raise ValueError("sample must be labeled")
    pred = np.where(_margins(model_or_w, sample) >= 0, 1.0, -1.0)
    return float(np.mean(pred != sample.labels))


def empirical_domain_disagreement(model_or_w, source, target):
    return abs(empirical_disagreement(model_or_w, source) - empirical_disagreement(model_or_w, target))


def estimate_all(model_or_w, sample):
    """All estimates on one sample; label-dependent fields are None if unlabeled."""
    dis = empirical_disagreement(model_or_w, sample)
    if not sample.labeled:
        return EmpiricalEstimates(dis, None, None, None, len(sample))
    return EmpiricalEstimates(
        dis,
        empirical_joint_error(model_or_w, sample),
        empirical_gibbs_risk(model_or_w, sample),
        empirical_vote_risk(model_or_w, sample),
        len(sample),
    )


def capped_eta(eta=0.0, outside_mass=None):
    """Validate a user-supplied eta; it cannot exceed the target mass outside the source support."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if outside_mass is not None:
        if not 0.0 <= outside_mass <= 1.0:
            raise ValueError("outside_mass must lie in [0, 1]")
        eta = min(eta, outside_mass)
    return eta


def beta_q_monte_carlo(ratio, sampler, q, n, seed=0, eta=0.0, outside_mass=None):
    """Monte-Carlo estimate of ``[E_source (P_T / P_S)^q]^(1/q)``.

    ``sampler(n, rng)`` returns ``(X, y)`` drawn from the source domain and
    ``ratio(X, y)`` the density ratio at those points. For ``q = inf`` the
    result is the largest ratio among the draws.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not (q > 0):
        raise ValueError("q must be positive (or inf)")
    rng = np.random.Generator(np.random.PCG64(seed))
    X, y = sampler(n, rng)
    r = np.asarray(ratio(X, y), dtype=float).ravel()
    if np.any(r < 0):
        raise ValueError("density ratio must be nonnegative")
    if not np.all(np.isfinite(r)):
        raise ValueError("density ratio must be finite on sampled points")
    if math.isinf(q):
        beta = float(r.max())
    else:
        beta = float(np.mean(r**q) ** (1.0 / q))
    return DivergenceEstimate(q, beta, capped_eta(eta, outside_mass), n, math.isinf(q))
