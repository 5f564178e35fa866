"""Numerical evaluation of the domain-adaptation risk bounds.

Notation: ``d_hat`` is the empirical target disagreement, ``e_hat`` the
empirical source joint error, ``kl`` the posterior/prior KL divergence
(``||w||^2 / 2`` for a linear classifier, ``alpha' K alpha / 2`` in the dual),
``b`` and ``c`` the free constants of the Catoni-style bounds.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np


def catoni_factor(c, simple=False):
    """``c / (1 - exp(-c))``, or the looser ``1 / (1 - c/2)`` for c in (0, 2)."""
    if not c > 0:
        raise ValueError("c must be positive")
    if simple:
        if not c < 2:
            raise ValueError("the simplified factor needs c in (0, 2)")
        return 1.0 / (1.0 - 0.5 * c)
    return c / -math.expm1(-c)


def _check_delta(delta):
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")


def catoni_bound(empirical_mean, kl, m, c, delta, kl_multiplier=1, simple=False):
    """Upper bound on an expected loss from its empirical mean over ``m`` examples.

    ``kl_multiplier`` is 1 for a single-voter loss and 2 for paired-voter
    losses (disagreement, joint error), whose posterior lives on voter pairs.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if kl < 0:
        raise ValueError("kl must be nonnegative")
    _check_delta(delta)
    factor = catoni_factor(c, simple)
    return factor * (empirical_mean + (kl_multiplier * kl + math.log(1.0 / delta)) / (m * c))


def da_bound_ideal(d_T, e_S, beta_q, q, eta):
    """Target Gibbs risk bound ``d_T / 2 + beta_q * e_S^(1 - 1/q) + eta`` (true quantities).

    ``q = inf`` uses exponent 1 and ``beta_q`` is then the sup ratio.
    """
    for name, v in (("d_T", d_T), ("e_S", e_S), ("eta", eta)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    if not q > 0:
        raise ValueError("q must be positive (or inf)")
    if beta_q < 0:
        raise ValueError("beta_q must be nonnegative")
    expo = 1.0 if math.isinf(q) else 1.0 - 1.0 / q
    if e_S == 0.0 and expo < 0:
        joint = math.inf
    else:
        joint = e_S**expo
    return 0.5 * d_T + beta_q * joint + eta


@dataclass(frozen=True)
class BoundInputs:
    d_hat: float
    e_hat: float
    kl: float
    m_s: int
    m_t: int
    b: float = 1.0
    c: float = 1.0
    delta: float = 0.05
    beta_inf: float = 1.0
    eta: float = 0.0
    q: float | None = None
    beta_q: float | None = None
    source_gibbs: float | None = None

    def __post_init__(self):
        for name in ("d_hat", "e_hat", "eta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.source_gibbs is not None and not 0.0 <= self.source_gibbs <= 1.0:
            raise ValueError("source_gibbs must lie in [0, 1]")
        if self.kl < 0:
            raise ValueError("kl must be nonnegative")
        if self.m_s < 1 or self.m_t < 1:
            raise ValueError("sample sizes must be at least 1")
        if not self.b > 0 or not self.c > 0:
            raise ValueError("b and c must be positive")
        _check_delta(self.delta)
        if not self.beta_inf >= 0:
            raise ValueError("beta_inf must be nonnegative")
        if (self.q is None) != (self.beta_q is None):
            raise ValueError("q and beta_q go together")


@dataclass(frozen=True)
class BoundReport:
    inputs: BoundInputs
    b_prime: float
    c_prime: float
    ideal_bound: float
    source_gibbs_bound: float | None
    disagreement_bound: float
    joint_error_bound: float
    target_gibbs_bound: float
    target_vote_bound: float
    simple: bool = False

    def to_dict(self):
        d = asdict(self)
        d["inputs"] = asdict(self.inputs)
        return d


def da_generalization_bound(inputs, simple=False):
    """Evaluate every bound for one set of inputs.

    ``target_gibbs_bound`` bounds the target Gibbs risk and ``target_vote_bound``
    the target risk of the linear (majority-vote) classifier; the latter is
    exactly twice the former. ``ideal_bound`` plugs the empirical estimates
    into the population-level bound, so it is a diagnostic, not a guarantee.
    ``source_gibbs_bound`` needs ``inputs.source_gibbs`` and uses ``c``.
    """
    p = inputs
    c_prime = catoni_factor(p.c, simple)
    b_prime = catoni_factor(p.b, simple) * p.beta_inf
    log_term = math.log(2.0 / p.delta)
    complexity = c_prime / (p.m_t * p.c) + b_prime / (p.m_s * p.b)

    target_gibbs = c_prime * 0.5 * p.d_hat + b_prime * p.e_hat + p.eta + complexity * (2.0 * p.kl + log_term)
    # ||w||^2 = 2 KL
    w_sq = 2.0 * p.kl
    target_vote = c_prime * p.d_hat + 2.0 * b_prime * p.e_hat + 2.0 * p.eta + 2.0 * complexity * (w_sq + log_term)

    if p.q is None:
        ideal = da_bound_ideal(p.d_hat, p.e_hat, p.beta_inf, math.inf, p.eta)
    else:
        ideal = da_bound_ideal(p.d_hat, p.e_hat, p.beta_q, p.q, p.eta)
    source_gibbs_value = None
    if p.source_gibbs is not None:
        source_gibbs_value = catoni_bound(p.source_gibbs, p.kl, p.m_s, p.c, p.delta, 1, simple)

    return BoundReport(
        inputs=p,
        b_prime=b_prime,
        c_prime=c_prime,
        ideal_bound=ideal,
        source_gibbs_bound=source_gibbs_value,
        disagreement_bound=catoni_bound(p.d_hat, p.kl, p.m_t, p.c, p.delta, 2, simple),
        joint_error_bound=catoni_bound(p.e_hat, p.kl, p.m_s, p.b, p.delta, 2, simple),
        target_gibbs_bound=target_gibbs,
        target_vote_bound=target_vote,
        simple=simple,
    )


def sweep_bc(inputs, b_values, c_values, simple=False):
    """Evaluate the bounds over a (b, c) grid and pick the smallest vote-risk bound.

    No union-bound correction is made for the grid: the reported minimum
    holds with probability ``1 - delta`` only for (b, c) fixed in advance.
    """
    b_values = [float(v) for v in b_values]
    c_values = [float(v) for v in c_values]
    if not b_values or not c_values:
        raise ValueError("sweep grids must be nonempty")
    vote = np.empty((len(b_values), len(c_values)))
    gibbs = np.empty_like(vote)
    for i, b in enumerate(b_values):
        for j, c in enumerate(c_values):
            fields = {**asdict(inputs), "b": b, "c": c}
            r = da_generalization_bound(BoundInputs(**fields), simple)
            vote[i, j] = r.target_vote_bound
            gibbs[i, j] = r.target_gibbs_bound
    i, j = np.unravel_index(int(np.argmin(vote)), vote.shape)
    return {
        "b_values": b_values,
        "c_values": c_values,
        "target_gibbs": gibbs.tolist(),
        "target_vote": vote.tolist(),
        "best": {"b": b_values[i], "c": c_values[j], "target_vote": float(vote[i, j]),
                 "target_gibbs": float(gibbs[i, j])},
        "union_bound_correction": False,
    }
