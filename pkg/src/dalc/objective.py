"""The DALC training objective, in primal and kernelized (dual) form.

Primal, for a weight vector ``w``::

    C * sum_target phi_dis(w.x / ||x||) + B * sum_source phi_err(y w.x / ||x||) + ||w||^2

Dual, for weights ``alpha`` over the source-then-target training points with
Gram matrix ``K`` (margins ``(K alpha)_i / sqrt(K_ii)``)::

    C * sum_target phi_dis(.) + B * sum_source phi_err(y .) + alpha' K alpha

Losses enter as sums, not means; ``B`` and ``C`` absorb the sample sizes.
"""

from dataclasses import dataclass

import numpy as np

from .losses import d_phi_dis, d_phi_err, phi_dis, phi_err


@dataclass(frozen=True)
class DalcHyperparams:
    """Weights of the source joint error (``B``) and target disagreement (``C``).

    ``C = 0`` is accepted: it gives the source-only baseline.
    """

    B: float = 1.0
    C: float = 1.0

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError("B must be positive")
        if not self.C >= 0:
            raise ValueError("C must be nonnegative")


def _margins(X, norms, w):
    if X.shape[0] == 0:
        return np.zeros(0)
    if X.shape[1] != w.shape[0]:
        raise ValueError(f"dimension mismatch: data {X.shape[1]} vs weights {w.shape[0]}")
    return np.asarray(X @ w).ravel() / norms


def primal_objective(w, source, target, hp):
    w = np.asarray(w, dtype=float)
    ms = _margins(source.X, source.norms, w) if len(source) else np.zeros(0)
    mt = _margins(target.X, target.norms, w) if len(target) else np.zeros(0)
    total = 0.0
    if len(target):
        total += hp.C * float(np.sum(phi_dis(mt)))
    if len(source):
        total += hp.B * float(np.sum(phi_err(source.labels * ms)))
    return total + float(w @ w)


def primal_gradient(w, source, target, hp):
    w = np.asarray(w, dtype=float)
    grad = 2.0 * w
    if len(target):
        mt = _margins(target.X, target.norms, w)
        coef = hp.C * d_phi_dis(mt) / target.norms
        grad = grad + np.asarray(target.X.T @ coef).ravel()
    if len(source):
        y = source.labels
        ms = _margins(source.X, source.norms, w)
        coef = hp.B * y * d_phi_err(y * ms) / source.norms
        grad = grad + np.asarray(source.X.T @ coef).ravel()
    return grad


def _check_dual(K, source_labels, m_s, m_t):
    K = np.asarray(K, dtype=float)
    M = m_s + m_t
    if K.shape != (M, M):
        raise ValueError(f"Gram matrix shape {K.shape} does not match m_s + m_t = {M}")
    diag = np.diag(K)
    if np.any(diag <= 0):
        i = int(np.flatnonzero(diag <= 0)[0])
        raise ValueError(f"degenerate support point {i}: K_ii = {diag[i]} <= 0")
    y = np.asarray(source_labels, dtype=float).ravel()
    if y.shape[0] != m_s:
        raise ValueError("source_labels length differs from m_s")
    return K, np.sqrt(diag), y


def dual_objective_from_scores(alpha, Kalpha, sqrt_diag, y, m_s, hp):
    """Dual objective given precomputed ``K @ alpha`` (shared with the gradient)."""
    u = Kalpha / sqrt_diag
    total = 0.0
    if u.shape[0] > m_s:
        total += hp.C * float(np.sum(phi_dis(u[m_s:])))
    if m_s:
        total += hp.B * float(np.sum(phi_err(y * u[:m_s])))
    return total + float(alpha @ Kalpha)


def dual_gradient_from_scores(alpha, Kalpha, K, sqrt_diag, y, m_s, hp):
    u = Kalpha / sqrt_diag
    g = np.empty_like(u)
    g[:m_s] = hp.B * y * d_phi_err(y * u[:m_s])
    g[m_s:] = hp.C * d_phi_dis(u[m_s:])
    # K symmetric: d/dalpha of f(K alpha) is K grad_u, plus 2 K alpha for the quadratic form
    return K @ (g / sqrt_diag) + 2.0 * Kalpha


def dual_objective(alpha, K, source_labels, m_s, m_t, hp):
    K, sd, y = _check_dual(K, source_labels, m_s, m_t)
    alpha = np.asarray(alpha, dtype=float)
    return dual_objective_from_scores(alpha, K @ alpha, sd, y, m_s, hp)


def dual_gradient(alpha, K, source_labels, m_s, m_t, hp):
    K, sd, y = _check_dual(K, source_labels, m_s, m_t)
    alpha = np.asarray(alpha, dtype=float)
    return dual_gradient_from_scores(alpha, K @ alpha, K, sd, y, m_s, hp)


class DualProblem:
    """Dual objective bound to one Gram matrix, caching ``K @ alpha``.

    The optimizer calls the objective and gradient at the same points, so
    the cache halves the matrix-vector work.
    """

    def __init__(self, K, source_labels, m_s, m_t, hp):
        self.K, self.sqrt_diag, self.y = _check_dual(K, source_labels, m_s, m_t)
        self.m_s, self.m_t, self.hp = m_s, m_t, hp
        self._key = None
        self._Ka = None

    def _scores(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if self._key is None or not np.array_equal(alpha, self._key):
            self._key = alpha.copy()
            self._Ka = self.K @ alpha
        return alpha, self._Ka

    def objective(self, alpha):
        alpha, Ka = self._scores(alpha)
        return dual_objective_from_scores(alpha, Ka, self.sqrt_diag, self.y, self.m_s, self.hp)

    def gradient(self, alpha):
        alpha, Ka = self._scores(alpha)
        return dual_gradient_from_scores(
            alpha, Ka, self.K, self.sqrt_diag, self.y, self.m_s, self.hp
        )
