"""Smooth unconstrained minimization: L-BFGS or gradient descent, Armijo backtracking."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

QUASI_NEWTON = "quasi-newton"
GRADIENT_DESCENT = "gradient-descent"


class OptimizationError(RuntimeError):
    """Non-finite objective or gradient; ``point`` is the last valid iterate."""

    def __init__(self, message, point):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 1000
    gradient_tolerance: float = 1e-6
    method: str = QUASI_NEWTON
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    memory: int = 10

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.gradient_tolerance > 0:
            raise ValueError("gradient_tolerance must be positive")
        if self.method not in (QUASI_NEWTON, GRADIENT_DESCENT):
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.armijo_c1 < 1 or not 0 < self.backtrack < 1:
            raise ValueError("line-search constants must lie in (0, 1)")
        if self.memory < 1:
            raise ValueError("memory must be at least 1")


@dataclass
class OptimizerTrace:
    iterations: int = 0
    objective_values: list = field(default_factory=list)
    final_gradient_norm: float = float("nan")
    converged: bool = False
    message: str = ""

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "objective_values": list(self.objective_values),
            "final_gradient_norm": self.final_gradient_norm,
            "converged": self.converged,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["iterations"]),
            [float(v) for v in d["objective_values"]],
            float(d["final_gradient_norm"]),
            bool(d["converged"]),
            str(d.get("message", "")),
        )


def _two_loop(g, pairs):
    q = g.copy()
    stack = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        q -= a * y
        stack.append(a)
    s, y, _ = pairs[-1]
    q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(stack)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def minimize(objective, gradient, start, config=None):
    """Minimize ``objective`` from ``start``; returns ``(x, OptimizerTrace)``.

    Every accepted step satisfies the Armijo condition, so recorded objective
    values never increase. Curvature pairs with ``s.y <= 1e-10 |s||y|`` are
    dropped to keep the inverse-Hessian approximation positive definite.
    Hitting ``max_iterations`` is reported through ``converged=False``.
    """
    cfg = config or OptimizerConfig()
    x = np.array(start, dtype=float)
    f = float(objective(x))
    g = np.asarray(gradient(x), dtype=float)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError("objective or gradient not finite at the starting point", x)

    trace = OptimizerTrace(objective_values=[f])
    pairs = deque(maxlen=cfg.memory)
    gd_step = 1.0
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0

    for it in range(cfg.max_iterations):
        if gnorm <= cfg.gradient_tolerance:
            trace.converged = True
            trace.message = "gradient tolerance reached"
            break

        if cfg.method == QUASI_NEWTON and pairs:
            d = _two_loop(g, pairs)
            slope = float(g @ d)
            if not slope < 0:
                pairs.clear()
                d, slope = -g, -float(g @ g)
            t = 1.0
        else:
            d = -g
            slope = -float(g @ g)
            if cfg.method == QUASI_NEWTON:
                t = min(1.0, 1.0 / gnorm)
            else:
                t = gd_step

        accepted = False
        while t * np.max(np.abs(d)) > 1e-16 * max(1.0, float(np.max(np.abs(x)))):
            x_new = x + t * d
            f_new = float(objective(x_new))
            # NaN fails this comparison and triggers backtracking
            if f_new <= f + cfg.armijo_c1 * t * slope:
                accepted = True
                break
            t *= cfg.backtrack
        if not accepted:
            if pairs:
                pairs.clear()
                continue
            trace.message = "line search could not decrease the objective"
            break

        g_new = np.asarray(gradient(x_new), dtype=float)
        if not np.all(np.isfinite(g_new)):
            raise OptimizationError("gradient not finite at an accepted point", x)
        s = x_new - x
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            pairs.append((s, yv, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.max(np.abs(g)))
        gd_step = t * 2.0
        trace.objective_values.append(f)
        trace.iterations = it + 1
    else:
        trace.converged = gnorm <= cfg.gradient_tolerance
        trace.message = (
            "gradient tolerance reached" if trace.converged else "maximum iterations reached"
        )

    trace.final_gradient_norm = gnorm
    return x, trace
