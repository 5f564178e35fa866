"""Hyperparameter selection by reverse cross-validation.

For each fold of the labeled source sample:

1. train DALC forward on the other folds (labeled) and the target (unlabeled);
2. label the target sample with the forward model;
3. train DALC in reverse, with the self-labeled target as source and the
   training folds' features as unlabeled target;
4. score the reverse model's zero-one error on the held-out fold.

The fold scores are averaged. Folds whose training part holds a single class
are skipped with a warning.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import SOURCE, TARGET
from .model import train
from .objective import DalcHyperparams

log = logging.getLogger(__name__)


class DegenerateFoldWarning(UserWarning):
    pass


def parse_range(text):
    """``"lo:hi:n"`` -> ``n`` log-spaced values from ``lo`` to ``hi``."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ValueError(f"expected lo:hi:n, got {text!r}") from None
    if lo <= 0 or hi <= 0 or n < 1:
        raise ValueError(f"range {text!r} needs positive bounds and n >= 1")
    if n == 1:
        return [lo]
    return np.logspace(np.log10(lo), np.log10(hi), n).tolist()


@dataclass(frozen=True)
class GridSpec:
    c_values: list = field(default_factory=lambda: np.logspace(-2, 6, 20).tolist())
    b_values: list = field(default_factory=lambda: np.logspace(0, 8, 20).tolist())

    def __post_init__(self):
        if not self.c_values or not self.b_values:
            raise ValueError("grid lists must be nonempty")
        if any(v <= 0 for v in list(self.c_values) + list(self.b_values)):
            raise ValueError("grid values must be positive")

    @classmethod
    def log_grid(cls, n_c, n_b):
        """``n_c`` x ``n_b`` log grid over C in [0.01, 1e6] and B in [1, 1e8]."""
        return cls(np.logspace(-2, 6, n_c).tolist(), np.logspace(0, 8, n_b).tolist())


@dataclass
class ReverseValidationReport:
    c_values: list
    b_values: list
    risks: np.ndarray  # shape (len(c_values), len(b_values))
    selected: DalcHyperparams
    folds: int
    seed: int

    def to_dict(self):
        return {
            "c_values": list(self.c_values),
            "b_values": list(self.b_values),
            "risks": self.risks.tolist(),
            "selected": {"B": self.selected.B, "C": self.selected.C},
            "folds": self.folds,
            "seed": self.seed,
        }


def fold_indices(n, folds, seed):
    """Seeded partition of ``range(n)`` into ``folds`` nearly equal parts."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError(f"source sample of size {n} cannot be split into {folds} folds")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def reverse_validation_risk(
    source, target, kernel, hp, folds=5, seed=0, opt=None, trainer=train
):
    """Mean reverse-model error over held-out source folds.

    ``trainer(source, target, kernel, hp, opt)`` fits a model; it defaults to
    DALC and is replaceable for testing.
    """
    if not source.labeled:
        raise ValueError("source sample must be labeled")
    parts = fold_indices(len(source), folds, seed)
    scores = []
    for k, held in enumerate(parts):
        keep = np.setdiff1d(np.arange(len(source)), held)
        fit_part = source.subset(keep)
        if np.unique(fit_part.labels).size < 2:
            warnings.warn(f"fold {k}: training part has a single class; skipped",
                          DegenerateFoldWarning, stacklevel=2)
            continue
        forward = trainer(fit_part, target, kernel, hp, opt)
        self_labels = forward.predict(target.X).astype(float)
        reverse = trainer(
            target.with_labels(self_labels, SOURCE),
            fit_part.unlabeled(TARGET),
            kernel,
            hp,
            opt,
        )
        held_out = source.subset(held)
        scores.append(float(np.mean(reverse.predict(held_out.X) != held_out.labels)))
    if not scores:
        raise ValueError("every fold was degenerate (single-class training part)")
    return float(np.mean(scores))


def select_cell(risks, c_values, b_values):
    """Argmin of the risk matrix; ties go to the smallest B, then the smallest C."""
    best = None
    for j in np.argsort(b_values, kind="stable"):
        for i in np.argsort(c_values, kind="stable"):
            if best is None or risks[i, j] < risks[best]:
                best = (i, j)
    i, j = best
    return DalcHyperparams(B=float(b_values[j]), C=float(c_values[i]))


def grid_search(source, target, kernel, grid=None, folds=5, seed=0, opt=None, n_jobs=1,
                trainer=train):
    """Reverse-validation risk for every (C, B) cell and the selected cell."""
    grid = grid or GridSpec()
    cells = [(i, j) for i in range(len(grid.c_values)) for j in range(len(grid.b_values))]

    def run(cell):
        i, j = cell
        hp = DalcHyperparams(B=grid.b_values[j], C=grid.c_values[i])
        risk = reverse_validation_risk(source, target, kernel, hp, folds, seed, opt, trainer)
        log.debug("C=%g B=%g risk=%.4f", hp.C, hp.B, risk)
        return risk

    if n_jobs == 1:
        values = [run(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(run, cells))
    risks = np.empty((len(grid.c_values), len(grid.b_values)))
    for (i, j), v in zip(cells, values):
        risks[i, j] = v
    selected = select_cell(risks, grid.c_values, grid.b_values)
    return ReverseValidationReport(
        list(grid.c_values), list(grid.b_values), risks, selected, folds, seed
    )
