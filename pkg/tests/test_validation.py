import numpy as np
import pytest

from dalc.data import SOURCE, TARGET, Dataset
from dalc.kernels import KernelSpec
from dalc.objective import DalcHyperparams
from dalc.validation import (
    DegenerateFoldWarning,
    GridSpec,
    fold_indices,
    grid_search,
    parse_range,
    reverse_validation_risk,
    select_cell,
)


class _Rule:
    """Stand-in model predicting ``sign * sgn(x[0])`` (or a constant)."""

    def __init__(self, sign=1, constant=None):
        self.sign, self.constant = sign, constant

    def predict(self, X):
        X = np.asarray(X)
        if self.constant is not None:
            return np.full(X.shape[0], self.constant)
        return np.where(X[:, 0] >= 0, self.sign, -self.sign)


def _line_data(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    X[:, 0] += np.where(X[:, 0] >= 0, 0.5, -0.5)
    y = np.where(X[:, 0] >= 0, 1.0, -1.0)
    return Dataset(X, y, SOURCE), Dataset(rng.normal(size=(n, 2)) + 0.1, None, TARGET)


def test_constant_forward_model_gives_negative_fraction():
    X = np.array([[1.0, 0.0], [2.0, 1.0], [-1.0, 0.5], [0.3, -2.0]])
    y = np.array([1.0, -1.0, 1.0, -1.0])
    src = Dataset(X, y)
    tgt = Dataset(np.array([[0.0, 1.0], [1.0, 1.0]]), None, TARGET)
    const = lambda *a: _Rule(constant=1)
    # leave-one-out on 4 points: each fold scores 1 iff the held-out label is -1
    risk = reverse_validation_risk(src, tgt, None, DalcHyperparams(), folds=4, trainer=const)
    assert risk == 0.5
    risk2 = reverse_validation_risk(src, tgt, None, DalcHyperparams(), folds=2, seed=1, trainer=const)
    assert risk2 == 0.5


def test_leave_one_out_on_six_points():
    X = np.array([[1.0, 0.0], [2.0, 1.0], [-1.0, 0.5], [0.3, -2.0], [-2.0, 1.0], [0.5, 0.5]])
    y = np.array([1.0, 1.0, -1.0, 1.0, -1.0, -1.0])
    src, tgt = Dataset(X, y), Dataset(X[:3], None, TARGET)
    calls = []

    def trainer(s, t, kernel, hp, opt):
        calls.append((len(s), len(t)))
        return _Rule()

    risk = reverse_validation_risk(src, tgt, None, DalcHyperparams(), folds=6, trainer=trainer)
    # the rule errs only on the last point
    assert risk == pytest.approx(1 / 6)
    # 6 folds x (forward on 5 source + 3 target, reverse on 3 target + 5 source)
    assert calls == [(5, 3), (3, 5)] * 6


def test_reverse_step_trains_on_self_labeled_target():
    src, tgt = _line_data(20)
    seen = []

    def trainer(s, t, kernel, hp, opt):
        seen.append((s.role, t.role, s.labeled, t.labeled))
        if len(seen) % 2 == 0:
            assert np.array_equal(s.labels, np.where(s.X[:, 0] >= 0, 1.0, -1.0))
        return _Rule()

    reverse_validation_risk(src, tgt, None, DalcHyperparams(), folds=2, trainer=trainer)
    assert seen[0] == (SOURCE, TARGET, True, False)
    assert seen[1] == (SOURCE, TARGET, True, False)


def test_identical_domains_separable_risk_near_zero():
    src, _ = _line_data(40, seed=2)
    risk = reverse_validation_risk(src, src.unlabeled(TARGET), KernelSpec(), DalcHyperparams(B=10.0, C=1.0))
    assert risk <= 0.05


def test_degenerate_folds():
    X = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [-1.0, 0.0]])
    src = Dataset(X, np.array([1.0, 1.0, 1.0, -1.0]))
    tgt = Dataset(X, None, TARGET)
    with pytest.warns(DegenerateFoldWarning):
        # holding out the lone -1 leaves a single-class training part
        reverse_validation_risk(src, tgt, None, DalcHyperparams(), folds=4, trainer=lambda *a: _Rule())
    one_class = Dataset(X[:3], np.ones(3))
    with pytest.raises(ValueError, match="every fold"):
        with pytest.warns(DegenerateFoldWarning):
            reverse_validation_risk(one_class, tgt, None, DalcHyperparams(), folds=3, trainer=lambda *a: _Rule())


def test_fold_partition_covers_each_point_once():
    parts = fold_indices(23, 5, seed=8)
    allidx = np.concatenate(parts)
    assert sorted(allidx.tolist()) == list(range(23))
    assert {len(p) for p in parts} <= {4, 5}
    assert all(np.array_equal(a, b) for a, b in zip(parts, fold_indices(23, 5, seed=8)))
    with pytest.raises(ValueError):
        fold_indices(3, 5, 0)
    with pytest.raises(ValueError):
        fold_indices(10, 1, 0)


def test_one_by_one_grid_selects_its_cell():
    src, tgt = _line_data(20)
    rep = grid_search(src, tgt, None, GridSpec([0.3], [7.0]), folds=2, trainer=lambda *a: _Rule())
    assert rep.selected == DalcHyperparams(B=7.0, C=0.3)
    assert rep.risks.shape == (1, 1)


def test_dominant_cell_is_selected():
    src, tgt = _line_data(30)
    grid = GridSpec([0.1, 1.0, 10.0], [1.0, 100.0])

    def trainer(s, t, kernel, hp, opt):
        return _Rule(sign=1 if (hp.B, hp.C) == (100.0, 1.0) else -1)

    rep = grid_search(src, tgt, None, grid, folds=3, trainer=trainer)
    assert rep.selected == DalcHyperparams(B=100.0, C=1.0)
    assert rep.risks[1, 1] == 0.0
    # the stub reverse model ignores the self-labels, so every other cell errs everywhere
    assert np.all(np.delete(rep.risks.ravel(), 3) == 1.0)


def test_tie_break_smallest_b_then_smallest_c():
    risks = np.array([[0.2, 0.1], [0.1, 0.1]])
    assert select_cell(risks, [1.0, 2.0], [5.0, 3.0]) == DalcHyperparams(B=3.0, C=1.0)
    risks = np.zeros((3, 3))
    assert select_cell(risks, [3.0, 1.0, 2.0], [9.0, 8.0, 7.0]) == DalcHyperparams(B=7.0, C=1.0)


def test_grid_search_deterministic_and_parallel_consistent():
    src, tgt = _line_data(30, seed=4)
    grid = GridSpec([0.1, 1.0], [1.0, 10.0])
    a = grid_search(src, tgt, KernelSpec(), grid, folds=3, seed=5)
    b = grid_search(src, tgt, KernelSpec(), grid, folds=3, seed=5)
    c = grid_search(src, tgt, KernelSpec(), grid, folds=3, seed=5, n_jobs=2)
    assert np.array_equal(a.risks, b.risks) and np.array_equal(a.risks, c.risks)
    assert a.selected == b.selected == c.selected
    assert a.to_dict()["risks"] == a.risks.tolist()


def test_grid_defaults_and_ranges():
    g = GridSpec()
    assert len(g.c_values) == 20 and len(g.b_values) == 20
    assert g.c_values[0] == pytest.approx(0.01) and g.c_values[-1] == pytest.approx(1e6)
    assert g.b_values[0] == pytest.approx(1.0) and g.b_values[-1] == pytest.approx(1e8)
    assert parse_range("0.01:1e6:5") == pytest.approx([0.01, 1.0, 100.0, 1e4, 1e6])
    assert parse_range("3:3:1") == [3.0]
    for bad in ("1:2", "0:1:3", "a:b:c"):
        with pytest.raises(ValueError):
            parse_range(bad)
    with pytest.raises(ValueError):
        GridSpec([], [1.0])
    with pytest.raises(ValueError):
        GridSpec([-1.0], [1.0])
