"""DALC training, prediction and JSON model files.

Model file (``format: "dalc-model"``, ``version: 1``)::

    {"format", "version", "form": "primal" | "dual",
     "hyperparams": {"B", "C"}, "m_s", "m_t", "dim",
     "kernel": {"family", ["gamma"]},
     "weights": [...],                       # w (primal) or alpha (dual)
     "support": {"kind": "dense", "rows": [[...], ...]}
              | {"kind": "csr", "shape", "indptr", "indices", "data"},   # dual only
     "trace": {...}}

Floats are written with Python's shortest round-trip repr (at most 17
significant digits), so a load restores every weight bit for bit.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .data import Dataset, stack_features
from .kernels import LINEAR, KernelSpec, cross_kernel, gram
from .objective import DalcHyperparams, DualProblem, primal_gradient, primal_objective
from .optimizer import OptimizerConfig, OptimizerTrace, minimize

FORMAT = "dalc-model"
VERSION = 1
PRIMAL = "primal"
DUAL = "dual"


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class DalcModel:
    form: str
    weights: np.ndarray
    kernel: KernelSpec
    hyperparams: DalcHyperparams
    trace: OptimizerTrace
    m_s: int
    m_t: int
    support: object = None  # source-then-target features, dual form only

    def __post_init__(self):
        if self.form not in (PRIMAL, DUAL):
            raise ValueError(f"unknown form {self.form!r}")
        w = np.asarray(self.weights, dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValueError("model weights must be finite")
        object.__setattr__(self, "weights", w)
        if self.form == DUAL:
            if self.support is None or self.support.shape[0] != self.m_s + self.m_t:
                raise ValueError("dual model needs exactly m_s + m_t support points")
            if w.shape[0] != self.m_s + self.m_t:
                raise ValueError("dual weights must have length m_s + m_t")
        elif self.kernel.family != LINEAR:
            raise ValueError("primal form requires the linear kernel")

    @property
    def dim(self):
        return self.weights.shape[0] if self.form == PRIMAL else self.support.shape[1]

    def _as_matrix(self, X):
        if isinstance(X, Dataset):
            X = X.X
        if not sparse.issparse(X):
            X = np.asarray(X, dtype=float)
            if X.ndim == 1:
                X = X[None, :]
        if X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: model {self.dim} vs data {X.shape[1]}")
        return X

    def decision_function(self, X):
        """``w.x`` (primal) or ``sum_i alpha_i k(x_i, x)`` (dual) for each row."""
        X = self._as_matrix(X)
        if self.form == PRIMAL:
            return np.asarray(X @ self.weights).ravel()
        return cross_kernel(self.kernel, X, self.support) @ self.weights

    def decision_value(self, x):
        return float(self.decision_function(x)[0])

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def normalized_margins(self, X):
        """Decision values divided by ``sqrt(k(x, x))`` (``||x||`` for linear)."""
        X = self._as_matrix(X)
        if sparse.issparse(X):
            sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        else:
            sq = np.einsum("ij,ij->i", X, X)
        if self.kernel.family == LINEAR:
            self_k = sq
        else:
            self_k = np.ones_like(sq)
        if np.any(self_k <= 0):
            raise ValueError("zero-norm example has no normalized margin")
        return self.decision_function(X) / np.sqrt(self_k)

    def kl(self):
        """Complexity term: ``||w||^2 / 2`` or ``alpha' K alpha / 2``."""
        if self.form == PRIMAL:
            return 0.5 * float(self.weights @ self.weights)
        K = cross_kernel(self.kernel, self.support, self.support)
        return 0.5 * float(self.weights @ K @ self.weights)


def _check_samples(source, target):
    if len(source) == 0 or len(target) == 0:
        raise ValueError("training needs a nonempty source and a nonempty target sample")
    if not source.labeled:
        raise ValueError("source sample must be labeled")
    if source.dim != target.dim:
        raise ValueError(f"dimension mismatch: source {source.dim} vs target {target.dim}")


def train(
    source,
    target,
    kernel=None,
    hp=None,
    opt=None,
    primal=False,
    start=None,
    gram_matrix=None,
):
    """Fit DALC on a labeled source and an unlabeled target sample.

    Dual training starts at ``alpha_i = 1/M``; primal training (linear kernel
    only) starts at ``w = 0`` unless ``start`` is given. ``gram_matrix`` lets
    callers reuse a precomputed source-then-target Gram matrix.
    """
    kernel = kernel or KernelSpec(LINEAR)
    hp = hp or DalcHyperparams()
    opt = opt or OptimizerConfig()
    _check_samples(source, target)
    m_s, m_t = len(source), len(target)

    if primal:
        if kernel.family != LINEAR:
            raise ValueError("primal training requires the linear kernel")
        w0 = np.zeros(source.dim) if start is None else np.asarray(start, float)
        w, trace = minimize(
            lambda w: primal_objective(w, source, target, hp),
            lambda w: primal_gradient(w, source, target, hp),
            w0,
            opt,
        )
        return DalcModel(PRIMAL, w, kernel, hp, trace, m_s, m_t)

    K = gram(kernel, source, target) if gram_matrix is None else gram_matrix
    problem = DualProblem(K, source.labels, m_s, m_t, hp)
    M = m_s + m_t
    a0 = np.full(M, 1.0 / M) if start is None else np.asarray(start, float)
    alpha, trace = minimize(problem.objective, problem.gradient, a0, opt)
    return DalcModel(DUAL, alpha, kernel, hp, trace, m_s, m_t, stack_features(source, target))


# ----------------------------------------------------------------- model files


def _support_to_json(S):
    if sparse.issparse(S):
        S = sparse.csr_matrix(S)
        return {
            "kind": "csr",
            "shape": list(S.shape),
            "indptr": S.indptr.tolist(),
            "indices": S.indices.tolist(),
            "data": S.data.tolist(),
        }
    return {"kind": "dense", "rows": np.asarray(S).tolist()}


def _support_from_json(d):
    if d["kind"] == "csr":
        return sparse.csr_matrix(
            (np.asarray(d["data"], float), np.asarray(d["indices"]), np.asarray(d["indptr"])),
            shape=tuple(d["shape"]),
        )
    if d["kind"] == "dense":
        return np.asarray(d["rows"], dtype=float)
    raise ModelFormatError(f"unknown support kind {d['kind']!r}")


def model_to_dict(model):
    d = {
        "format": FORMAT,
        "version": VERSION,
        "form": model.form,
        "hyperparams": {"B": model.hyperparams.B, "C": model.hyperparams.C},
        "m_s": model.m_s,
        "m_t": model.m_t,
        "dim": model.dim,
        "kernel": model.kernel.to_dict(),
        "weights": model.weights.tolist(),
        "trace": model.trace.to_dict(),
    }
    if model.form == DUAL:
        d["support"] = _support_to_json(model.support)
    return d


def model_from_dict(d):
    if d.get("format") != FORMAT:
        raise ModelFormatError(f"not a DALC model file (format={d.get('format')!r})")
    if d.get("version") != VERSION:
        raise ModelFormatError(
            f"unsupported model file version {d.get('version')!r} (this build reads {VERSION})"
        )
    try:
        support = _support_from_json(d["support"]) if d["form"] == DUAL else None
        return DalcModel(
            d["form"],
            np.asarray(d["weights"], dtype=float),
            KernelSpec.from_dict(d["kernel"]),
            DalcHyperparams(float(d["hyperparams"]["B"]), float(d["hyperparams"]["C"])),
            OptimizerTrace.from_dict(d["trace"]),
            int(d["m_s"]),
            int(d["m_t"]),
            support,
        )
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"missing or malformed field: {exc}") from exc


def save(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def load(path):
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{path}: parse error at line {exc.lineno}, column {exc.colno} (offset {exc.pos}): {exc.msg}"
        ) from exc
    if not isinstance(d, dict):
        raise ModelFormatError(f"{path}: top-level JSON value must be an object")
    return model_from_dict(d)
