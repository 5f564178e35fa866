"""Linear and RBF kernels over dense or CSR feature matrices."""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .data import stack_features

LINEAR = "linear"
RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    family: str = LINEAR
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in (LINEAR, RBF):
            raise ValueError(f"unknown kernel family {self.family!r} (expected 'linear' or 'rbf')")
        if self.family == RBF and not self.gamma > 0:
            raise ValueError("rbf kernel needs gamma > 0")

    def to_dict(self):
        d = {"family": self.family}
        if self.family == RBF:
            d["gamma"] = self.gamma
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], float(d.get("gamma", 1.0)))


def _as_vector(x):
    if sparse.issparse(x):
        return np.asarray(x.todense()).ravel()
    return np.asarray(x, dtype=float).ravel()


def kernel_eval(spec, x, x2):
    x, x2 = _as_vector(x), _as_vector(x2)
    if x.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {x2.shape[0]}")
    if spec.family == LINEAR:
        return float(x @ x2)
    diff = x - x2
    return float(np.exp(-spec.gamma * (diff @ diff)))


def _sq_norms(A):
    if sparse.issparse(A):
        return np.asarray(A.multiply(A).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", A, A)


def _dot(A, B):
    out = A @ B.T
    return out.toarray() if sparse.issparse(out) else np.asarray(out)


def cross_kernel(spec, A, B):
    """Kernel matrix ``k(A_i, B_j)`` between the rows of two feature matrices."""
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    G = _dot(A, B)
    if spec.family == LINEAR:
        return G
    sq = _sq_norms(A)[:, None] + _sq_norms(B)[None, :] - 2.0 * G
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


def gram(spec, source, target):
    """Gram matrix over source examples followed by target examples."""
    if len(source) + len(target) == 0:
        raise ValueError("empty combined sample")
    if len(source) and len(target) and source.dim != target.dim:
        raise ValueError(f"dimension mismatch: source {source.dim} vs target {target.dim}")
    X = stack_features(source, target)
    K = cross_kernel(spec, X, X)
    K = 0.5 * (K + K.T)
    if spec.family == RBF:
        np.fill_diagonal(K, 1.0)
    return K
