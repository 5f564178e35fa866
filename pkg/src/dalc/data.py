"""Datasets, file formats and synthetic domain-adaptation tasks.

Sparse text format (one example per line)::

    <label> <index>:<value> <index>:<value> ...

``label`` is ``+1``/``1``, ``-1`` or ``0`` (unlabeled). Indices are 1-based
and strictly ascending within a line. Blank lines and lines starting with
``#`` are ignored. Values are written with 17 significant digits by
:func:`save_sparse`, so load/save round-trips are bit-exact.

All generators draw from ``numpy.random.Generator(PCG64(seed))``; the PCG64
bit stream and numpy's ziggurat normal sampler are platform independent, so
a seed fixes a dataset exactly for a given numpy release.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

SOURCE = "source"
TARGET = "target"


class DataFormatError(ValueError):
    """Raised for malformed input files; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (dense ndarray or CSR) with optional +-1 labels.

    Zero-norm rows are rejected: every margin is divided by ``||x||``.
    """

    X: object
    labels: np.ndarray | None = None
    role: str = SOURCE
    norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = self.X
        if sparse.issparse(X):
            X = sparse.csr_matrix(X, dtype=float)
            X.sort_indices()
            sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        else:
            X = np.atleast_2d(np.asarray(X, dtype=float))
            if X.ndim != 2:
                raise ValueError("feature matrix must be 2-d")
            sq = np.einsum("ij,ij->i", X, X)
        if X.shape[0] and not np.all(np.isfinite(X.data if sparse.issparse(X) else X)):
            raise ValueError("features must be finite")
        norms = np.sqrt(sq)
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            raise ValueError(
                f"zero-norm example at row {int(bad[0])}: margins divide by ||x||, "
                "remove or perturb such examples"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "norms", norms)
        if self.labels is not None:
            y = np.asarray(self.labels, dtype=float).ravel()
            if y.shape[0] != X.shape[0]:
                raise ValueError("labels and features differ in length")
            if not np.all(np.abs(y) == 1.0):
                raise ValueError("labels must be exactly +1 or -1")
            object.__setattr__(self, "labels", y)
        if self.role not in (SOURCE, TARGET):
            raise ValueError(f"unknown role {self.role!r}")

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def is_sparse(self):
        return sparse.issparse(self.X)

    @property
    def labeled(self):
        return self.labels is not None

    def subset(self, idx):
        y = None if self.labels is None else self.labels[idx]
        return Dataset(self.X[idx], y, self.role)

    def with_labels(self, labels, role=None):
        return Dataset(self.X, labels, role or self.role)

    def unlabeled(self, role=None):
        return Dataset(self.X, None, role or self.role)

    def dense(self):
        return self.X.toarray() if self.is_sparse else self.X


def stack_features(*datasets):
    """Row-stack feature matrices (sparse if any input is sparse)."""
    mats = [d.X for d in datasets if len(d)]
    if not mats:
        raise ValueError("no examples to stack")
    if any(sparse.issparse(m) for m in mats):
        return sparse.vstack([sparse.csr_matrix(m) for m in mats], format="csr")
    return np.vstack(mats)


# ---------------------------------------------------------------- file formats


def _parse_label(tok, lineno):
    try:
        v = float(tok)
    except ValueError:
        raise DataFormatError(f"bad label {tok!r}", lineno) from None
    if v not in (-1.0, 0.0, 1.0):
        raise DataFormatError(f"label must be +1, -1 or 0, got {tok!r}", lineno)
    return v


def load_sparse(path, dim=None, role=SOURCE):
    """Read the sparse text format into a CSR-backed :class:`Dataset`.

    Label ``0`` marks an unlabeled example; a file must be either fully
    labeled or fully unlabeled. ``dim`` overrides the inferred dimension
    (the largest index seen).
    """
    indptr, indices, values, labels = [0], [], [], []
    max_idx = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            labels.append(_parse_label(toks[0], lineno))
            prev = 0
            for tok in toks[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise DataFormatError(f"expected index:value, got {tok!r}", lineno)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise DataFormatError(f"bad feature {tok!r}", lineno) from None
                if idx < 1:
                    raise DataFormatError(f"indices are 1-based, got {idx}", lineno)
                if idx == prev:
                    raise DataFormatError(f"duplicate index {idx}", lineno)
                if idx < prev:
                    raise DataFormatError(f"indices not ascending ({prev} then {idx})", lineno)
                if not math.isfinite(val):
                    raise DataFormatError(f"non-finite value {val_s!r}", lineno)
                prev = idx
                indices.append(idx - 1)
                values.append(val)
            max_idx = max(max_idx, prev)
            indptr.append(len(indices))
    if not labels:
        raise DataFormatError(f"{path}: no examples")
    if dim is None:
        dim = max_idx
    elif dim < max_idx:
        raise DataFormatError(f"index {max_idx} exceeds declared dimension {dim}")
    X = sparse.csr_matrix(
        (np.asarray(values, float), np.asarray(indices, np.int64), np.asarray(indptr, np.int64)),
        shape=(len(labels), dim),
    )
    y = np.asarray(labels)
    if np.all(y == 0):
        y = None
    elif np.any(y == 0):
        raise DataFormatError(f"{path}: mixes labeled and unlabeled (label 0) examples")
    return Dataset(X, y, role)


def save_sparse(dataset, path):
    X = sparse.csr_matrix(dataset.X)
    with open(path, "w") as fh:
        for i in range(X.shape[0]):
            lab = "0" if dataset.labels is None else ("+1" if dataset.labels[i] > 0 else "-1")
            start, stop = X.indptr[i], X.indptr[i + 1]
            feats = " ".join(
                f"{j + 1}:{v:.17g}" for j, v in zip(X.indices[start:stop], X.data[start:stop])
            )
            fh.write(f"{lab} {feats}\n" if feats else f"{lab}\n")


def load_csv(path, label_column=None, role=SOURCE):
    """Dense CSV with a header row. ``label_column`` (name) holds +-1 labels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if label_column is not None and label_column not in header:
        raise DataFormatError(f"label column {label_column!r} not in header", 1)
    lab_pos = header.index(label_column) if label_column is not None else None
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(f"expected {len(header)} cells, got {len(row)}", lineno)
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise DataFormatError("non-numeric cell", lineno) from None
        if lab_pos is not None:
            labels.append(nums.pop(lab_pos))
        feats.append(nums)
    if not feats:
        raise DataFormatError(f"{path}: no data rows")
    y = None
    if lab_pos is not None:
        y = np.asarray(labels)
        if np.all(y == 0):
            y = None
    return Dataset(np.asarray(feats), y, role)


def save_csv(dataset, path, label_column="label"):
    X = dataset.dense()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        head = [f"x{j + 1}" for j in range(X.shape[1])]
        w.writerow(head + ([label_column] if dataset.labeled else []))
        for i, row in enumerate(X):
            cells = [f"{v:.17g}" for v in row]
            if dataset.labeled:
                cells.append(f"{int(dataset.labels[i]):d}")
            w.writerow(cells)


def load_dataset(path, role=SOURCE, label_column="label", dim=None):
    """Dispatch on extension: ``.csv`` is dense CSV, anything else sparse text."""
    if str(path).lower().endswith(".csv"):
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), [])
        col = label_column if label_column in [h.strip() for h in header] else None
        return load_csv(path, col, role)
    return load_sparse(path, dim=dim, role=role)


# ------------------------------------------------------------------ moons task


@dataclass
class MoonsConfig:
    n_per_domain: int = 300
    noise: float = 0.1
    rotation_degrees: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_per_domain < 2:
            raise ValueError("n_per_domain must be at least 2")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")


def _moons(n, noise, rng):
    n_pos = n // 2
    n_neg = n - n_pos
    t_pos = rng.uniform(0.0, math.pi, n_pos)
    t_neg = rng.uniform(0.0, math.pi, n_neg)
    upper = np.column_stack([np.cos(t_pos), np.sin(t_pos)])
    lower = np.column_stack([1.0 - np.cos(t_neg), 0.5 - np.sin(t_neg)])
    X = np.vstack([upper, lower])
    y = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
    if noise > 0:
        X = X + rng.normal(scale=noise, size=X.shape)
    return X, y


def rotate(X, degrees, center=None):
    theta = math.radians(degrees)
    R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    c = X.mean(axis=0) if center is None else np.asarray(center, float)
    return (X - c) @ R.T + c


def make_moons(config):
    """Two interleaving half-circles per domain; the target pair is rotated.

    Class +1 lies on the upper unit half-circle centred at the origin, class
    -1 on the lower half-circle centred at (1, 0.5). The target is an
    independent draw rotated by ``config.rotation_degrees`` about its own
    centroid. Returns ``(source, target, target_labels)``; the target labels
    are for evaluation only.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    Xs, ys = _moons(config.n_per_domain, config.noise, rng)
    Xt, yt = _moons(config.n_per_domain, config.noise, rng)
    Xt = rotate(Xt, config.rotation_degrees)
    return Dataset(Xs, ys, SOURCE), Dataset(Xt, None, TARGET), yt


# ------------------------------------------------------- sparse shifted task


@dataclass
class SparseShiftConfig:
    """Bag-of-words style task whose label vocabulary shifts between domains.

    Each domain expresses the label through a shared vocabulary block and a
    domain-specific block; background words are common to both domains.
    """

    dim: int = 5000
    n_source: int = 500
    n_target: int = 500
    shared_words: int = 100
    specific_words: int = 200
    words_per_doc: int = 40
    shared_fraction_source: float = 0.1
    shared_fraction_target: float = 0.1
    specific_fraction: float = 0.5
    label_purity: float = 0.8
    seed: int = 0


def _docs(n, rng, cfg, shared_frac, specific_offset):
    bg_start = cfg.shared_words + 2 * cfg.specific_words
    n_bg = cfg.dim - bg_start
    y = np.where(np.arange(n) < n // 2, 1.0, -1.0)
    rng.shuffle(y)
    half_shared = cfg.shared_words // 2
    half_spec = cfg.specific_words // 2
    rows, cols, vals = [], [], []
    for i in range(n):
        counts = {}
        for _ in range(cfg.words_per_doc):
            u = rng.random()
            # a label word agrees with y with prob label_purity
            sgn = y[i] if rng.random() < cfg.label_purity else -y[i]
            half = 0 if sgn > 0 else 1
            if u < shared_frac:
                j = half * half_shared + rng.integers(half_shared)
            elif u < shared_frac + cfg.specific_fraction:
                j = specific_offset + half * half_spec + rng.integers(half_spec)
            else:
                j = bg_start + rng.integers(n_bg)
            counts[int(j)] = counts.get(int(j), 0) + 1
        for j in sorted(counts):
            rows.append(i)
            cols.append(j)
            vals.append(math.log1p(counts[j]))
    X = sparse.csr_matrix((vals, (rows, cols)), shape=(n, cfg.dim))
    return X, y


def make_sparse_shift(config):
    """Returns ``(source, target, target_labels)`` as CSR-backed datasets."""
    cfg = config
    if cfg.shared_words + 2 * cfg.specific_words >= cfg.dim:
        raise ValueError("vocabulary blocks exceed dimension")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    Xs, ys = _docs(cfg.n_source, rng, cfg, cfg.shared_fraction_source, cfg.shared_words)
    Xt, yt = _docs(
        cfg.n_target, rng, cfg, cfg.shared_fraction_target, cfg.shared_words + cfg.specific_words
    )
    return Dataset(Xs, ys, SOURCE), Dataset(Xt, None, TARGET), yt


# --------------------------------------------------- domains with known ratio


@dataclass(frozen=True)
class DiscreteDomainPair:
    """Source and target distributions over a finite set of labeled atoms.

    Atom ``k`` is the point ``(k + 1,)`` with label ``+1`` for even ``k`` and
    ``-1`` otherwise; only the probabilities matter for the divergence.
    """

    source_probs: tuple
    target_probs: tuple

    def __post_init__(self):
        s = np.asarray(self.source_probs, float)
        t = np.asarray(self.target_probs, float)
        if s.shape != t.shape or s.ndim != 1 or s.size == 0:
            raise ValueError("probability vectors must be 1-d and of equal length")
        for p in (s, t):
            if np.any(p < 0) or not math.isclose(p.sum(), 1.0, abs_tol=1e-12):
                raise ValueError("probabilities must be nonnegative and sum to 1")
        if np.any((s == 0) & (t > 0)):
            raise ValueError("target mass outside the source support is not representable")

    def ratio(self, X, y=None):
        s = np.asarray(self.source_probs, float)
        t = np.asarray(self.target_probs, float)
        k = np.asarray(X, float).reshape(len(X), -1)[:, 0].astype(int) - 1
        return t[k] / s[k]

    def sample_source(self, n, rng):
        s = np.asarray(self.source_probs, float)
        k = rng.choice(s.size, size=n, p=s)
        X = (k + 1).astype(float)[:, None]
        y = np.where(k % 2 == 0, 1.0, -1.0)
        return X, y

    def beta(self, q):
        """Closed form of the q-divergence (q = inf gives the max ratio)."""
        s = np.asarray(self.source_probs, float)
        t = np.asarray(self.target_probs, float)
        m = s > 0
        r = t[m] / s[m]
        if math.isinf(q):
            return float(r.max())
        return float(np.sum(s[m] * r**q) ** (1.0 / q))


@dataclass(frozen=True)
class GaussianShiftPair:
    """Covariate shift between N(mu_s, I) and N(mu_t, I) with a shared labeler.

    The density ratio depends on ``x`` only; the q-divergence has the closed
    form ``exp((q - 1) ||mu_t - mu_s||^2 / 2)`` and is unbounded for q = inf.
    """

    source_mean: tuple
    target_mean: tuple

    def ratio(self, X, y=None):
        X = np.asarray(X, float)
        ms = np.asarray(self.source_mean, float)
        mt = np.asarray(self.target_mean, float)
        log_r = X @ (mt - ms) - 0.5 * (mt @ mt - ms @ ms)
        return np.exp(log_r)

    def sample_source(self, n, rng):
        ms = np.asarray(self.source_mean, float)
        X = ms + rng.normal(size=(n, ms.size))
        y = np.where(X[:, 0] >= 0, 1.0, -1.0)
        return X, y

    def beta(self, q):
        if math.isinf(q):
            return math.inf
        diff = np.asarray(self.target_mean, float) - np.asarray(self.source_mean, float)
        return math.exp(0.5 * (q - 1.0) * float(diff @ diff))


def export_decision_grid(model, bounds, resolution, path):
    """Write ``x1,x2,value`` rows of ``model.decision_function`` on a lattice.

    ``bounds`` is ``(x1_min, x1_max, x2_min, x2_max)``.
    """
    if model.dim != 2:
        raise ValueError(f"decision grid needs a 2-d model, got dimension {model.dim}")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    x1_min, x1_max, x2_min, x2_max = bounds
    g1 = np.linspace(x1_min, x1_max, resolution)
    g2 = np.linspace(x2_min, x2_max, resolution)
    A, B = np.meshgrid(g1, g2, indexing="ij")
    pts = np.column_stack([A.ravel(), B.ravel()])
    vals = model.decision_function(pts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "value"])
        for (a, b), v in zip(pts, vals):
            w.writerow([f"{a:.17g}", f"{b:.17g}", f"{v:.17g}"])
    return pts, vals
