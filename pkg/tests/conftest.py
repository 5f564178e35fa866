import numpy as np
import pytest

from dalc.data import SOURCE, TARGET, Dataset


def random_instance(rng, d, m_s, m_t, shift=0.5, flip=0.1):
    """Labeled source / unlabeled target drawn around a random linear rule."""
    w_true = rng.normal(size=d)
    Xs = rng.normal(size=(m_s, d))
    ys = np.where(Xs @ w_true >= 0, 1.0, -1.0)
    ys[rng.random(m_s) < flip] *= -1
    Xt = rng.normal(size=(m_t, d)) + shift * rng.normal(size=d)
    return Dataset(Xs, ys, SOURCE), Dataset(Xt, None, TARGET)


def central_difference(f, x, h=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
