import numpy as np
import pytest

from lsvgd.targets import GaussianMixture


def random_gmm(rng, k=None, dim=2):
    k = k or int(rng.integers(1, 4))
    w = rng.uniform(0.2, 1.0, size=k)
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return GaussianMixture(w, rng.normal(0, 1.5, size=(k, dim)), rng.uniform(0.3, 2.0, size=k))


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        out.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def rel_err(a, b, eps=1e-12):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), eps))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# One PASS/FAIL line per acceptance criterion, printed after the run.
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
