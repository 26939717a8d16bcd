import numpy as np
import pytest

from fjmids import fixtures
from fjmids.model import validate_model


@pytest.fixture
def fj4():
    """Four-agent network with Lambda = I - diag W and C = I."""
    return fixtures.four_agent(fixtures.C_I2)


@pytest.fixture
def fj4_pos():
    return fixtures.four_agent(fixtures.C_POS)


@pytest.fixture
def fj4_neg():
    return fixtures.four_agent(fixtures.C_NEG)


def random_stochastic(rng, n, density=0.6, self_loops=True):
    """Random row-stochastic matrix with a random zero pattern."""
    mask = rng.random((n, n)) < density
    if self_loops:
        np.fill_diagonal(mask, True)
    for i in range(n):
        if not mask[i].any():
            mask[i, rng.integers(n)] = True
    W = np.where(mask, rng.uniform(0.05, 1.0, (n, n)), 0.0)
    return W / W.sum(axis=1, keepdims=True)


def random_model(rng, n=None, m=None, C=None, stubborn_frac=0.5, oblivious=0):
    """Random validated model; the last ``oblivious`` agents form a closed DeGroot block."""
    n = n or int(rng.integers(1, 9))
    m = m or int(rng.integers(1, 5))
    W = random_stochastic(rng, n)
    lam = np.where(rng.random(n) < stubborn_frac, rng.uniform(0, 1, n), 1.0)
    oblivious = min(oblivious, n)
    if oblivious:
        k = n - oblivious
        W[k:, :k] = 0.0
        W[k:, k:] = random_stochastic(rng, oblivious)
        lam[k:] = 1.0
        if k:
            lam[0] = min(lam[0], 0.5)
    if C is None:
        C = rng.uniform(-1, 1, (m, m))
    u = rng.uniform(-1, 1, n * m)
    return validate_model(W, lam, C, u)


def scale_to_radius(C, target):
    rho = np.max(np.abs(np.linalg.eigvals(C)))
    return C * (target / rho) if rho > 0 else C


_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Register the outcome of one acceptance criterion for the end-of-run summary."""

    def _record(key: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE[key] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (int(k.rstrip('abcdefg')), k)):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
