import numpy as np
import pytest
from scipy.stats import unitary_group

from qcorr.states import physicality_check

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Record a one-line acceptance verdict, printed in the terminal summary."""

    def _record(label: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def random_physical_coeffs(rng, n, scale=1.0):
    out = []
    while len(out) < n:
        c = rng.uniform(-scale, scale, 3)
        if physicality_check(c).min() >= 0:
            out.append(c)
    return out


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_local_unitary(rng):
    return np.kron(unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
