"""Thermal and Bell-diagonal two-qubit states."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import qmat
from .errors import DomainError

DEFAULT_EPSILON = 7.35e-3
PHYSICALITY_TOL = 1e-12
# Frobenius tolerance for treating a matrix as Bell-diagonal
BELL_TOL = 0.05 * DEFAULT_EPSILON


class BellCoeffs(NamedTuple):
    """Correlation coefficients of ``(1/4)(1 + sum_i c_i sigma_i x sigma_i)``."""

    c1: float
    c2: float
    c3: float


class BellFit(NamedTuple):
    coeffs: BellCoeffs
    residual: float
    is_bell_diagonal: bool


def physicality_check(c) -> np.ndarray:
    """Bell-basis eigenvalues of the state with coefficients ``c``.

    The state is physical iff all four are non-negative.
    """
    c1, c2, c3 = c
    return np.array(
        [
            (1 - c1 - c2 - c3) / 4,
            (1 - c1 + c2 + c3) / 4,
            (1 + c1 - c2 + c3) / 4,
            (1 + c1 + c2 - c3) / 4,
        ]
    )


def require_physical(c) -> BellCoeffs:
    c = BellCoeffs(*map(float, c))
    lam = physicality_check(c)
    if lam.min() < -PHYSICALITY_TOL:
        raise DomainError(f"coefficients {tuple(c)} are unphysical: Bell eigenvalue {lam.min():.6g}")
    return c


def bell_diagonal_to_density(c) -> np.ndarray:
    c1, c2, c3 = require_physical(c)
    rho = np.zeros((4, 4), dtype=complex)
    rho[np.diag_indices(4)] = np.array([1 + c3, 1 - c3, 1 - c3, 1 + c3]) / 4
    rho[0, 3] = rho[3, 0] = (c1 - c2) / 4
    rho[1, 2] = rho[2, 1] = (c1 + c2) / 4
    return rho


def coeffs_from_density(rho, tol: float = BELL_TOL) -> BellFit:
    """Read ``c_i = Tr[rho sigma_i x sigma_i]`` and measure how Bell-diagonal ``rho`` is.

    ``residual`` is the Frobenius distance between ``rho`` and the Bell-diagonal
    state built from the extracted coefficients.
    """
    r = qmat.pauli_expansion(rho)
    c = BellCoeffs(float(r[1, 1]), float(r[2, 2]), float(r[3, 3]))
    # built directly: a non-Bell-diagonal rho may project onto unphysical c
    proj = qmat.from_pauli(np.diag([1.0, *c]))
    residual = float(np.linalg.norm(np.asarray(rho) - proj))
    return BellFit(c, residual, residual <= tol)


def thermal_state(epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """High-temperature equilibrium state ``1/4 - epsilon sigma_z x 1``."""
    if not 0.0 <= epsilon < 0.25:
        raise DomainError(f"polarization epsilon={epsilon} outside [0, 1/4)")
    return np.diag([0.25 - epsilon, 0.25 - epsilon, 0.25 + epsilon, 0.25 + epsilon]).astype(complex)


def deviation(rho, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Deviation matrix ``(rho - 1/4) / epsilon``."""
    return (np.asarray(rho, dtype=complex) - np.eye(4) / 4) / epsilon


def from_deviation(dev, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    return np.eye(4) / 4 + epsilon * np.asarray(dev, dtype=complex)
