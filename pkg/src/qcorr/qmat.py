"""Dense two-qubit matrix core.

Basis ordering follows the four Zeeman product levels of the electron (A) and
nuclear (B) spin::

    level 1 = |e_up, n_up>      index 0
    level 2 = |e_up, n_down>    index 1
    level 3 = |e_down, n_up>    index 2
    level 4 = |e_down, n_down>  index 3

so the electron is the first tensor factor.  Selective transitions couple::

    MW2: 1 <-> 3    MW1: 2 <-> 4    RF1: 1 <-> 2    RF2: 3 <-> 4

and ``E-FLIP`` drives both electron transitions at once (sigma_x on A).
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidStateError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
EIGEN_CLIP = 1e-12

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# sigma_i (x) sigma_j, indexed [i, j]
PAULI_PRODUCTS = np.einsum("iab,jcd->ijacbd", SIGMA, SIGMA).reshape(4, 4, 4, 4)

# 0-based level pairs addressed by each channel
CHANNELS: dict[str, tuple[tuple[int, int], ...]] = {
    "MW1": ((1, 3),),
    "MW2": ((0, 2),),
    "RF1": ((0, 1),),
    "RF2": ((2, 3),),
    "E-FLIP": ((0, 2), (1, 3)),
}

SWAP = np.eye(4)[[0, 2, 1, 3]]


def validate_density(rho, dim: int | None = None) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a valid state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidStateError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > HERMITIAN_TOL:
        raise InvalidStateError(f"matrix is not Hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -POSITIVITY_TOL:
        raise InvalidStateError(f"matrix has negative eigenvalue {lam_min:.3g}")
    return rho


def spectrum(rho) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix, clipped to [0, 1]."""
    lam = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    lam = np.clip(lam, 0.0, 1.0)
    lam[lam < EIGEN_CLIP] = 0.0
    return lam


def shannon_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits, with 0 log 0 = 0.

    Examples
    --------
    >>> von_neumann_entropy(np.eye(4) / 4)
    2.0
    """
    rho = validate_density(rho)
    return shannon_bits(spectrum(rho))


def partial_trace(rho, keep: str = "A") -> np.ndarray:
    """Reduced 2x2 state of subsystem ``keep`` ("A" electron, "B" nucleus)."""
    rho = validate_density(rho, dim=4)
    r = rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ajbj->ab", r)
    if keep == "B":
        return np.einsum("jajb->ab", r)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def pauli_expansion(rho) -> np.ndarray:
    """Real coefficients ``r[i, j] = Tr[rho (sigma_i x sigma_j)]``."""
    rho = validate_density(rho, dim=4)
    # Tr[rho P] = sum_ab rho_ab P_ba
    return np.einsum("ab,ijba->ij", rho, PAULI_PRODUCTS).real


def from_pauli(r) -> np.ndarray:
    """Inverse of :func:`pauli_expansion`: ``(1/4) sum r_ij sigma_i x sigma_j``."""
    r = np.asarray(r, dtype=float)
    return np.einsum("ij,ijab->ab", r, PAULI_PRODUCTS) / 4.0


def embed_rotation(channel: str, theta: float, phi: float = 0.0) -> np.ndarray:
    """Selective rotation ``exp[-i theta/2 (cos phi X + sin phi Y)]`` as a 4x4 unitary.

    The rotation acts inside the two-level subspace(s) addressed by ``channel``
    and is the identity elsewhere.
    """
    try:
        pairs = CHANNELS[channel]
    except KeyError:
        raise ValueError(f"unknown channel {channel!r}; expected one of {sorted(CHANNELS)}") from None
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    u = np.eye(4, dtype=complex)
    for lo, hi in pairs:
        u[lo, lo] = c
        u[hi, hi] = c
        u[lo, hi] = -1j * s * np.exp(-1j * phi)
        u[hi, lo] = -1j * s * np.exp(1j * phi)
    return u


def conjugate(rho, u) -> np.ndarray:
    """Return ``u rho u^dagger``; ``u`` must be unitary to 1e-10."""
    u = np.asarray(u, dtype=complex)
    if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-10:
        raise ValueError("conjugating matrix is not unitary")
    rho = np.asarray(rho, dtype=complex)
    return u @ rho @ u.conj().T


def swap_subsystems(rho) -> np.ndarray:
    """Exchange the roles of A and B."""
    return SWAP @ np.asarray(rho, dtype=complex) @ SWAP
