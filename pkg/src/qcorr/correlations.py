"""Mutual information, classical correlation, discord and geometric discord.

All entropic quantities are in bits.  Classical correlation is measured on
subsystem B by default (``side="B"``); pass ``side="A"`` for the asymmetric
counterpart.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from . import _kernels, qmat
from .errors import DomainError
from .states import BellCoeffs, physicality_check, require_physical

LN2 = math.log(2.0)
TAYLOR_MAX = 0.1
TAYLOR_WARN = 0.05


@dataclass(frozen=True)
class OptimizerConfig:
    """Coarse grid over measurement bases followed by Nelder-Mead refinement."""

    grid_theta: int = 64
    grid_phi: int = 128
    refine_tol: float = 1e-10
    max_refine_iters: int = 200

    def __post_init__(self):
        if self.grid_theta < 8 or self.grid_phi < 8 or self.max_refine_iters < 8:
            raise ValueError("optimizer grid sizes and iteration budget must be >= 8")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be positive")


class MeasurementBasis(NamedTuple):
    """Projective basis ``{cos t|0> + e^{i p} sin t|1>, e^{-i p} sin t|0> - cos t|1>}``."""

    theta: float
    phi: float

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        ct, st = math.cos(self.theta), math.sin(self.theta)
        e = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([ct, e * st]), np.array([e.conjugate() * st, -ct])


class CriticalTime(NamedTuple):
    t_ns: float
    degenerate: bool


@dataclass(frozen=True)
class ElementErrors:
    """Absolute half-widths of the real and imaginary part of each element."""

    re: np.ndarray
    im: np.ndarray

    def __post_init__(self):
        re = np.asarray(self.re, dtype=float)
        im = np.asarray(self.im, dtype=float)
        for name, a in (("re", re), ("im", im)):
            if a.shape != (4, 4):
                raise ValueError(f"{name} errors must be 4x4, got {a.shape}")
            if np.any(a < 0):
                raise ValueError(f"{name} errors must be non-negative")
            if not np.allclose(a, a.T):
                raise ValueError(f"{name} errors must be symmetric under transpose")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def uniform(cls, width: float) -> "ElementErrors":
        return cls(np.full((4, 4), width), np.full((4, 4), width))

    @classmethod
    def zeros(cls) -> "ElementErrors":
        return cls.uniform(0.0)

    def scaled(self, factor: float) -> "ElementErrors":
        return ElementErrors(self.re * factor, self.im * factor)


@dataclass
class CorrelationReport:
    mutual_info: float
    classical_corr: float
    discord: float
    geo_discord: float
    optimum: MeasurementBasis
    err_mutual: float | None = None
    err_classical: float | None = None
    err_discord: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "mutual_info": self.mutual_info,
            "classical_corr": self.classical_corr,
            "discord": self.discord,
            "geo_discord": self.geo_discord,
            "optimum": {"theta": self.optimum.theta, "phi": self.optimum.phi},
        }
        if self.err_mutual is not None:
            d.update(
                err_mutual=self.err_mutual,
                err_classical=self.err_classical,
                err_discord=self.err_discord,
            )
        d.update(self.extra)
        return d


def _oriented(rho, side: str) -> np.ndarray:
    if side == "B":
        return rho
    if side == "A":
        return qmat.swap_subsystems(rho)
    raise ValueError(f"side must be 'A' or 'B', not {side!r}")


def _canonical_basis(theta: float, phi: float) -> MeasurementBasis:
    # Map an arbitrary (theta, phi) onto theta in [0, pi/2], phi in [0, 2 pi).
    # Antipodal Bloch vectors give the same measurement.
    n = np.array(
        [math.sin(2 * theta) * math.cos(phi), math.sin(2 * theta) * math.sin(phi), math.cos(2 * theta)]
    )
    if n[2] < 0:
        n = -n
    t = 0.5 * math.acos(min(1.0, n[2]))
    p = math.atan2(n[1], n[0]) % (2 * math.pi) if math.hypot(n[0], n[1]) > 0 else 0.0
    return MeasurementBasis(t, p)


def mutual_information(rho) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)``."""
    rho = qmat.validate_density(rho, dim=4)
    s_ab = qmat.shannon_bits(qmat.spectrum(rho))
    s_a = qmat.shannon_bits(qmat.spectrum(qmat.partial_trace(rho, "A")))
    s_b = qmat.shannon_bits(qmat.spectrum(qmat.partial_trace(rho, "B")))
    return s_a + s_b - s_ab


def measured_conditional_entropy(rho, basis: MeasurementBasis, side: str = "B") -> float:
    """``sum_k p_k S(rho_A^k)`` after the projective measurement ``basis`` on ``side``."""
    rho = _oriented(qmat.validate_density(rho, dim=4), side)
    return float(_kernels.cond_entropy(np.ascontiguousarray(rho), basis.theta, basis.phi))


def classical_correlation(
    rho, cfg: OptimizerConfig | None = None, side: str = "B"
) -> tuple[float, MeasurementBasis]:
    """Maximal information about one qubit gained by measuring the other.

    A ``grid_theta x grid_phi`` scan locates the best basis, which Nelder-Mead
    then polishes until the simplex spans less than ``refine_tol`` radians.

    Returns
    -------
    value : float
        Classical correlation in bits.
    basis : MeasurementBasis
        The maximizing projective measurement.
    """
    cfg = cfg or OptimizerConfig()
    rho = _oriented(qmat.validate_density(rho, dim=4), side)
    rho = np.ascontiguousarray(rho)
    s_a = qmat.shannon_bits(qmat.spectrum(qmat.partial_trace(rho, "A")))

    thetas = np.linspace(0.0, math.pi / 2, cfg.grid_theta)
    phis = 2 * math.pi * np.arange(cfg.grid_phi) / cfg.grid_phi
    grid = _kernels.cond_entropy_grid(rho, thetas, phis)
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    x0 = np.array([thetas[i], phis[j]])
    best = float(grid[i, j])

    dth = thetas[1] - thetas[0]
    dph = phis[1] - phis[0]
    res = minimize(
        lambda x: _kernels.cond_entropy(rho, x[0], x[1]),
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": [x0, x0 + [dth, 0.0], x0 + [0.0, dph]],
            "xatol": cfg.refine_tol,
            "fatol": np.inf,
            "maxiter": cfg.max_refine_iters,
        },
    )
    if res.fun < best:
        best = float(res.fun)
        x0 = res.x
    value = max(0.0, s_a - best)
    return value, _canonical_basis(float(x0[0]), float(x0[1]))


def quantum_discord(rho, cfg: OptimizerConfig | None = None, side: str = "B") -> float:
    return mutual_information(rho) - classical_correlation(rho, cfg, side)[0]


def _g(t: float) -> float:
    # (1+t) ln(1+t) + (1-t) ln(1-t), accurate to full relative precision near 0
    t = abs(t)
    if t >= 1.0:
        return 2.0 * math.log(2.0)
    return 2.0 * t * math.atanh(t) + math.log1p(-t * t)


def _second_difference(x: float, y: float) -> float:
    # F(x+y) + F(x-y) - 2 F(x) for F(s) = (1+s) ln(1+s), which equals (1+x) g(y/(1+x))
    if 1.0 + x <= 0.0:
        return 0.0
    return (1.0 + x) * _g(y / (1.0 + x))


def classical_correlation_analytic_bell(c) -> float:
    c = require_physical(c)
    chi = max(abs(c.c1), abs(c.c2), abs(c.c3))
    return _g(chi) / (2.0 * LN2)


def discord_analytic_bell(c) -> float:
    """Entropic discord of a Bell-diagonal state.

    Written as a sum of two non-negative second differences around the
    dominant coefficient, so there is no cancellation between ``I`` and ``C``
    even when the discord is many orders of magnitude below either.
    """
    c = require_physical(c)
    k = int(np.argmax(np.abs(c)))
    a, b = (c[i] for i in range(3) if i != k)
    x = c[k]
    return (_second_difference(-x, a + b) + _second_difference(x, b - a)) / (4.0 * LN2)


def mutual_information_analytic_bell(c) -> float:
    return classical_correlation_analytic_bell(c) + discord_analytic_bell(c)


def geometric_discord_analytic(c) -> float:
    """``(c1^2 + c2^2 + c3^2 - max c_i^2) / 2`` for a Bell-diagonal state."""
    sq = np.sort(np.square(require_physical(c)))
    return float((sq[0] + sq[1]) / 2)


def geometric_discord(rho, side: str = "B") -> float:
    """Geometric discord of an arbitrary two-qubit state, closed form.

    With local Bloch vector ``y`` of the measured qubit and correlation matrix
    ``T``, the value is ``(|y|^2 + |T|^2 - k_max) / 2`` where ``k_max`` is the
    largest eigenvalue of ``y y^T + T^T T``.  Normalized so that it reduces to
    :func:`geometric_discord_analytic` on Bell-diagonal states.
    """
    r = qmat.pauli_expansion(_oriented(qmat.validate_density(rho, dim=4), side))
    y = r[0, 1:]
    t = r[1:, 1:]
    k = np.outer(y, y) + t.T @ t
    k_max = np.linalg.eigvalsh(k)[-1]
    return float(max(0.0, (y @ y + np.sum(t * t) - k_max) / 2))


def geometric_discord_restricted_numeric(c) -> float:
    """Distance to the nearest single-axis Bell-diagonal classical state.

    Minimizes ``2 Tr(rho - chi)^2`` over ``chi = (1 + t sigma_i x sigma_i)/4``,
    ``t`` in [-1, 1], for each axis ``i``; used to cross-check
    :func:`geometric_discord_analytic`.
    """
    c = np.array(require_physical(c))
    best = math.inf
    for axis in range(3):
        t = float(np.clip(c[axis], -1.0, 1.0))
        diff = c.copy()
        diff[axis] -= t
        # Tr(sigma_i sigma_i x sigma_j sigma_j) = 4 delta_ij, and rho - chi = (1/4) sum diff_i P_i
        dist = 2.0 * np.sum(diff**2) / 4.0
        best = min(best, dist)
    return float(best)


def taylor_correlations(c2: float, c3: float) -> tuple[float, float, float]:
    """Leading-order ``(I, C, D)`` for ``c = (0, c2, c3)`` with small coefficients."""
    big = max(abs(c2), abs(c3))
    if big > TAYLOR_MAX:
        raise DomainError(f"small-coefficient expansion invalid for |c| = {big} > {TAYLOR_MAX}")
    if big > TAYLOR_WARN:
        warnings.warn(f"small-coefficient expansion inaccurate for |c| = {big}", stacklevel=2)
    a, b = c2 * c2, c3 * c3
    k = 1.0 / (2.0 * LN2)
    return k * (a + b), k * max(a, b), k * min(a, b)


def critical_time(c2_0: float, c3: float, t_dephase: float) -> CriticalTime:
    """Time at which ``c2_0 exp[-(t/t_dephase)^2]`` has decayed to ``c3``."""
    if c3 <= 0:
        raise DomainError(f"critical time undefined for c3 = {c3}")
    if t_dephase <= 0:
        raise DomainError("dephasing time must be positive")
    if c3 >= c2_0:
        return CriticalTime(0.0, True)
    return CriticalTime(math.sqrt(-math.log(c3 / c2_0)) * t_dephase, False)


def _perturb(rho: np.ndarray, errs: ElementErrors, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(4)
    d_re = rng.uniform(-1.0, 1.0, size=len(iu[0])) * errs.re[iu]
    d_im = rng.uniform(-1.0, 1.0, size=len(iu[0])) * errs.im[iu]
    delta = np.zeros((4, 4), dtype=complex)
    delta[iu] = d_re + 1j * d_im
    delta[np.diag_indices(4)] = delta.diagonal().real
    delta = delta + np.triu(delta, 1).conj().T
    out = rho + delta
    out = (out + out.conj().T) / 2
    lam, vec = np.linalg.eigh(out)
    lam = np.clip(lam, 0.0, None)
    out = (vec * lam) @ vec.conj().T
    out = (out + out.conj().T) / 2
    return out / np.trace(out).real


def correlation_error_bars(
    rho,
    errs: ElementErrors,
    n_samples: int = 1000,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
) -> tuple[float, float, float]:
    """Largest deviation of ``(I, C, D)`` over states perturbed within ``errs``.

    Each sample shifts every element uniformly within its half-width (keeping
    the matrix Hermitian), clips negative eigenvalues and renormalizes.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    rho = qmat.validate_density(rho, dim=4)
    if not (np.any(errs.re) or np.any(errs.im)):
        return 0.0, 0.0, 0.0
    cfg = cfg or OptimizerConfig()
    i0 = mutual_information(rho)
    c0 = classical_correlation(rho, cfg)[0]
    d0 = i0 - c0
    rng = np.random.default_rng(seed)
    worst = np.zeros(3)
    for _ in range(n_samples):
        sample = _perturb(rho, errs, rng)
        i = mutual_information(sample)
        c = classical_correlation(sample, cfg)[0]
        worst = np.maximum(worst, np.abs([i - i0, c - c0, (i - c) - d0]))
    return tuple(float(w) for w in worst)


def correlation_report(
    rho,
    cfg: OptimizerConfig | None = None,
    side: str = "B",
    errs: ElementErrors | None = None,
    n_samples: int = 1000,
    seed: int = 0,
) -> CorrelationReport:
    rho = qmat.validate_density(rho, dim=4)
    mi = mutual_information(rho)
    cc, basis = classical_correlation(rho, cfg, side)
    report = CorrelationReport(mi, cc, mi - cc, geometric_discord(rho, side), basis)
    if errs is not None:
        report.err_mutual, report.err_classical, report.err_discord = correlation_error_bars(
            rho, errs, n_samples, seed, cfg
        )
    return report


def bell_report(c: BellCoeffs) -> dict:
    """Closed-form values for a Bell-diagonal state."""
    return {
        "mutual_info": mutual_information_analytic_bell(c),
        "classical_corr": classical_correlation_analytic_bell(c),
        "discord": discord_analytic_bell(c),
        "geo_discord": geometric_discord_analytic(c),
    }
