"""Dephasing dynamics, pulse sequences and ensemble simulation.

Times are in ns and detunings in rad/ns throughout.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels, qmat
from .errors import DegenerateFitError, TransitionNotFoundError
from .states import (
    DEFAULT_EPSILON,
    BellCoeffs,
    bell_diagonal_to_density,
    coeffs_from_density,
    require_physical,
)

CHANNELS = tuple(qmat.CHANNELS)

_LEVEL = np.arange(4)
ELECTRON_FLIP = (_LEVEL[:, None] >> 1) != (_LEVEL[None, :] >> 1)
NUCLEAR_FLIP = (_LEVEL[:, None] & 1) != (_LEVEL[None, :] & 1)


@dataclass(frozen=True)
class PhysicsParams:
    t2e_star: float = 175.0
    t2e: float = 120_000.0
    t2n_star: float = 24_000.0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if min(self.t2e_star, self.t2e, self.t2n_star) <= 0:
            raise ValueError("relaxation times must be positive")
        if not self.t2e_star < self.t2n_star < self.t2e:
            warnings.warn(
                "expected t2e_star < t2n_star < t2e; dephasing hierarchy violated", stacklevel=3
            )


@dataclass(frozen=True)
class PulseEvent:
    """Instantaneous rotation at ``at`` followed by ``duration`` ns of evolution.

    ``damping`` lists ``(i, j, factor)`` with 1-based levels: the coherence
    ``rho_ij`` (and its conjugate) is multiplied by ``factor`` over the pulse
    duration.  Such explicit damping replaces any other free-evolution model
    during the pulse when the sequence is run with :func:`run_prep`.
    """

    at: float
    channel: str
    theta: float
    phi: float = 0.0
    duration: float = 0.0
    damping: tuple[tuple[int, int, float], ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.channel not in qmat.CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.at < 0 or self.duration < 0:
            raise ValueError("pulse time and duration must be non-negative")

    @property
    def end(self) -> float:
        return self.at + self.duration


@dataclass(frozen=True)
class PulseSequence:
    events: tuple[PulseEvent, ...] = ()
    readout_times: tuple[float, ...] = ()

    def __post_init__(self):
        events = tuple(sorted(self.events, key=lambda e: e.at))
        for a, b in zip(events, events[1:]):
            if b.at < a.end:
                raise ValueError(f"pulse at {b.at} ns overlaps pulse [{a.at}, {a.end}) ns")
        readouts = tuple(sorted(float(t) for t in self.readout_times))
        if readouts and readouts[0] < 0:
            raise ValueError("readout before t = 0")
        for ev in events:
            if any(ev.at < t < ev.end for t in readouts):
                raise ValueError(f"readout inside pulse window [{ev.at}, {ev.end}) ns")
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "readout_times", readouts)


@dataclass(frozen=True)
class EnsembleModel:
    """Gauss-Hermite grids over static electron and nuclear detunings.

    An order of 1 disables a grid (single node at zero detuning).
    """

    sigma_e: float
    sigma_n: float
    electron_order: int = 64
    nuclear_order: int = 64

    def __post_init__(self):
        for order in (self.electron_order, self.nuclear_order):
            if order != 1 and order < 8:
                raise ValueError("quadrature order must be 1 (grid disabled) or >= 8")
        if self.sigma_e <= 0 or self.sigma_n <= 0:
            raise ValueError("detuning spreads must be positive")

    @classmethod
    def from_params(
        cls,
        p: PhysicsParams,
        quadrature_order: int = 64,
        electron_grid: bool = True,
        nuclear_grid: bool = True,
    ) -> "EnsembleModel":
        # sigma = sqrt(2)/T* turns <exp(-i delta t)> into exp[-(t/T*)^2]
        return cls(
            sigma_e=math.sqrt(2.0) / p.t2e_star,
            sigma_n=math.sqrt(2.0) / p.t2n_star,
            electron_order=quadrature_order if electron_grid else 1,
            nuclear_order=quadrature_order if nuclear_grid else 1,
        )

    def nodes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flattened tensor-product nodes ``(delta_e, delta_n, weight)``."""
        de, we = gauss_hermite_normal(self.electron_order, self.sigma_e)
        dn, wn = gauss_hermite_normal(self.nuclear_order, self.sigma_n)
        return (
            np.repeat(de, len(dn)),
            np.tile(dn, len(de)),
            np.outer(we, wn).ravel(),
        )


class TrajectorySample(NamedTuple):
    t: float
    rho: np.ndarray
    c: BellCoeffs
    residual: float


@dataclass
class Trajectory:
    samples: list[TrajectorySample] = field(default_factory=list)

    @classmethod
    def from_states(cls, times, states) -> "Trajectory":
        out = []
        for t, rho in zip(times, states):
            fit = coeffs_from_density(rho)
            out.append(TrajectorySample(float(t), rho, fit.coeffs, fit.residual))
        return cls(out)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([s.c for s in self.samples])

    def __len__(self):
        return len(self.samples)


def gauss_hermite_normal(order: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for expectations over Normal(0, sigma)."""
    if order == 1:
        return np.zeros(1), np.ones(1)
    x, w = np.polynomial.hermite.hermgauss(order)
    return math.sqrt(2.0) * sigma * x, w / math.sqrt(math.pi)


def _hom_factor(dt: float, p: PhysicsParams) -> float:
    return math.exp(-dt / p.t2e) if math.isfinite(p.t2e) else 1.0


def evolve_coeffs_analytic(c0, t: float, p: PhysicsParams) -> BellCoeffs:
    """Gaussian decay of ``c1``, ``c2`` with ``c3`` held fixed."""
    c0 = require_physical(c0)
    k = math.exp(-((t / p.t2e_star) ** 2))
    return BellCoeffs(c0.c1 * k, c0.c2 * k, c0.c3)


def free_phase_factors(dt: float, delta_e: float, delta_n: float, p: PhysicsParams) -> np.ndarray:
    """Elementwise factors applied to ``rho`` by ``dt`` ns of free evolution.

    Element ``(i, j)`` acquires ``exp(-i (w_i - w_j) dt)`` for level shifts
    ``w = (de+dn, de-dn, -de+dn, -de-dn)/2``, and coherences that flip the
    electron also decay as ``exp(-dt/t2e)``.
    """
    om = 0.5 * np.array(
        [delta_e + delta_n, delta_e - delta_n, -delta_e + delta_n, -delta_e - delta_n]
    )
    fac = np.exp(-1j * (om[:, None] - om[None, :]) * dt)
    fac[ELECTRON_FLIP] *= _hom_factor(dt, p)
    return fac


def gaussian_dephasing_factors(dt: float, p: PhysicsParams) -> np.ndarray:
    """Ensemble average of :func:`free_phase_factors` over Gaussian detunings."""
    e = ELECTRON_FLIP.astype(float)
    n = NUCLEAR_FLIP.astype(float)
    env = np.exp(-e * (dt / p.t2e_star) ** 2 - n * (dt / p.t2n_star) ** 2)
    env[ELECTRON_FLIP] *= _hom_factor(dt, p)
    return env


def _apply_damping(rho: np.ndarray, damping) -> None:
    for i, j, factor in damping:
        rho[..., i - 1, j - 1] *= factor
        rho[..., j - 1, i - 1] *= factor


def run_sequence(
    seq: PulseSequence, rho0, model: EnsembleModel, p: PhysicsParams
) -> Trajectory:
    """Simulate ``seq`` for every detuning node and average the results.

    Pulses act instantaneously at ``at``; a readout coinciding with a pulse
    sees the post-pulse state.
    """
    rho0 = qmat.validate_density(rho0, dim=4)
    de, dn, w = model.nodes()
    nodes = np.ascontiguousarray(np.broadcast_to(rho0, (len(w), 4, 4)), dtype=complex)

    # (time, kind, payload); kind 0 = pulse end, 1 = readout
    timeline: list[tuple[float, int, object]] = []
    for ev in seq.events:
        timeline.append((ev.at, 0, ev))
    for t in seq.readout_times:
        timeline.append((t, 1, None))
    timeline.sort(key=lambda item: (item[0], item[1]))

    now = 0.0
    times, states = [], []

    def advance(to: float):
        nonlocal now
        if to > now:
            _kernels.free_evolve(nodes, de, dn, to - now, _hom_factor(to - now, p))
            now = to

    for t, kind, ev in timeline:
        advance(t)
        if kind == 0:
            u = qmat.embed_rotation(ev.channel, ev.theta, ev.phi)
            nodes[:] = u @ nodes @ u.conj().T
            if ev.duration > 0:
                advance(ev.end)
            _apply_damping(nodes, ev.damping)
        else:
            avg = np.tensordot(w, nodes, axes=1)
            states.append((avg + avg.conj().T) / 2)
            times.append(t)
    return Trajectory.from_states(times, states)


def prep_sequence(
    theta1: float = 0.70 * math.pi,
    theta2: float = 0.28 * math.pi,
    f: float | None = None,
    tau1: float = 1000.0,
    tau2: float = 200_000.0,
    pulse_pi2_rf: float = 5000.0,
) -> PulseSequence:
    """Five-pulse preparation of a Bell-diagonal state from thermal equilibrium.

    ``f`` is the fraction of the 3-4 coherence surviving the RF1 pi/2 pulse;
    it defaults to ``cos(theta2)``, the value for which ``c1 = 0``.
    """
    if f is None:
        f = math.cos(theta2)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"damping factor f={f} outside [0, 1]")
    t_rf = tau1 + tau2
    events = (
        PulseEvent(0.0, "MW2", theta1, label="mw2_theta1"),
        PulseEvent(tau1, "RF1", theta2, label="rf1_theta2"),
        PulseEvent(t_rf, "RF2", math.pi / 2, label="rf2_half_pi"),
        PulseEvent(
            t_rf, "RF1", math.pi / 2, duration=pulse_pi2_rf, damping=((3, 4, f),), label="rf1_half_pi"
        ),
        PulseEvent(t_rf + pulse_pi2_rf, "MW2", math.pi, label="mw2_pi"),
    )
    return PulseSequence(events, (t_rf + pulse_pi2_rf,))


def run_prep(seq: PulseSequence, rho0, p: PhysicsParams) -> list[tuple[str, np.ndarray]]:
    """Execute a preparation sequence on the ensemble-averaged state.

    Detunings are not sampled: each free interval multiplies coherences by
    their Gaussian ensemble envelope, which erases them over delays much longer
    than the dephasing times.  Pulses carrying explicit ``damping`` use only
    that damping during their duration.

    Returns the state after every event as ``(label, rho)``, with an extra
    ``"<label>+delay"`` entry before each pulse that follows a free interval.
    """
    rho = qmat.validate_density(rho0, dim=4).copy()
    stages = []
    now = 0.0
    for ev in seq.events:
        if ev.at > now:
            rho = rho * gaussian_dephasing_factors(ev.at - now, p)
            stages.append((f"{stages[-1][0]}+delay" if stages else "delay", rho.copy()))
        u = qmat.embed_rotation(ev.channel, ev.theta, ev.phi)
        rho = u @ rho @ u.conj().T
        if ev.duration > 0:
            if ev.damping:
                _apply_damping(rho, ev.damping)
            else:
                rho = rho * gaussian_dephasing_factors(ev.duration, p)
        now = ev.end
        stages.append((ev.label or ev.channel, rho.copy()))
    return stages


def prep_stage_predictions(theta1: float, theta2: float, f: float) -> dict[str, np.ndarray]:
    """Closed-form deviation matrices (units of epsilon) after each preparation stage.

    Keys: ``"populations"`` (after the theta2 RF1 pulse and the long delay),
    ``"rf2_half_pi"``, ``"rf1_half_pi"``, ``"mw2_pi"``.
    """
    c1h, s1h = math.cos(theta1 / 2) ** 2, math.sin(theta1 / 2) ** 2
    c2h, s2h = math.cos(theta2 / 2) ** 2, math.sin(theta2 / 2) ** 2
    ct1, ct2 = math.cos(theta1), math.cos(theta2)

    pops = np.diag([-s2h - ct1 * c2h, -c2h - ct1 * s2h, ct1, 1.0]).astype(complex)

    rf2 = pops.copy()
    rf2[2, 2] = rf2[3, 3] = c1h
    rf2[2, 3], rf2[3, 2] = -1j * s1h, 1j * s1h

    rf1 = np.diag([-c1h, -c1h, c1h, c1h]).astype(complex)
    rf1[0, 1], rf1[1, 0] = 1j * ct2 * s1h, -1j * ct2 * s1h
    rf1[2, 3], rf1[3, 2] = -1j * s1h * f, 1j * s1h * f

    final = np.diag([c1h, -c1h, -c1h, c1h]).astype(complex)
    final[0, 3] = final[3, 0] = -s1h * f
    final[1, 2] = final[2, 1] = ct2 * s1h
    return {"populations": pops, "rf2_half_pi": rf2, "rf1_half_pi": rf1, "mw2_pi": final}


def dd_two_flip(tau: float) -> PulseSequence:
    """Electron flips at ``tau`` and ``3 tau``, readout at ``4 tau``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return PulseSequence(
        (PulseEvent(tau, "E-FLIP", math.pi), PulseEvent(3 * tau, "E-FLIP", math.pi)),
        (4 * tau,),
    )


def dd_revival(tau4: float, n_blocks: int, samples_per_block: int) -> PulseSequence:
    """Back-to-back two-flip blocks of length ``4 tau4`` with uniform readouts.

    Readouts fall at ``k*4*tau4 + j*4*tau4/samples_per_block`` for
    ``j = 0 .. samples_per_block-1`` in each block ``k``.
    """
    if n_blocks < 1 or samples_per_block < 1:
        raise ValueError("n_blocks and samples_per_block must be >= 1")
    if tau4 <= 0:
        raise ValueError("tau4 must be positive")
    period = 4 * tau4
    events = []
    readouts = []
    for k in range(n_blocks):
        start = k * period
        events += [PulseEvent(start + tau4, "E-FLIP", math.pi), PulseEvent(start + 3 * tau4, "E-FLIP", math.pi)]
        readouts += [start + j * period / samples_per_block for j in range(samples_per_block)]
    return PulseSequence(tuple(events), tuple(readouts))


def fit_gaussian_decay(ts: Sequence[float], ys: Sequence[float]) -> float:
    """Fit ``y = A exp[-(t/T)^2]`` and return ``T``.

    Solves the linearized problem ``ln y = ln A - t^2/T^2`` by least squares
    with weights ``y^2``.
    """
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(ts) != len(ys) or len(ts) < 4:
        raise ValueError("need at least 4 (t, y) pairs")
    if np.any(ys <= 0):
        raise ValueError("decay data must be positive")
    if np.ptp(ys) <= 1e-12 * np.max(ys):
        raise DegenerateFitError("all samples equal: decay time undetermined")
    sw = ys  # sqrt of the y^2 weights
    a = np.column_stack([np.ones_like(ts), ts**2]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(a, np.log(ys) * sw, rcond=None)
    slope = coef[1]
    if slope >= 0:
        raise DegenerateFitError("data do not decay")
    return float(1.0 / math.sqrt(-slope))


def detect_transition_time(traj: Trajectory) -> float:
    """First time at which ``|c2|`` falls to ``|c3|`` (linear interpolation).

    Returns 0 when ``|c2| <= |c3|`` already at the first sample.
    """
    c = np.abs(traj.coeffs)
    t = traj.times
    if len(t) == 0 or np.all(c[:, 2] == 0):
        raise TransitionNotFoundError("c3 vanishes; no transition defined")
    gap = c[:, 1] - c[:, 2]
    if gap[0] <= 0:
        return 0.0
    below = np.nonzero(gap <= 0)[0]
    if len(below) == 0:
        raise TransitionNotFoundError("|c2| stays above |c3| over the whole trajectory")
    k = below[0]
    return float(t[k - 1] + (t[k] - t[k - 1]) * gap[k - 1] / (gap[k - 1] - gap[k]))


def analytic_trajectory(c0, times: Sequence[float], p: PhysicsParams) -> Trajectory:
    """Free-decay trajectory from the closed-form coefficient flow."""
    states = [bell_diagonal_to_density(evolve_coeffs_analytic(c0, t, p)) for t in times]
    return Trajectory.from_states(times, states)
