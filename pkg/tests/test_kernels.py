import math
import os
import subprocess
import sys

import numpy as np
import pytest

from qcorr import _kernels, _pykernels, correlations as corr, qmat
from qcorr import dynamics as dyn

from conftest import random_density

try:
    from qcorr import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def conditional_entropy_oracle(rho, theta, phi):
    basis = corr.MeasurementBasis(theta, phi)
    total = 0.0
    for v in basis.vectors():
        proj = np.kron(np.eye(2), np.outer(v, v.conj()))
        m = proj @ rho @ proj
        p = np.trace(m).real
        if p > 1e-15:
            total += p * qmat.von_neumann_entropy(qmat.partial_trace(m / p, "A"))
    return total


def test_backend_is_reported():
    assert _kernels.BACKEND in ("cython", "python")
    if _ckernels is not None and not os.environ.get("QCORR_PURE_PYTHON"):
        assert _kernels.BACKEND == "cython"


@pytest.mark.parametrize("impl", [_pykernels, _ckernels], ids=["python", "cython"])
def test_cond_entropy_against_projector_oracle(impl, rng):
    if impl is None:
        pytest.skip("compiled extension not built")
    for _ in range(10):
        rho = random_density(rng)
        theta, phi = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
        assert impl.cond_entropy(rho, theta, phi) == pytest.approx(
            conditional_entropy_oracle(rho, theta, phi), abs=1e-12
        )


def test_pure_branch_has_zero_entropy():
    # product of pure states: measuring B leaves A pure
    psi = np.kron([1, 0], [math.cos(0.3), math.sin(0.3)])
    rho = np.outer(psi, psi).astype(complex)
    assert _pykernels.cond_entropy(rho, 0.7, 1.1) == pytest.approx(0, abs=1e-14)


@needs_ext
def test_grid_backends_agree(rng):
    thetas = np.linspace(0, math.pi / 2, 17)
    phis = np.linspace(0, 2 * math.pi, 33, endpoint=False)
    for _ in range(5):
        rho = random_density(rng)
        a = _pykernels.cond_entropy_grid(rho, thetas, phis)
        b = np.asarray(_ckernels.cond_entropy_grid(rho, thetas, phis))
        assert a.shape == b.shape == (17, 33)
        assert np.max(np.abs(a - b)) < 1e-14
        assert b[3, 5] == pytest.approx(_ckernels.cond_entropy(rho, thetas[3], phis[5]), abs=1e-15)


@needs_ext
def test_free_evolve_backends_agree(rng):
    model = dyn.EnsembleModel(0.01, 0.001, 16, 8)
    de, dn, _ = model.nodes()
    start = np.stack([random_density(rng) for _ in de])
    a, b = start.copy(), start.copy()
    _pykernels.free_evolve(a, de, dn, 37.5, 0.9)
    _ckernels.free_evolve(b, de, dn, 37.5, 0.9)
    assert np.max(np.abs(a - b)) < 1e-14


def test_free_evolve_matches_phase_factors(rng):
    p = dyn.PhysicsParams()
    de, dn = np.array([0.02, -0.01]), np.array([0.001, 0.003])
    nodes = np.stack([random_density(rng) for _ in de])
    expect = [nodes[k] * dyn.free_phase_factors(12.0, de[k], dn[k], p) for k in range(2)]
    _kernels.free_evolve(nodes, de, dn, 12.0, math.exp(-12.0 / p.t2e))
    assert np.allclose(nodes, expect, atol=1e-15)


def test_pure_python_switch():
    code = "import qcorr; print(qcorr.BACKEND)"
    env = dict(os.environ, QCORR_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
