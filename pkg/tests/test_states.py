import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import qmat
from qcorr.errors import DomainError
from qcorr.matrixio import measured_state
from qcorr.states import (
    DEFAULT_EPSILON as EPS,
    BellCoeffs,
    bell_diagonal_to_density,
    coeffs_from_density,
    deviation,
    physicality_check,
    thermal_state,
)

from conftest import random_physical_coeffs


def test_zero_coeffs_is_maximally_mixed():
    np.testing.assert_allclose(bell_diagonal_to_density((0, 0, 0)), np.eye(4) / 4)


def test_bell_state_is_pure_by_eigendecomposition():
    rho = bell_diagonal_to_density((1, -1, 1))
    lam, vec = np.linalg.eigh(rho)
    np.testing.assert_allclose(lam, [0, 0, 0, 1], atol=1e-15)
    v = vec[:, -1] * np.sign(vec[0, -1])
    np.testing.assert_allclose(v, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)
    assert qmat.von_neumann_entropy(rho) == pytest.approx(0, abs=1e-12)


def test_prepared_coefficients_give_expected_matrix():
    rho = bell_diagonal_to_density((0, 2.024 * EPS, 0.824 * EPS))
    dev = deviation(rho)
    np.testing.assert_allclose(dev.diagonal().real, [0.206, -0.206, -0.206, 0.206], atol=1e-12)
    assert dev[0, 3].real == pytest.approx(-0.506, abs=1e-12)
    assert dev[1, 2].real == pytest.approx(0.506, abs=1e-12)


def test_unphysical_coeffs_raise():
    with pytest.raises(DomainError, match="-0.5"):
        bell_diagonal_to_density((1, 1, 1))


def test_coeffs_round_trip(rng):
    for c in random_physical_coeffs(rng, 50):
        fit = coeffs_from_density(bell_diagonal_to_density(c))
        np.testing.assert_allclose(fit.coeffs, c, atol=1e-12)
        assert fit.residual <= 1e-12 and fit.is_bell_diagonal


def test_coeffs_from_measured_state():
    # c_i = Tr[rho sigma_i sigma_i], evaluated by hand from the tabulated deviation
    fit = coeffs_from_density(measured_state().rho)
    assert fit.coeffs.c1 == pytest.approx(2 * (-0.54 + 0.50) * EPS, abs=1e-12)
    assert fit.coeffs.c2 == pytest.approx(2 * (0.54 + 0.50) * EPS, abs=1e-12)
    assert fit.coeffs.c3 == pytest.approx((0.21 + 0.21 + 0.17 + 0.17) * EPS, abs=1e-12)
    assert fit.residual > 0


def test_coeffs_from_maximally_mixed():
    fit = coeffs_from_density(np.eye(4) / 4)
    assert fit.coeffs == BellCoeffs(0, 0, 0) and fit.residual == 0


def test_thermal_state():
    np.testing.assert_allclose(thermal_state(0.0), np.eye(4) / 4)
    np.testing.assert_allclose(
        thermal_state(7.35e-3).diagonal().real, [0.24265, 0.24265, 0.25735, 0.25735], atol=1e-15
    )
    assert np.trace(thermal_state(0.1)).real == pytest.approx(1)
    with pytest.raises(DomainError):
        thermal_state(0.3)


def test_physicality_check_examples():
    np.testing.assert_allclose(physicality_check((0, 0, 0)), [0.25] * 4)
    assert -0.5 in physicality_check((1, 1, 1))
    np.testing.assert_allclose(sorted(physicality_check((1, -1, 1))), [0, 0, 0, 1])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bell_states_are_valid_with_mixed_marginals(seed):
    c = random_physical_coeffs(np.random.default_rng(seed), 1)[0]
    rho = bell_diagonal_to_density(c)
    qmat.validate_density(rho, dim=4)
    np.testing.assert_allclose(qmat.partial_trace(rho, "A"), np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(qmat.partial_trace(rho, "B"), np.eye(2) / 2, atol=1e-12)
