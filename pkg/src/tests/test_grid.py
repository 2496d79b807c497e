import math

import numpy as np
import pytest

from eup_bell.errors import (
    ConfigurationError,
    DomainError,
    NumericalConsistencyError,
    UsageError,
)
from eup_bell.quantum.grid import (
    WaveFunction,
    auxiliary_momentum_op,
    commutator_apply,
    expectation,
    gaussian_packet,
    hermiticity_residual,
    identity_op,
    inner_product,
    make_grid,
    momentum_power_op,
    multiplication_op,
    norm,
    position_op,
    position_squared_op,
    random_smooth_state,
    std_dev,
    uniform_state,
)


@pytest.mark.parametrize(
    "dims,points,extent",
    [(2, 32, 10.0), (3, 24, 10.0), (1, 4, 10.0), (1, 64, 0.0), (1, 64, -1.0)],
)
def test_make_grid_rejects_invalid_parameters(dims, points, extent):
    with pytest.raises(ConfigurationError):
        make_grid(dims, points, extent)


def test_grid_geometry(grid_1d, grid_3d):
    assert grid_1d.spacing == pytest.approx(0.3125)
    assert grid_1d.axis_coordinates[0] == pytest.approx(-10.0)
    assert grid_1d.axis_coordinates[-1] == pytest.approx(10.0 - 0.3125)
    assert grid_3d.shape == (32, 32, 32)
    assert grid_3d.size == 32**3
    assert grid_3d.volume_element == pytest.approx((18.0 / 32) ** 3)
    with pytest.raises(UsageError):
        grid_3d.coordinate(3)


def test_gaussian_moments_1d():
    grid = make_grid(1, 64, 24.0)
    psi = gaussian_packet(grid, 3.0, 1.0)

    assert norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert expectation(position_op(grid, 0), psi).real == pytest.approx(3.0, abs=1e-8)
    assert std_dev(position_op(grid, 0), psi) == pytest.approx(1.0, abs=1e-8)
    assert std_dev(auxiliary_momentum_op(grid, 0), psi) == pytest.approx(0.5, abs=1e-8)


def test_boosted_packet_carries_momentum(grid_1d):
    psi = gaussian_packet(grid_1d, 0.0, 1.0, momentum=1.0)
    assert expectation(auxiliary_momentum_op(grid_1d, 0), psi).real == pytest.approx(
        1.0, abs=1e-8
    )


def test_gaussian_moments_3d(grid_3d):
    psi = gaussian_packet(grid_3d, [0.5, -0.3, 0.2], 0.9)
    assert expectation(position_squared_op(grid_3d), psi).real == pytest.approx(
        0.25 + 0.09 + 0.04 + 3 * 0.81, abs=1e-8
    )
    for axis in range(3):
        assert std_dev(position_op(grid_3d, axis), psi) == pytest.approx(0.9, abs=1e-8)


def test_truncation_guard(grid_1d):
    with pytest.raises(DomainError):
        gaussian_packet(grid_1d, 3.0, 1.0)
    with pytest.raises(DomainError):
        gaussian_packet(grid_1d, 0.0, 0.0)
    with pytest.raises(UsageError):
        gaussian_packet(grid_1d, [0.0, 0.0], 1.0)


def test_heisenberg_commutator(grid_1d):
    psi = gaussian_packet(grid_1d, 0.0, 1.0)
    observed = commutator_apply(position_op(grid_1d, 0), auxiliary_momentum_op(grid_1d, 0), psi)
    assert norm(observed - 1j * psi) < 1e-8


def test_operators_are_hermitian_on_smooth_states(grid_1d, rng):
    operators = (
        position_op(grid_1d, 0),
        auxiliary_momentum_op(grid_1d, 0),
        momentum_power_op(grid_1d, [2]),
    )
    assert all(op.hermitian for op in operators)
    for _ in range(50):
        phi = random_smooth_state(grid_1d, rng)
        psi = random_smooth_state(grid_1d, rng)
        assert norm(phi) == pytest.approx(1.0)
        for op in operators:
            assert hermiticity_residual(op, phi, psi) < 1e-10


def test_operator_algebra_tracks_hermiticity(grid_1d):
    x = position_op(grid_1d, 0)
    p = auxiliary_momentum_op(grid_1d, 0)
    assert (x + p).hermitian
    assert (2.0 * x).hermitian
    assert not (1j * x).hermitian
    assert not (x @ p).hermitian
    assert not multiplication_op(grid_1d, 1j * grid_1d.coordinate(0)).hermitian


def test_second_momentum_power_matches_repeated_application(grid_1d):
    psi = gaussian_packet(grid_1d, 0.5, 1.0)
    p = auxiliary_momentum_op(grid_1d, 0)
    twice = p.apply(p.apply(psi))
    assert norm(momentum_power_op(grid_1d, [2]).apply(psi) - twice) < 1e-10


def test_std_dev_requires_hermitian_operator(grid_1d):
    psi = gaussian_packet(grid_1d, 0.0, 1.0)
    x = position_op(grid_1d, 0)
    with pytest.raises(UsageError):
        std_dev(x @ auxiliary_momentum_op(grid_1d, 0), psi)


def test_negative_variance_is_reported(grid_1d):
    # An unnormalized field breaks ⟨A²⟩ >= ⟨A⟩².
    psi = 2.0 * gaussian_packet(grid_1d, 0.0, 1.0)
    with pytest.raises(NumericalConsistencyError):
        std_dev(identity_op(grid_1d), psi)


def test_grid_mismatch(grid_1d):
    other = make_grid(1, 32, 20.0)
    with pytest.raises(UsageError):
        inner_product(uniform_state(grid_1d), uniform_state(other))
    with pytest.raises(UsageError):
        position_op(grid_1d, 0).apply(uniform_state(other))


def test_wavefunction_is_read_only(grid_1d):
    psi = uniform_state(grid_1d)
    assert norm(psi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0.0
    with pytest.raises(DomainError):
        WaveFunction(grid_1d, np.zeros(64)).normalized()
    with pytest.raises(UsageError):
        WaveFunction(grid_1d, np.zeros(63))


def test_inner_product_is_conjugate_linear_in_first_argument(grid_1d):
    psi = gaussian_packet(grid_1d, 0.0, 1.0)
    assert inner_product(1j * psi, psi) == pytest.approx(-1j)
    assert inner_product(psi, 1j * psi) == pytest.approx(1j)
    assert math.isclose(norm(psi + psi), 2.0)
