from itertools import product

import numpy as np
import pytest

from eup_bell.errors import UnsupportedConfigurationError, UsageError
from eup_bell.quantum.deformation import model_from_alpha
from eup_bell.quantum.grid import (
    auxiliary_momentum_op,
    commutator_apply,
    gaussian_packet,
    multiplication_op,
    norm,
    position_op,
)
from eup_bell.quantum.series_algebra import levi_civita
from eup_bell.quantum.spin import (
    CompositeOperator,
    SpinMatrix,
    angular_momentum_op,
    auxiliary_angular_momentum_op,
    auxiliary_spin,
    composite_commutator_apply,
    composite_expectation,
    magnetic_coupling_coefficient,
    pauli,
    physical_spin,
    product_state,
    spinor_norm,
)


def test_auxiliary_spin_algebra():
    for i, j in product(range(3), range(3)):
        expected = SpinMatrix(np.zeros((2, 2)))
        for k in range(3):
            expected = expected + auxiliary_spin(k) * (1j * levi_civita(i, j, k))
        assert auxiliary_spin(i).commutator(auxiliary_spin(j)).isclose(expected)


def test_pauli_eigenvalues():
    for axis in range(3):
        assert pauli(axis).eigenvalues() == pytest.approx([-1.0, 1.0])
        assert pauli(axis).dagger().isclose(pauli(axis))
    with pytest.raises(UsageError):
        pauli(3)


def test_physical_spin_algebra(grid_3d, eup_model):
    psi = gaussian_packet(grid_3d, [0.5, 0.0, 0.0], 0.9)
    field = product_state(psi, [1.0, 1.0j])
    g = multiplication_op(grid_3d, eup_model.g(grid_3d.radius_squared), "g")
    for i, j in ((0, 1), (1, 2), (2, 0)):
        k = 3 - i - j
        observed = composite_commutator_apply(
            physical_spin(eup_model, grid_3d, i), physical_spin(eup_model, grid_3d, j), field
        )
        expected = CompositeOperator(g @ g, auxiliary_spin(k) * (1j * levi_civita(i, j, k)))
        assert spinor_norm(observed - expected.apply(field)) < 1e-12


def test_physical_spin_expectation_carries_positional_factor(grid_3d, eup_model):
    psi = gaussian_packet(grid_3d, [0.0, 0.0, 0.0], 0.9)
    up = product_state(psi, [1.0, 0.0])
    value = composite_expectation(physical_spin(eup_model, grid_3d, 2), up)
    assert value.real == pytest.approx(0.5 * (1.0 + 1e-3 * 3 * 0.81), abs=1e-8)
    assert spinor_norm(up) == pytest.approx(1.0)


def test_orbital_angular_momentum_is_g_times_auxiliary(grid_3d, eup_model):
    psi = gaussian_packet(grid_3d, [0.5, -0.3, 0.0], 0.9, momentum=[0.2, 0.3, 0.0])
    x, y = position_op(grid_3d, 0), position_op(grid_3d, 1)
    aux_lz = x @ auxiliary_momentum_op(grid_3d, 1) - y @ auxiliary_momentum_op(grid_3d, 0)
    expected = eup_model.g(grid_3d.radius_squared) * aux_lz.apply(psi).amplitudes

    lz = angular_momentum_op(eup_model, grid_3d, 2).apply(psi)
    assert np.linalg.norm((lz.amplitudes - expected).ravel()) * grid_3d.volume_element**0.5 < 1e-6

    lz_aux = auxiliary_angular_momentum_op(eup_model, grid_3d, 2).apply(psi)
    assert norm(lz_aux - aux_lz.apply(psi)) < 1e-6


@pytest.mark.parametrize("i, j, k", [(0, 1, 2), (1, 2, 0), (2, 0, 1)])
def test_angular_momentum_algebras(grid_3d, eup_model, i, j, k):
    psi = gaussian_packet(grid_3d, [0.5, -0.3, 0.2], 0.9, momentum=[0.2, 0.3, -0.1])
    g = multiplication_op(grid_3d, eup_model.g(grid_3d.radius_squared), "g")

    l_i, l_j, l_k = (angular_momentum_op(eup_model, grid_3d, a) for a in (i, j, k))
    deformed = commutator_apply(l_i, l_j, psi) - (g @ l_k).apply(psi) * 1j
    assert norm(deformed) / norm(psi) <= 1e-5

    aux_i, aux_j, aux_k = (
        auxiliary_angular_momentum_op(eup_model, grid_3d, a) for a in (i, j, k)
    )
    auxiliary = commutator_apply(aux_i, aux_j, psi) - aux_k.apply(psi) * 1j
    assert norm(auxiliary) / norm(psi) <= 1e-5


def test_angular_momentum_needs_3d(grid_1d, eup_model):
    with pytest.raises(UsageError):
        angular_momentum_op(eup_model, grid_1d, 0)


def test_product_state_validates_spinor(grid_3d):
    psi = gaussian_packet(grid_3d, [0.0, 0.0, 0.0], 0.9)
    with pytest.raises(UsageError):
        product_state(psi, [1.0, 0.0, 0.0])


@pytest.mark.parametrize("field", [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.3, -0.2, 1.0)])
def test_magnetic_coupling_decomposition(field):
    report = magnetic_coupling_coefficient(model_from_alpha(1e-3), field)
    assert report.passed
    assert all(c.passed for c in report.to_checks())
    assert not all(r.is_zero for r in report.remainder)


def test_magnetic_spin_ratio():
    report = magnetic_coupling_coefficient(model_from_alpha(1e-3), (0.0, 0.0, 1.0))
    # Along the field only g survives; across it the ḡ part doubles the correction.
    assert report.spin_ratio((0.0, 0.0, 2.0)) == pytest.approx(1.0 + 4e-3)
    assert report.spin_ratio((2.0, 0.0, 0.0)) == pytest.approx(1.0 + 8e-3)
    assert report.spin_ratio((2.0, 0.0, 0.0), alpha=0.0) == pytest.approx(1.0)


def test_magnetic_coupling_report_document():
    report = magnetic_coupling_coefficient(model_from_alpha(0.0), (0.0, 0.0, 1.0))
    document = report.to_dict()
    assert document["passed"] is True
    assert document["spin_residual"] == [[], [], []]
    assert all(term["b_order"] == 1 for term in document["orbital"])


def test_unsupported_gauge():
    with pytest.raises(UnsupportedConfigurationError):
        magnetic_coupling_coefficient(model_from_alpha(1e-3), (0.0, 0.0, 1.0), gauge="landau")
    with pytest.raises(UsageError):
        magnetic_coupling_coefficient(model_from_alpha(1e-3), (0.0, 1.0))
