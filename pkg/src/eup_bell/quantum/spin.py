"""Deformed spin and angular momentum.

Physical spin is ŝ_i = g(x̂²)Ŝ_i with the auxiliary Ŝ_i = σ_i/2, and the physical
orbital angular momentum is l̂_i = ε_ijk ½{x̂^j, p̂^k}.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from numbers import Number
from typing import Sequence
import logging

import numpy as np
import sympy
from sympy.polys.domains import QQ_I

from ..errors import NumericalConsistencyError, UnsupportedConfigurationError, UsageError
from .deformation import DeformationModel, physical_momentum_op
from .grid import (
    Grid,
    GridOperator,
    WaveFunction,
    inner_product,
    multiplication_op,
    position_op,
)
from .series_algebra import (
    AXES,
    HALF,
    IMAG_UNIT,
    IdentityCheck,
    OperatorPolynomial,
    alpha_poly,
    angular_momentum_poly,
    anticommutator_poly,
    coefficient,
    g_poly,
    levi_civita,
    normal_order_product,
    ordered_product,
    physical_momentum_poly,
    position_poly,
    radius_squared_poly,
    zero_poly,
)

SPIN_TOLERANCE = 1.0e-12


@dataclass(frozen=True, eq=False)
class SpinMatrix:
    """2×2 complex matrix acting on spinor indices."""

    entries: np.ndarray

    def __post_init__(self):
        values = np.array(self.entries, dtype=complex)
        if values.shape != (2, 2):
            raise UsageError(f"Spin matrices are 2x2, got shape {values.shape}.")
        values.setflags(write=False)
        object.__setattr__(self, "entries", values)

    def __matmul__(self, other: "SpinMatrix") -> "SpinMatrix":
        return SpinMatrix(self.entries @ other.entries)

    def __add__(self, other: "SpinMatrix") -> "SpinMatrix":
        return SpinMatrix(self.entries + other.entries)

    def __sub__(self, other: "SpinMatrix") -> "SpinMatrix":
        return SpinMatrix(self.entries - other.entries)

    def __mul__(self, scalar: Number) -> "SpinMatrix":
        if not isinstance(scalar, Number):
            return NotImplemented
        return SpinMatrix(scalar * self.entries)

    __rmul__ = __mul__

    def dagger(self) -> "SpinMatrix":
        return SpinMatrix(self.entries.conj().T)

    def commutator(self, other: "SpinMatrix") -> "SpinMatrix":
        return self @ other - other @ self

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def isclose(self, other: "SpinMatrix", atol: float = SPIN_TOLERANCE) -> bool:
        return bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=atol))


SPIN_IDENTITY = SpinMatrix(np.eye(2))

PAULI = (
    SpinMatrix([[0, 1], [1, 0]]),
    SpinMatrix([[0, -1j], [1j, 0]]),
    SpinMatrix([[1, 0], [0, -1]]),
)
"""σ_1, σ_2, σ_3."""


def _check_pauli_algebra():
    for i, j in product(AXES, AXES):
        expected = SPIN_IDENTITY * (1.0 if i == j else 0.0)
        for k in AXES:
            expected = expected + PAULI[k] * (1j * levi_civita(i, j, k))
        if not (PAULI[i] @ PAULI[j]).isclose(expected):
            raise NumericalConsistencyError(f"Pauli algebra violated for ({i}, {j}).")


_check_pauli_algebra()


def _check_axis(axis: int):
    if axis not in AXES:
        raise UsageError(f"Spin axis {axis} out of range, expected one of {AXES}.")


def pauli(axis: int) -> SpinMatrix:
    _check_axis(axis)
    return PAULI[axis]


def auxiliary_spin(axis: int) -> SpinMatrix:
    """Ŝ_axis = σ_axis/2."""
    return 0.5 * pauli(axis)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Positional field with a two-component spinor index, shape (2, *grid.shape)."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        values = np.array(self.components, dtype=complex)
        if values.shape != (2,) + self.grid.shape:
            raise UsageError(
                f"Spinor field shape {values.shape} does not match {(2,) + self.grid.shape}."
            )
        values.setflags(write=False)
        object.__setattr__(self, "components", values)

    def component(self, s: int) -> WaveFunction:
        return WaveFunction(self.grid, self.components[s])

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        return SpinorField(self.grid, self.components - other.components)

    def __mul__(self, scalar: Number) -> "SpinorField":
        if not isinstance(scalar, Number):
            return NotImplemented
        return SpinorField(self.grid, scalar * self.components)

    __rmul__ = __mul__


def spinor_inner_product(a: SpinorField, b: SpinorField) -> complex:
    return sum(inner_product(a.component(s), b.component(s)) for s in (0, 1))


def spinor_norm(field: SpinorField) -> float:
    return float(np.sqrt(max(spinor_inner_product(field, field).real, 0.0)))


def product_state(psi: WaveFunction, chi: Sequence[complex]) -> SpinorField:
    """ψ ⊗ χ for a normalized 2-spinor χ."""
    chi = np.asarray(chi, dtype=complex)
    if chi.shape != (2,):
        raise UsageError(f"Spinor must have 2 components, got shape {chi.shape}.")
    chi = chi / np.linalg.norm(chi)
    return SpinorField(psi.grid, np.stack([c * psi.amplitudes for c in chi]))


@dataclass(frozen=True, eq=False)
class CompositeOperator:
    """positional ⊗ spin."""

    positional: GridOperator
    spin: SpinMatrix

    def apply(self, field: SpinorField) -> SpinorField:
        moved = [self.positional.apply(field.component(t)).amplitudes for t in (0, 1)]
        out = [
            sum(self.spin.entries[s, t] * moved[t] for t in (0, 1)) for s in (0, 1)
        ]
        return SpinorField(field.grid, np.stack(out))

    __call__ = apply

    def __matmul__(self, other: "CompositeOperator") -> "CompositeOperator":
        return CompositeOperator(self.positional @ other.positional, self.spin @ other.spin)


def composite_commutator_apply(
    a: CompositeOperator, b: CompositeOperator, field: SpinorField
) -> SpinorField:
    return a.apply(b.apply(field)) - b.apply(a.apply(field))


def composite_expectation(op: CompositeOperator, field: SpinorField) -> complex:
    return spinor_inner_product(field, op.apply(field))


def physical_spin(model: DeformationModel, grid: Grid, axis: int) -> CompositeOperator:
    """ŝ_axis = g(x̂²) ⊗ σ_axis/2."""
    g = multiplication_op(grid, model.g(grid.radius_squared), "g")
    return CompositeOperator(g, auxiliary_spin(axis))


def _check_3d(grid: Grid):
    if grid.dims != 3:
        raise UsageError(f"Angular momentum needs a 3D grid, got {grid.dims}D.")


def angular_momentum_op(model: DeformationModel, grid: Grid, axis: int) -> GridOperator:
    """l̂_axis = ε_axis,j,k ½{x̂^j, p̂^k}."""
    _check_3d(grid)
    grid.check_axis(axis)
    total = None
    for j, k in product(AXES, AXES):
        eps = levi_civita(axis, j, k)
        if not eps:
            continue
        x_j = position_op(grid, j)
        p_k = physical_momentum_op(model, grid, k)
        term = (0.5 * eps) * (x_j @ p_k + p_k @ x_j)
        total = term if total is None else total + term
    return GridOperator(grid, total.operator, True, f"l{axis + 1}")


def auxiliary_angular_momentum_op(
    model: DeformationModel, grid: Grid, axis: int
) -> GridOperator:
    """L̂_axis = l̂_axis/g(x̂²)."""
    inverse_g = multiplication_op(grid, 1.0 / model.g(grid.radius_squared), "1/g")
    op = inverse_g @ angular_momentum_op(model, grid, axis)
    return GridOperator(grid, op.operator, True, f"L{axis + 1}")


@dataclass(frozen=True)
class CouplingReport:
    """B-linear couplings of [σ·(p̂ - eA)]² at first order in α, per unit -e.

    ``spin[k]`` is the coefficient of -eσ_k and ``orbital`` the spin-free
    coefficient. The spin coefficient decomposes exactly as ``g_part`` =
    g(x̂²)B_k plus the ḡ-induced ``anisotropic`` = α(x̂²B_k - x̂_k(x̂·B));
    ``remainder`` = spin - g_part is informational.
    """

    field: tuple[float, float, float]
    alpha: float
    spin: tuple[OperatorPolynomial, ...]
    orbital: OperatorPolynomial
    g_part: tuple[OperatorPolynomial, ...]
    anisotropic: tuple[OperatorPolynomial, ...]
    spin_residual: tuple[OperatorPolynomial, ...]
    orbital_residual: OperatorPolynomial
    remainder: tuple[OperatorPolynomial, ...]

    @property
    def passed(self) -> bool:
        return all(r.is_zero for r in self.spin_residual) and self.orbital_residual.is_zero

    def spin_ratio(self, position: Sequence[float], alpha: float | None = None) -> float:
        """(spin coefficient · B)/|B|² at a point: g along B, 1 + 2αx̂² across it."""
        alpha = self.alpha if alpha is None else alpha
        b = np.asarray(self.field, dtype=float)
        b2 = float(b @ b)
        if b2 == 0.0:
            raise UsageError("spin_ratio needs a non-zero field.")
        value = sum(b[k] * self.spin[k].evaluate(position, alpha) for k in AXES)
        return float(np.real(value)) / b2

    def to_checks(self) -> list[IdentityCheck]:
        checks = [
            IdentityCheck("magnetic-spin", f"sigma{k + 1}", self.spin_residual[k])
            for k in AXES
        ]
        checks.append(IdentityCheck("magnetic-orbital", "l.B", self.orbital_residual))
        checks += [
            IdentityCheck(
                "magnetic-spin-g-only", f"sigma{k + 1}", self.remainder[k], required_zero=False
            )
            for k in AXES
        ]
        return checks

    def to_dict(self) -> dict:
        def graded(poly: OperatorPolynomial) -> list[dict]:
            return [dict(term, b_order=1) for term in poly.term_list()]

        return {
            "field": list(self.field),
            "alpha": self.alpha,
            "passed": self.passed,
            "spin": [graded(p) for p in self.spin],
            "orbital": graded(self.orbital),
            "anisotropic": [graded(p) for p in self.anisotropic],
            "spin_residual": [graded(p) for p in self.spin_residual],
            "orbital_residual": graded(self.orbital_residual),
            "remainder": [graded(p) for p in self.remainder],
        }


def _vector_potential_poly(axis: int, field_axis: int) -> OperatorPolynomial:
    """A_axis for a unit field along field_axis, symmetric gauge A = ½B×x̂."""
    total = zero_poly()
    for m in AXES:
        eps = levi_civita(axis, field_axis, m)
        if eps:
            total = total + position_poly(m).scale(HALF * QQ_I(eps, 0))
    return total


@lru_cache(maxsize=None)
def _basis_couplings(field_axis: int, max_alpha_order: int):
    p = [physical_momentum_poly(a, max_alpha_order) for a in AXES]
    a = [_vector_potential_poly(j, field_axis) for j in AXES]
    spin = []
    for k in AXES:
        total = zero_poly()
        for i, j in product(AXES, AXES):
            eps = levi_civita(i, j, k)
            if eps:
                total = total + (
                    normal_order_product(p[i], a[j], max_alpha_order)
                    + normal_order_product(a[i], p[j], max_alpha_order)
                ).scale(IMAG_UNIT * QQ_I(eps, 0))
        spin.append(total)
    orbital = zero_poly()
    for i in AXES:
        orbital = orbital + anticommutator_poly(p[i], a[i], max_alpha_order)
    return tuple(spin), orbital


def magnetic_coupling_coefficient(
    model: DeformationModel, field: Sequence[float], gauge: str = "symmetric"
) -> CouplingReport:
    """Extract the spin and orbital couplings to a uniform magnetic field.

    Charge and mass are 1. The field enters exactly through the decimal form of
    each component.

    Raises:
        UnsupportedConfigurationError: For any gauge other than ``symmetric``.
    """
    if gauge != "symmetric":
        raise UnsupportedConfigurationError(
            f"Only the symmetric gauge is supported, got {gauge!r}."
        )
    if len(field) != 3:
        raise UsageError(f"Field must have 3 components, got {len(field)}.")
    order = 1
    b = [coefficient(sympy.Rational(str(v))) for v in field]

    spin = [zero_poly() for _ in AXES]
    orbital = zero_poly()
    for l in AXES:
        basis_spin, basis_orbital = _basis_couplings(l, order)
        spin = [s + t.scale(b[l]) for s, t in zip(spin, basis_spin)]
        orbital = orbital + basis_orbital.scale(b[l])

    g = g_poly()
    r2 = radius_squared_poly()
    x_dot_b = zero_poly()
    for l in AXES:
        x_dot_b = x_dot_b + position_poly(l).scale(b[l])
    g_part = tuple(g.scale(b[k]) for k in AXES)
    anisotropic = tuple(
        normal_order_product(
            alpha_poly(), r2.scale(b[k]) - ordered_product(position_poly(k), x_dot_b)
        )
        for k in AXES
    )
    l_dot_b = zero_poly()
    for l in AXES:
        l_dot_b = l_dot_b + angular_momentum_poly(l, order).scale(b[l])

    report = CouplingReport(
        field=tuple(float(v) for v in field),
        alpha=model.alpha,
        spin=tuple(spin),
        orbital=orbital,
        g_part=g_part,
        anisotropic=anisotropic,
        spin_residual=tuple(s - gp - an for s, gp, an in zip(spin, g_part, anisotropic)),
        orbital_residual=orbital - l_dot_b,
        remainder=tuple(s - gp for s, gp in zip(spin, g_part)),
    )
    logging.getLogger(__name__).info(
        "Magnetic coupling field=%s, passed=%s", report.field, report.passed
    )
    return report
