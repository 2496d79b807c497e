"""EUP model g(x̂²) = 1 + αx̂², ḡ(x̂²) = 2αx̂² and its realization on a grid."""
from dataclasses import dataclass
from enum import Enum
import logging
import math

import astropy.constants as const
import astropy.units as u
import numpy as np

from ..errors import ConfigurationError, UsageError
from .grid import (
    Grid,
    GridOperator,
    WaveFunction,
    auxiliary_momentum_op,
    commutator_apply,
    commutator_op,
    expectation,
    momentum_power_op,
    multiplication_op,
    norm,
    position_op,
    std_dev,
)
from .series_algebra import OperatorPolynomial, adjoint, to_complex

PERTURBATIVE_GUARD = 0.1
"""Upper bound on |α̃| and on |α̃|·(extent/2)² for any grid paired with a model."""


@dataclass(frozen=True)
class DeformationModel:
    """Deformation parameter in internal units plus the length scale it is measured in.

    ``alpha`` is α̃ = α·L², dimensionless; the physical α is ``alpha_si``.
    Constructing the dataclass directly performs no guard check, use
    :func:`model_from_alpha` for validated models.
    """

    alpha: float
    length_scale_m: float = 1.0

    def g(self, x2):
        """g(x̂²) = 1 + αx̂²."""
        return 1.0 + self.alpha * x2

    def gbar(self, x2):
        """ḡ(x̂²) = 2αx̂²."""
        return 2.0 * self.alpha * x2

    @property
    def gbar_over_radius_squared(self) -> float:
        return 2.0 * self.alpha

    @property
    def alpha_si(self) -> u.Quantity:
        return (self.alpha / self.length_scale_m**2) * u.m**-2

    def grid_guard(self, grid: Grid) -> float:
        return abs(self.alpha) * (0.5 * grid.extent) ** 2

    def check_grid(self, grid: Grid):
        """Raise ConfigurationError unless |α̃|·(extent/2)² < 0.1."""
        value = self.grid_guard(grid)
        if value >= PERTURBATIVE_GUARD:
            raise ConfigurationError(
                f"Perturbative guard violated: |alpha|*(extent/2)^2={value:g} "
                f">= {PERTURBATIVE_GUARD} (alpha={self.alpha:g}, extent={grid.extent:g})."
            )


def model_from_alpha(alpha_tilde: float, length_scale_m: float = 1.0) -> DeformationModel:
    """Validated model from the dimensionless α̃ and the length scale L in meters.

    Raises:
        ConfigurationError: When |α̃| >= 0.1 or L <= 0.
    """
    if not math.isfinite(alpha_tilde) or abs(alpha_tilde) >= PERTURBATIVE_GUARD:
        raise ConfigurationError(
            f"|alpha_tilde| must be < {PERTURBATIVE_GUARD}, got {alpha_tilde}."
        )
    if not math.isfinite(length_scale_m) or length_scale_m <= 0:
        raise ConfigurationError(
            f"length_scale_m must be positive, got {length_scale_m}."
        )
    return DeformationModel(float(alpha_tilde), float(length_scale_m))


def model_from_si(alpha_per_m2, length_scale_m: float) -> DeformationModel:
    """Validated model from α in m⁻² (float or astropy Quantity)."""
    alpha = u.Quantity(alpha_per_m2, u.m**-2).to_value(u.m**-2)
    return model_from_alpha(alpha * length_scale_m**2, length_scale_m)


def physical_momentum_op(model: DeformationModel, grid: Grid, axis: int) -> GridOperator:
    """Symmetrized p̂_axis = ½{g(x̂²), P_axis} + ½{(ḡ/x̂²) x̂_axis x̂_j, P_j}.

    At α = 0 this is the auxiliary momentum itself.
    """
    grid.check_axis(axis)
    aux = auxiliary_momentum_op(grid, axis)
    if model.alpha == 0.0:
        return aux
    model.check_grid(grid)

    g = multiplication_op(grid, model.g(grid.radius_squared), "g")
    op = 0.5 * (g @ aux + aux @ g)
    for j in range(grid.dims):
        weight = multiplication_op(
            grid,
            model.gbar_over_radius_squared * grid.coordinate(axis) * grid.coordinate(j),
            f"w{axis + 1}{j + 1}",
        )
        p_j = auxiliary_momentum_op(grid, j)
        op = op + 0.5 * (weight @ p_j + p_j @ weight)
    return GridOperator(grid, op.operator, True, f"p{axis + 1}")


def xp_commutator_residual(
    model: DeformationModel, psi: WaveFunction, i: int, j: int
) -> float:
    """‖[x̂^i,p̂_j]ψ - i(gδ^i_j + ḡx̂^ix̂_j/x̂²)ψ‖/‖ψ‖, in the cancelled 2α form."""
    grid = psi.grid
    grid.check_axis(i)
    grid.check_axis(j)
    observed = commutator_apply(
        position_op(grid, i), physical_momentum_op(model, grid, j), psi
    )
    factor = model.gbar_over_radius_squared * grid.coordinate(i) * grid.coordinate(j)
    if i == j:
        factor = factor + model.g(grid.radius_squared)
    expected = WaveFunction(grid, 1j * factor * psi.amplitudes)
    return norm(observed - expected) / norm(psi)


def jacobi_residual(
    model: DeformationModel, psi: WaveFunction, i: int, j: int, k: int
) -> float:
    """‖([p̂_i,[p̂_j,x̂^k]] + [p̂_j,[x̂^k,p̂_i]] + [x̂^k,[p̂_i,p̂_j]])ψ‖/‖ψ‖."""
    grid = psi.grid
    p_i = physical_momentum_op(model, grid, i)
    p_j = physical_momentum_op(model, grid, j)
    x_k = position_op(grid, k)
    total = (
        commutator_apply(p_i, commutator_op(p_j, x_k), psi)
        + commutator_apply(p_j, commutator_op(x_k, p_i), psi)
        + commutator_apply(x_k, commutator_op(p_i, p_j), psi)
    )
    return norm(total) / norm(psi)


def uncertainty_gap(model: DeformationModel, psi: WaveFunction, axis: int) -> float:
    """Δx^axis·Δp_axis - ½(1 + 3α(Δx^axis)²) on a 3D grid.

    Non-negative for α >= 0; for α < 0 the closed form is not a lower bound,
    see :func:`robertson_gap`.
    """
    grid = psi.grid
    if grid.dims != 3:
        raise UsageError(f"uncertainty_gap needs a 3D grid, got {grid.dims}D.")
    dx = std_dev(position_op(grid, axis), psi)
    dp = std_dev(physical_momentum_op(model, grid, axis), psi)
    gap = dx * dp - 0.5 * (1.0 + 3.0 * model.alpha * dx**2)
    logging.getLogger(__name__).debug(
        "Uncertainty gap axis=%d, dx=%.12g, dp=%.12g, gap=%.6g", axis, dx, dp, gap
    )
    return gap


def robertson_gap(model: DeformationModel, psi: WaveFunction, i: int, j: int) -> float:
    """Δx^iΔp_j - ½|⟨[x̂^i,p̂_j]⟩|, non-negative for every state and either sign of α."""
    grid = psi.grid
    x_i = position_op(grid, i)
    p_j = physical_momentum_op(model, grid, j)
    bound = 0.5 * abs(expectation(commutator_op(x_i, p_j), psi))
    return std_dev(x_i, psi) * std_dev(p_j, psi) - bound


class ScaleKind(Enum):
    MINIMAL_MOMENTUM = "minimal_momentum"
    MAXIMAL_LENGTH = "maximal_length"
    NONE = "none"


@dataclass(frozen=True)
class ScaleReport:
    """Characteristic scale of a model.

    Args:
        kind (ScaleKind): Which scale, NONE for α = 0.
        value (float): In internal units (1/L for momenta, L for lengths); None if empty.
        si (Quantity): In m⁻¹ for momenta, m for lengths; None if empty.
        si_momentum (Quantity): ħ times a minimal wavenumber, in kg·m/s.
    """

    kind: ScaleKind
    value: float | None = None
    si: u.Quantity | None = None
    si_momentum: u.Quantity | None = None

    @property
    def is_empty(self) -> bool:
        return self.kind is ScaleKind.NONE

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "si_value": None if self.si is None else float(self.si.value),
            "si_unit": None if self.si is None else str(self.si.unit),
            "si_momentum_kg_m_s": None
            if self.si_momentum is None
            else float(self.si_momentum.to_value(u.kg * u.m / u.s)),
        }


def characteristic_scales(model: DeformationModel) -> ScaleReport:
    """Minimal momentum √(3α) for α > 0, maximal length 1/√(3|α|) for α < 0."""
    logger = logging.getLogger(__name__)
    if model.alpha > 0:
        value = math.sqrt(3.0 * model.alpha)
        si = (value / model.length_scale_m) / u.m
        report = ScaleReport(
            ScaleKind.MINIMAL_MOMENTUM,
            value,
            si,
            (si * const.hbar).to(u.kg * u.m / u.s),
        )
    elif model.alpha < 0:
        value = 1.0 / math.sqrt(3.0 * abs(model.alpha))
        report = ScaleReport(
            ScaleKind.MAXIMAL_LENGTH, value, (value * model.length_scale_m) * u.m
        )
    else:
        report = ScaleReport(ScaleKind.NONE)
    logger.debug("Characteristic scale kind=%s, value=%s", report.kind.value, report.value)
    return report


def realize_on_grid(poly: OperatorPolynomial, grid: Grid, alpha: float) -> GridOperator:
    """Grid operator of an exact polynomial with α set to a number."""
    unused = {a for a in poly.axes_used() if a >= grid.dims}
    if unused:
        raise UsageError(
            f"Polynomial uses axes {sorted(unused)} absent from a {grid.dims}D grid."
        )
    total = multiplication_op(grid, np.zeros(grid.shape), "0")
    for m, c in poly.sorted_terms():
        weight = to_complex(c) * alpha**m.alpha_order
        positional = np.ones(grid.shape)
        for a in range(grid.dims):
            if m.x_powers[a]:
                positional = positional * grid.coordinate(a) ** m.x_powers[a]
        term = multiplication_op(grid, weight * positional, m.label(), hermitian=False)
        total = total + term @ momentum_power_op(grid, m.p_powers[: grid.dims])
    return GridOperator(grid, total.operator, poly == adjoint(poly), str(poly))
