"""Discretized position space: periodic grids, wavefunctions and matrix-free operators.

Grids, wavefunctions and operators are immutable once built. Operators wrap a
:class:`scipy.sparse.linalg.LinearOperator` acting on flattened amplitudes, so
3D operators are only ever applied, never materialized. Momenta are spectral
(discrete Fourier) derivatives on the periodic box.
"""
from dataclasses import dataclass
from functools import cached_property
from numbers import Number
from typing import Sequence
import logging
import math

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator

from ..errors import (
    ConfigurationError,
    DomainError,
    NumericalConsistencyError,
    UsageError,
)

TRUNCATION_SIGMAS = 8.0
"""A packet's centre must lie this many widths inside the box on every axis."""

VARIANCE_TOLERANCE = 1.0e-12
"""Most negative variance accepted as round-off."""


@dataclass(frozen=True)
class Grid:
    """Periodic box of ``points_per_axis**dims`` nodes spanning [-extent/2, extent/2)."""

    dims: int
    points_per_axis: int
    extent: float

    @property
    def spacing(self) -> float:
        return self.extent / self.points_per_axis

    @property
    def volume_element(self) -> float:
        return self.spacing**self.dims

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dims

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dims

    @cached_property
    def axis_coordinates(self) -> np.ndarray:
        """Node coordinates along a single axis."""
        return -0.5 * self.extent + self.spacing * np.arange(self.points_per_axis)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order along a single axis."""
        return 2.0 * np.pi * scipy.fft.fftfreq(self.points_per_axis, d=self.spacing)

    @cached_property
    def _mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.meshgrid(*([self.axis_coordinates] * self.dims), indexing="ij")
        )

    @cached_property
    def radius_squared(self) -> np.ndarray:
        """x̂² evaluated on every node."""
        return sum(c**2 for c in self._mesh)

    def coordinate(self, axis: int) -> np.ndarray:
        """Coordinate x^axis evaluated on every node."""
        self.check_axis(axis)
        return self._mesh[axis]

    def check_axis(self, axis: int):
        if not isinstance(axis, (int, np.integer)) or not 0 <= axis < self.dims:
            raise UsageError(f"Axis {axis} out of range for a {self.dims}D grid.")


def make_grid(dims: int, points_per_axis: int, extent: float) -> Grid:
    """Build a periodic grid.

    Args:
        dims (int): Number of spatial dimensions, 1 or 3.
        points_per_axis (int): Nodes per axis, a power of two of at least 8.
        extent (float): Full side of the box in internal length units.

    Raises:
        ConfigurationError: When any parameter is out of range.

    Returns:
        Grid: The grid.
    """
    if dims not in (1, 3):
        raise ConfigurationError(f"Grid dims must be 1 or 3, got {dims}.")
    if (
        isinstance(points_per_axis, bool)
        or not isinstance(points_per_axis, (int, np.integer))
        or points_per_axis < 8
        or points_per_axis & (points_per_axis - 1)
    ):
        raise ConfigurationError(
            f"points_per_axis must be a power of two >= 8, got {points_per_axis}."
        )
    if not math.isfinite(extent) or extent <= 0:
        raise ConfigurationError(f"Grid extent must be positive, got {extent}.")

    grid = Grid(int(dims), int(points_per_axis), float(extent))
    logging.getLogger(__name__).debug(
        "Built grid dims=%d, points=%d, extent=%g, spacing=%g",
        grid.dims,
        grid.points_per_axis,
        grid.extent,
        grid.spacing,
    )
    return grid


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitudes sampled on a grid.

    Factories return unit-norm states; the results of operator application are
    plain fields and are not renormalized.
    """

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        values = np.array(self.amplitudes, dtype=complex)
        if values.size != self.grid.size:
            raise UsageError(
                f"Expected {self.grid.size} amplitudes, got {values.size}."
            )
        values = values.reshape(self.grid.shape)
        values.setflags(write=False)
        object.__setattr__(self, "amplitudes", values)

    def norm(self) -> float:
        return norm(self)

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0.0:
            raise DomainError("Cannot normalize the zero field.")
        return WaveFunction(self.grid, self.amplitudes / n)

    def _operand(self, other: "WaveFunction") -> np.ndarray:
        _check_same_grid(self.grid, other.grid)
        return other.amplitudes

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes + self._operand(other))

    def __sub__(self, other: "WaveFunction") -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes - self._operand(other))

    def __neg__(self) -> "WaveFunction":
        return WaveFunction(self.grid, -self.amplitudes)

    def __mul__(self, scalar: Number) -> "WaveFunction":
        if not isinstance(scalar, Number):
            return NotImplemented
        return WaveFunction(self.grid, scalar * self.amplitudes)

    __rmul__ = __mul__


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise UsageError(f"Grid mismatch: {a} vs {b}.")


def _as_vector(grid: Grid, value, label: str) -> np.ndarray:
    vector = np.atleast_1d(np.asarray(value, dtype=float))
    if vector.shape != (grid.dims,):
        raise UsageError(
            f"{label} must have {grid.dims} component(s), got {vector.tolist()}."
        )
    return vector


def gaussian_packet(
    grid: Grid,
    center: float | Sequence[float],
    width: float,
    momentum: float | Sequence[float] | None = None,
) -> WaveFunction:
    """Normalized Gaussian ψ(x) ∝ exp(-|x-center|²/(4 width²) + i momentum·x).

    The per-axis standard deviation of |ψ|² is ``width``.

    Raises:
        DomainError: When the packet is not at least 8 widths inside the box.
    """
    center = _as_vector(grid, center, "center")
    if not width > 0:
        raise DomainError(f"Packet width must be positive, got {width}.")

    half = 0.5 * grid.extent
    for axis, c in enumerate(center):
        if abs(c) + TRUNCATION_SIGMAS * width > half:
            raise DomainError(
                f"Packet center={c} width={width} on axis {axis} violates the "
                f"{TRUNCATION_SIGMAS:g}-sigma truncation guard (half extent {half})."
            )

    exponent = sum((grid.coordinate(a) - c) ** 2 for a, c in enumerate(center))
    amplitudes = np.exp(-exponent / (4.0 * width**2)).astype(complex)
    if momentum is not None:
        k = _as_vector(grid, momentum, "momentum")
        phase = sum(k_a * grid.coordinate(a) for a, k_a in enumerate(k))
        amplitudes = amplitudes * np.exp(1j * phase)

    return WaveFunction(grid, amplitudes).normalized()


def uniform_state(grid: Grid) -> WaveFunction:
    """Constant amplitude over the whole box."""
    return WaveFunction(grid, np.ones(grid.shape, dtype=complex)).normalized()


def random_smooth_state(
    grid: Grid,
    rng: np.random.Generator,
    packets: int = 3,
    width_range: tuple[float, float] = (0.8, 1.0),
    center_spread: float = 0.5,
    max_momentum: float = 0.5,
) -> WaveFunction:
    """Superposition of a few boosted Gaussians with random complex weights."""
    total = np.zeros(grid.shape, dtype=complex)
    room = 0.5 * grid.extent - TRUNCATION_SIGMAS * width_range[1]
    spread = max(0.0, min(center_spread, room))
    for _ in range(packets):
        width = rng.uniform(*width_range)
        center = rng.uniform(-spread, spread, size=grid.dims)
        momentum = rng.uniform(-max_momentum, max_momentum, size=grid.dims)
        weight = complex(rng.normal(), rng.normal())
        total += weight * gaussian_packet(grid, center, width, momentum).amplitudes
    return WaveFunction(grid, total).normalized()


def inner_product(psi: WaveFunction, phi: WaveFunction) -> complex:
    """Riemann-sum ⟨ψ|φ⟩, conjugate-linear in ψ."""
    _check_same_grid(psi.grid, phi.grid)
    return complex(np.vdot(psi.amplitudes, phi.amplitudes) * psi.grid.volume_element)


def norm(psi: WaveFunction) -> float:
    return math.sqrt(max(inner_product(psi, psi).real, 0.0))


@dataclass(frozen=True, eq=False)
class GridOperator:
    """Matrix-free linear operator on the fields of one grid.

    Args:
        grid (Grid): The grid the operator acts on.
        operator (LinearOperator): Action on flattened amplitudes.
        hermitian (bool): Assertion that the operator is self-adjoint.
        name (str): Label used in logs and reports.
    """

    grid: Grid
    operator: LinearOperator
    hermitian: bool = False
    name: str = ""

    def apply(self, psi: WaveFunction) -> WaveFunction:
        _check_same_grid(self.grid, psi.grid)
        return WaveFunction(self.grid, self.operator.matvec(psi.amplitudes.ravel()))

    __call__ = apply

    def _other(self, other: "GridOperator") -> LinearOperator:
        _check_same_grid(self.grid, other.grid)
        return other.operator

    def __matmul__(self, other: "GridOperator") -> "GridOperator":
        return GridOperator(
            self.grid, self.operator @ self._other(other), False, self.name + other.name
        )

    def __add__(self, other: "GridOperator") -> "GridOperator":
        return GridOperator(
            self.grid,
            self.operator + self._other(other),
            self.hermitian and other.hermitian,
            f"({self.name}+{other.name})",
        )

    def __sub__(self, other: "GridOperator") -> "GridOperator":
        return GridOperator(
            self.grid,
            self.operator - self._other(other),
            self.hermitian and other.hermitian,
            f"({self.name}-{other.name})",
        )

    def __neg__(self) -> "GridOperator":
        return GridOperator(self.grid, -self.operator, self.hermitian, f"-{self.name}")

    def __mul__(self, scalar: Number) -> "GridOperator":
        if not isinstance(scalar, Number):
            return NotImplemented
        real = complex(scalar).imag == 0.0
        return GridOperator(
            self.grid,
            self.operator * scalar,
            self.hermitian and real,
            f"{scalar}*{self.name}",
        )

    __rmul__ = __mul__


def _linear_operator(grid: Grid, matvec) -> LinearOperator:
    return LinearOperator((grid.size, grid.size), matvec=matvec, dtype=complex)


def multiplication_op(
    grid: Grid, values: np.ndarray, name: str = "f", hermitian: bool | None = None
) -> GridOperator:
    """Pointwise multiplication by a field sampled on the grid."""
    values = np.array(values).reshape(-1)
    if values.size != grid.size:
        raise UsageError(f"Expected {grid.size} samples, got {values.size}.")
    if hermitian is None:
        hermitian = not np.iscomplexobj(values) or not np.any(values.imag)

    def matvec(v):
        return values * np.reshape(v, -1)

    return GridOperator(grid, _linear_operator(grid, matvec), bool(hermitian), name)


def identity_op(grid: Grid) -> GridOperator:
    return GridOperator(
        grid, _linear_operator(grid, lambda v: np.array(v, dtype=complex)), True, "1"
    )


def position_op(grid: Grid, axis: int) -> GridOperator:
    """x̂^axis."""
    return multiplication_op(grid, grid.coordinate(axis), name=f"x{axis + 1}")


def position_squared_op(grid: Grid) -> GridOperator:
    """x̂² = Σ_i x̂^i x̂^i."""
    return multiplication_op(grid, grid.radius_squared, name="x2")


def momentum_power_op(grid: Grid, powers: Sequence[int]) -> GridOperator:
    """Π_a P̂_a^powers[a] as a Fourier multiplier, P̂_a = -i∂/∂x^a."""
    if len(powers) < grid.dims or any(p < 0 for p in powers):
        raise UsageError(f"Invalid momentum powers {tuple(powers)}.")
    if any(powers[grid.dims :]):
        raise UsageError(f"Momentum powers {tuple(powers)} exceed {grid.dims}D grid.")
    axes = tuple(a for a in range(grid.dims) if powers[a])
    if not axes:
        return identity_op(grid)

    multiplier = np.ones(grid.shape)
    for a in axes:
        shape = [1] * grid.dims
        shape[a] = grid.points_per_axis
        multiplier = multiplier * (grid.wavenumbers ** powers[a]).reshape(shape)

    def matvec(v):
        field = np.reshape(v, grid.shape)
        out = scipy.fft.ifftn(multiplier * scipy.fft.fftn(field, axes=axes), axes=axes)
        return out.reshape(-1)

    label = "".join(f"P{a + 1}^{powers[a]}" for a in axes)
    return GridOperator(grid, _linear_operator(grid, matvec), True, label)


def auxiliary_momentum_op(grid: Grid, axis: int) -> GridOperator:
    """Auxiliary momentum P̂_axis = -i∂/∂x^axis by spectral differentiation."""
    grid.check_axis(axis)
    powers = [0] * grid.dims
    powers[axis] = 1
    op = momentum_power_op(grid, powers)
    return GridOperator(grid, op.operator, True, f"P{axis + 1}")


def commutator_op(a: GridOperator, b: GridOperator) -> GridOperator:
    """AB - BA as a composed operator."""
    return a @ b - b @ a


def commutator_apply(a: GridOperator, b: GridOperator, psi: WaveFunction) -> WaveFunction:
    """(AB - BA)ψ."""
    _check_same_grid(a.grid, b.grid)
    return a.apply(b.apply(psi)) - b.apply(a.apply(psi))


def expectation(a: GridOperator, psi: WaveFunction) -> complex:
    """⟨ψ|Aψ⟩."""
    return inner_product(psi, a.apply(psi))


def std_dev(a: GridOperator, psi: WaveFunction) -> float:
    """Standard deviation √(⟨A²⟩-⟨A⟩²) of a Hermitian operator.

    Raises:
        UsageError: When the operator is not flagged Hermitian.
        NumericalConsistencyError: When the variance is negative beyond round-off.
    """
    if not a.hermitian:
        raise UsageError(f"std_dev requires a Hermitian operator, got {a.name!r}.")
    a_psi = a.apply(psi)
    mean = inner_product(psi, a_psi).real
    variance = inner_product(a_psi, a_psi).real - mean**2
    if variance < -VARIANCE_TOLERANCE:
        raise NumericalConsistencyError(
            f"Negative variance {variance:g} for operator {a.name!r}."
        )
    return math.sqrt(max(variance, 0.0))


def hermiticity_residual(a: GridOperator, phi: WaveFunction, psi: WaveFunction) -> float:
    """|⟨φ|Aψ⟩ - ⟨Aφ|ψ⟩| relative to ‖Aψ‖‖φ‖."""
    a_psi = a.apply(psi)
    scale = norm(a_psi) * norm(phi)
    if scale == 0.0:
        return 0.0
    return abs(inner_product(phi, a_psi) - inner_product(a.apply(phi), psi)) / scale
