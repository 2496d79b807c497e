"""Two-qubit states, CHSH correlations with positional factors, and Tsirelson bounds.

Qubit basis states |0⟩, |1⟩ are the σ_3 eigenvectors with eigenvalues +1, -1;
two-qubit vectors are ordered |00⟩, |01⟩, |10⟩, |11⟩. Correlations of the
deformed theory carry one positional factor ⟨g⟩ per party.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Sequence
import logging
import math

import astropy.units as u
import numpy as np

from ..errors import DomainError, InvalidStateError, InvalidWeightsError, UsageError
from .deformation import DeformationModel
from .grid import WaveFunction, expectation, position_squared_op
from .spin import PAULI, SPIN_IDENTITY

POSITIVITY_TOLERANCE = 1.0e-10
"""Most negative eigenvalue accepted for a density matrix."""

UNIT_TOLERANCE = 1.0e-12
SIMPLEX_TOLERANCE = 1.0e-12
STATIONARITY_TOLERANCE = 1.0e-10
"""Block-gradient residual below which an optimizer restart is certified."""

TSIRELSON = 2.0 * math.sqrt(2.0)

PAULI_BASIS = (SPIN_IDENTITY.entries,) + tuple(s.entries for s in PAULI)
"""σ_0 = 1, σ_1, σ_2, σ_3."""

_PAIR_BASIS = np.array(
    [[np.kron(si, sj) for sj in PAULI_BASIS] for si in PAULI_BASIS]
)


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Density matrix ρ_AB = ¼Σ α_ij σ_i⊗σ_j.

    Raises:
        InvalidStateError: Unless ρ is 4×4, Hermitian, of unit trace and positive
            within -1e-10.
    """

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidStateError(f"Density matrix must be 4x4, got {rho.shape}.")
        if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=POSITIVITY_TOLERANCE):
            raise InvalidStateError("Density matrix is not Hermitian.")
        rho = 0.5 * (rho + rho.conj().T)
        trace = np.trace(rho).real
        if abs(trace - 1.0) > POSITIVITY_TOLERANCE:
            raise InvalidStateError(f"Density matrix trace is {trace}, expected 1.")
        smallest = float(np.linalg.eigvalsh(rho)[0])
        if smallest < -POSITIVITY_TOLERANCE:
            raise InvalidStateError(f"Density matrix has eigenvalue {smallest:g} < 0.")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def pauli_coeffs(self) -> np.ndarray:
        return pauli_expand(self)

    @property
    def correlation_matrix(self) -> np.ndarray:
        """T_ij = α_ij for i, j in 1..3."""
        return self.pauli_coeffs[1:, 1:]

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)

    def to_dict(self) -> dict:
        return {"pauli_coeffs": self.pauli_coeffs.tolist()}


def _as_rho(state: "TwoQubitState | np.ndarray") -> np.ndarray:
    if isinstance(state, TwoQubitState):
        return state.rho
    return np.asarray(state, dtype=complex)


def pauli_expand(state: "TwoQubitState | np.ndarray") -> np.ndarray:
    """α_ij = Tr[ρ(σ_i⊗σ_j)] as a real 4×4 array."""
    rho = _as_rho(state)
    return np.einsum("ijab,ba->ij", _PAIR_BASIS, rho).real


def pauli_assemble(coeffs: Sequence[Sequence[float]]) -> TwoQubitState:
    """Inverse of :func:`pauli_expand`.

    Raises:
        InvalidStateError: When the coefficients do not describe a valid state.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (4, 4):
        raise InvalidStateError(f"Pauli coefficients must be 4x4, got {coeffs.shape}.")
    return TwoQubitState(0.25 * np.einsum("ij,ijab->ab", coeffs, _PAIR_BASIS))


class BellState(Enum):
    PHI_PLUS = "phi+"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_MINUS = "phi-"

    @classmethod
    def parse(cls, value: "BellState | str") -> "BellState":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key == "singlet":
            return cls.PSI_MINUS
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise UsageError(f"Unknown Bell state {value!r}.")


_S = 1.0 / math.sqrt(2.0)
_BELL_VECTORS = {
    BellState.PHI_PLUS: np.array([_S, 0.0, 0.0, _S]),
    BellState.PSI_PLUS: np.array([0.0, _S, _S, 0.0]),
    BellState.PSI_MINUS: np.array([0.0, _S, -_S, 0.0]),
    BellState.PHI_MINUS: np.array([_S, 0.0, 0.0, -_S]),
}

BELL_DIAGONAL_ORDER = (
    BellState.PHI_PLUS,
    BellState.PSI_PLUS,
    BellState.PSI_MINUS,
    BellState.PHI_MINUS,
)
"""Order of the weights p_0..p_3."""


def bell_state(kind: "BellState | str") -> TwoQubitState:
    vector = _BELL_VECTORS[BellState.parse(kind)]
    return TwoQubitState(np.outer(vector, vector.conj()))


@dataclass(frozen=True)
class BellDiagonalWeights:
    """Simplex weights (p_0..p_3) over (Φ+, Ψ+, Ψ-, Φ-)."""

    p: tuple[float, float, float, float]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        if len(p) != 4:
            raise InvalidWeightsError(f"Expected 4 weights, got {len(p)}.")
        if any(not math.isfinite(v) or v < 0.0 for v in p):
            raise InvalidWeightsError(f"Weights must be non-negative, got {p}.")
        if abs(sum(p) - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidWeightsError(f"Weights must sum to 1, got {sum(p)!r}.")
        object.__setattr__(self, "p", p)


def bell_diagonal(weights: "BellDiagonalWeights | Sequence[float]") -> TwoQubitState:
    if not isinstance(weights, BellDiagonalWeights):
        weights = BellDiagonalWeights(tuple(weights))
    rho = sum(
        w * np.outer(_BELL_VECTORS[kind], _BELL_VECTORS[kind])
        for w, kind in zip(weights.p, BELL_DIAGONAL_ORDER)
    )
    return TwoQubitState(rho)


def _unit_vector(value, label: str) -> tuple[float, float, float]:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise UsageError(f"{label} must be a 3-vector, got shape {v.shape}.")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOLERANCE:
        raise UsageError(f"{label} must have unit norm, got |{label}|={np.linalg.norm(v)!r}.")
    return tuple(float(c) for c in v)


@dataclass(frozen=True)
class ChshSettings:
    """Bloch directions of the observables n·σ, two per party."""

    a: tuple[float, float, float]
    a_prime: tuple[float, float, float]
    b: tuple[float, float, float]
    b_prime: tuple[float, float, float]

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, _unit_vector(getattr(self, name), name))

    @classmethod
    def normalized(cls, a, a_prime, b, b_prime) -> "ChshSettings":
        return cls(*(np.asarray(v, float) / np.linalg.norm(v) for v in (a, a_prime, b, b_prime)))

    def key(self) -> tuple[float, ...]:
        """Flattened vectors, used for deterministic tie-breaks."""
        return self.a + self.a_prime + self.b + self.b_prime

    def to_dict(self) -> dict:
        return {
            "a": list(self.a),
            "a_prime": list(self.a_prime),
            "b": list(self.b),
            "b_prime": list(self.b_prime),
        }


@dataclass(frozen=True)
class PositionalFactors:
    """⟨g(x̂²)⟩ of each party's positional state."""

    g_a: float = 1.0
    g_b: float = 1.0

    def __post_init__(self):
        for name in ("g_a", "g_b"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0.0:
                raise DomainError(f"Positional factor {name} must be positive, got {value}.")
            object.__setattr__(self, name, value)

    @property
    def product(self) -> float:
        return self.g_a * self.g_b

    def to_dict(self) -> dict:
        return {"g_a": self.g_a, "g_b": self.g_b}


UNDEFORMED = PositionalFactors()


def standard_settings() -> ChshSettings:
    """a = ẑ, a′ = x̂, b = -(ẑ+x̂)/√2, b′ = (ẑ-x̂)/√2."""
    return ChshSettings(
        (0.0, 0.0, 1.0),
        (1.0, 0.0, 0.0),
        (-_S, 0.0, -_S),
        (-_S, 0.0, _S),
    )


def _observable(direction: Sequence[float]) -> np.ndarray:
    return sum(c * s.entries for c, s in zip(direction, PAULI))


def correlation(
    rho: TwoQubitState,
    obs_a: Sequence[float],
    obs_b: Sequence[float],
    factors: PositionalFactors = UNDEFORMED,
) -> float:
    """C = g_A g_B Tr[ρ (a·σ)⊗(b·σ)]."""
    a = _unit_vector(obs_a, "obs_a")
    b = _unit_vector(obs_b, "obs_b")
    value = np.trace(rho.rho @ np.kron(_observable(a), _observable(b))).real
    return factors.product * float(value)


def chsh_value(
    rho: TwoQubitState, settings: ChshSettings, factors: PositionalFactors = UNDEFORMED
) -> float:
    """S = |C(a,b) - C(a,b′) + C(a′,b) + C(a′,b′)|."""
    s = settings
    return abs(
        correlation(rho, s.a, s.b, factors)
        - correlation(rho, s.a, s.b_prime, factors)
        + correlation(rho, s.a_prime, s.b, factors)
        + correlation(rho, s.a_prime, s.b_prime, factors)
    )


def chsh_closed_form(
    state: "TwoQubitState | BellDiagonalWeights | np.ndarray",
) -> float:
    """Closed-form S at :func:`standard_settings` with no positional factors.

    A state or a 4×4 Pauli coefficient array gives √2|α₁₁+α₃₃|; Bell-diagonal
    weights give 2√2|p₂-p₀|.
    """
    if isinstance(state, BellDiagonalWeights):
        return TSIRELSON * abs(state.p[2] - state.p[0])
    coeffs = state.pauli_coeffs if isinstance(state, TwoQubitState) else np.asarray(state)
    if coeffs.shape != (4, 4):
        raise UsageError(f"Pauli coefficients must be 4x4, got {coeffs.shape}.")
    return math.sqrt(2.0) * abs(float(coeffs[1, 1] + coeffs[3, 3]))


def positional_factor(model: DeformationModel, psi: WaveFunction) -> float:
    """⟨g(x̂²)⟩ = 1 + α⟨x̂²⟩ by quadrature on the packet's grid."""
    if model.alpha == 0.0:
        return 1.0
    model.check_grid(psi.grid)
    x2 = expectation(position_squared_op(psi.grid), psi).real
    return 1.0 + model.alpha * x2


def gaussian_second_moment(center: Sequence[float], width: float, dims: int) -> float:
    """⟨x̂²⟩ = |d|² + dims·σ² of a Gaussian packet."""
    d = np.atleast_1d(np.asarray(center, dtype=float))
    return float(d @ d) + dims * width**2


def gaussian_positional_factor(
    model: DeformationModel, center: Sequence[float], width: float, dims: int = 3
) -> float:
    """Analytic ⟨g⟩ of a Gaussian packet, for packets wider than any guarded grid.

    Raises:
        DomainError: When ⟨g⟩ <= 0.
    """
    value = 1.0 + model.alpha * gaussian_second_moment(center, width, dims)
    if value <= 0.0:
        raise DomainError(f"Positional factor {value:g} is not positive.")
    return value


def tsirelson_bound(factors: PositionalFactors = UNDEFORMED) -> float:
    """2√2 g_A g_B."""
    return TSIRELSON * factors.product


def deformed_tsirelson(model: DeformationModel, psi_a: WaveFunction, psi_b: WaveFunction) -> float:
    """S^EUP_max = 2√2⟨g(x̂_A²)⟩⟨g(x̂_B²)⟩."""
    return tsirelson_bound(
        PositionalFactors(positional_factor(model, psi_a), positional_factor(model, psi_b))
    )


def perturbative_tsirelson(model: DeformationModel, x2_a: float, x2_b: float) -> float:
    """2√2(1 + α(⟨x̂_A²⟩ + ⟨x̂_B²⟩)), the first-order form of the deformed bound."""
    return TSIRELSON * (1.0 + model.alpha * (x2_a + x2_b))


@dataclass(frozen=True)
class ThresholdReport:
    """Distance from A at which the deformed bound drops to 2.

    ``x2`` is ⟨x̂_B²⟩* in internal units, ``distance`` its square root and
    ``distance_si`` the same in meters. All are None without a threshold.
    """

    alpha: float
    has_threshold: bool
    x2: float | None = None
    distance: float | None = None
    distance_si: u.Quantity | None = None

    def to_dict(self) -> dict:
        return {
            "alpha_tilde": self.alpha,
            "has_threshold": self.has_threshold,
            "threshold_x2": self.x2,
            "distance": self.distance,
            "distance_m": (
                None if self.distance_si is None else float(self.distance_si.to_value(u.m))
            ),
        }


def classical_threshold(model: DeformationModel) -> ThresholdReport:
    """⟨x̂_B²⟩* = (1 - 1/√2)/|α| in the frame of A; explicit no-threshold for α >= 0."""
    if model.alpha >= 0.0:
        return ThresholdReport(model.alpha, False)
    x2 = (1.0 - 1.0 / math.sqrt(2.0)) / abs(model.alpha)
    distance = math.sqrt(x2)
    return ThresholdReport(
        model.alpha, True, x2, distance, (distance * model.length_scale_m) * u.m
    )


def horodecki_bound(rho: TwoQubitState, factors: PositionalFactors = UNDEFORMED) -> float:
    """2√(m₁+m₂)·g_A·g_B, m₁ ≥ m₂ the two largest eigenvalues of TᵀT."""
    t = rho.correlation_matrix
    m = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return 2.0 * math.sqrt(max(m[0] + m[1], 0.0)) * factors.product


@dataclass(frozen=True)
class OptimizationResult:
    """Best settings found by :func:`optimize_settings`.

    ``certified`` is False when the best restart did not reach the
    stationarity tolerance within the iteration budget.
    """

    settings: ChshSettings
    value: float
    certified: bool
    restarts: int
    iterations: int
    residual: float
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "settings": self.settings.to_dict(),
            "value": self.value,
            "certified": self.certified,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "residual": self.residual,
            "seed": self.seed,
        }


def _block_step(v: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, float]:
    """Projected ascent step of one unit vector; returns the new vector and its residual."""
    n = float(np.linalg.norm(grad))
    if n == 0.0:
        return v, 0.0
    direction = grad / n
    residual = n * float(np.linalg.norm(v - direction))
    if v @ direction <= 0.0:
        return direction, residual
    moved = v + (direction - (v @ direction) * v)
    return moved / np.linalg.norm(moved), residual


def _ascend(
    t: np.ndarray, vectors: list[np.ndarray], max_iterations: int
) -> tuple[list[np.ndarray], int, float]:
    a, ap, b, bp = vectors
    residual = math.inf
    for iteration in range(1, max_iterations + 1):
        a, ra = _block_step(a, t @ (b - bp))
        ap, rap = _block_step(ap, t @ (b + bp))
        b, rb = _block_step(b, t.T @ (a + ap))
        bp, rbp = _block_step(bp, t.T @ (ap - a))
        residual = max(ra, rap, rb, rbp)
        if residual <= STATIONARITY_TOLERANCE:
            return [a, ap, b, bp], iteration, residual
    return [a, ap, b, bp], max_iterations, residual


def optimize_settings(
    rho: TwoQubitState,
    factors: PositionalFactors = UNDEFORMED,
    restarts: int = 32,
    max_iterations: int = 2000,
    seed: int | None = 0,
) -> OptimizationResult:
    """Maximize S over the four Bloch vectors by projected-gradient ascent.

    Each restart draws its start from its own child of
    ``np.random.SeedSequence(seed)``; ties between restarts go to the
    lexicographically smaller settings.

    Args:
        rho (TwoQubitState): The state.
        factors (PositionalFactors): Per-party positional factors.
        restarts (int): Number of random restarts.
        max_iterations (int): Block-sweep budget per restart.
        seed (int, optional): Root seed.

    Returns:
        OptimizationResult: Best settings, S, and the certification flag.
    """
    if restarts < 1 or max_iterations < 1:
        raise UsageError("restarts and max_iterations must be positive.")
    logger = logging.getLogger(__name__)
    t = rho.correlation_matrix
    best = None
    for index, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        start = [v / np.linalg.norm(v) for v in rng.normal(size=(4, 3))]
        vectors, iterations, residual = _ascend(t, start, max_iterations)
        settings = ChshSettings.normalized(*vectors)
        value = chsh_value(rho, settings, factors)
        logger.debug(
            "Optimizer restart=%d, iterations=%d, residual=%.3g, value=%.15g",
            index,
            iterations,
            residual,
            value,
        )
        candidate = (-value, settings.key(), settings, iterations, residual)
        if best is None or candidate[:2] < best[:2]:
            best = candidate

    _, _, settings, iterations, residual = best
    result = OptimizationResult(
        settings,
        -best[0],
        residual <= STATIONARITY_TOLERANCE,
        restarts,
        iterations,
        residual,
        seed,
    )
    if not result.certified:
        logger.warning(
            "Optimizer not certified value=%.15g, residual=%.3g, max_iterations=%d",
            result.value,
            residual,
            max_iterations,
        )
    return result


def _plane_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    c = np.cross(n, helper)
    c /= np.linalg.norm(c)
    return c, np.cross(n, c)


def _safe_unit(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0.0 else fallback


def grid_search_settings(
    rho: TwoQubitState, factors: PositionalFactors = UNDEFORMED, resolution: int = 128
) -> tuple[ChshSettings, float]:
    """Grid search over the normal n of the plane spanned by b ± b′.

    For a fixed plane the best value is 2√(tr M - nᵀMn)·g_A·g_B with M = TᵀT;
    the settings are then built explicitly and S is evaluated by trace.

    This uses the same TᵀT reduction as :func:`horodecki_bound`. Agreement with
    it checks the settings construction and the trace evaluation but does not
    confirm the bound independently; sampling random settings against
    :func:`chsh_value` does.
    """
    if resolution < 2:
        raise UsageError(f"resolution must be >= 2, got {resolution}.")
    t = rho.correlation_matrix
    m = t.T @ t
    theta = np.linspace(0.0, 0.5 * np.pi, resolution)
    phi = np.linspace(0.0, 2.0 * np.pi, 2 * resolution, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    normals = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    ).reshape(-1, 3)
    objective = np.trace(m) - np.einsum("ni,ij,nj->n", normals, m, normals)
    n = normals[int(np.argmax(objective))]

    c, c_prime = _plane_basis(n)
    weights = np.array([np.linalg.norm(t @ c), np.linalg.norm(t @ c_prime)])
    cos_phi, sin_phi = _safe_unit(weights, np.array([1.0, 0.0]))
    b = cos_phi * c + sin_phi * c_prime
    b_prime = cos_phi * c - sin_phi * c_prime
    a = _safe_unit(t @ (b - b_prime), c)
    a_prime = _safe_unit(t @ (b + b_prime), c_prime)
    settings = ChshSettings.normalized(a, a_prime, b, b_prime)
    return settings, chsh_value(rho, settings, factors)


def random_two_qubit_state(rng: np.random.Generator, rank: int = 4) -> TwoQubitState:
    """Random density matrix GG†/Tr(GG†) from a complex Ginibre matrix G."""
    if not 1 <= rank <= 4:
        raise UsageError(f"rank must be in 1..4, got {rank}.")
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return TwoQubitState(rho / np.trace(rho).real)


def product_state(bloch_a: Sequence[float], bloch_b: Sequence[float]) -> TwoQubitState:
    """ρ_A⊗ρ_B with ρ = ½(1 + r·σ), |r| <= 1."""

    def qubit(r):
        r = np.asarray(r, dtype=float)
        if r.shape != (3,) or np.linalg.norm(r) > 1.0 + UNIT_TOLERANCE:
            raise InvalidStateError(f"Invalid Bloch vector {r.tolist()}.")
        return 0.5 * (PAULI_BASIS[0] + _observable(r))

    return TwoQubitState(np.kron(qubit(bloch_a), qubit(bloch_b)))
