"""Scenario documents, parameter sweeps and result tables."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial
from itertools import product
from typing import Any, Callable, Mapping
import json
import logging
import math
import sys

import numpy as np
import pandas as pd

from .configuration import read_document
from .errors import ConfigurationError, EupBellError, ScenarioValidationError
from .quantum import bell, deformation, grid as qgrid, series_algebra, spin

FACTOR_METHODS = ("quadrature", "analytic", "explicit")
OUTPUT_FORMATS = ("csv", "json")
FLOAT_FORMAT = "%.15g"

GAP_TOLERANCE = 1.0e-6
XP_TOLERANCE = 1.0e-6
FACTOR_TOLERANCE = 1.0e-12
CLOSED_FORM_TOLERANCE = 1.0e-10
BOUND_TOLERANCE = 1.0e-9
PERTURBATIVE_TOLERANCE = 1.0e-10
HORODECKI_TOLERANCE = 1.0e-6
GRID_SEARCH_TOLERANCE = 1.0e-3


class ScenarioKind(Enum):
    VERIFY_ALGEBRA = "verify-algebra"
    UNCERTAINTY_SWEEP = "uncertainty-sweep"
    CHSH = "chsh"
    THRESHOLD = "threshold"
    OPTIMIZE = "optimize"


SWEEP_PARAMETERS = {
    ScenarioKind.VERIFY_ALGEBRA: (),
    ScenarioKind.UNCERTAINTY_SWEEP: ("alpha_tilde", "width", "width_a", "offset"),
    ScenarioKind.CHSH: (
        "alpha_tilde",
        "separation",
        "width",
        "width_a",
        "width_b",
        "offset",
    ),
    ScenarioKind.THRESHOLD: ("alpha_tilde", "alpha_per_m2", "length_scale_m"),
    ScenarioKind.OPTIMIZE: (
        "alpha_tilde",
        "separation",
        "width",
        "width_a",
        "width_b",
        "offset",
    ),
}
"""Parameters each kind accepts on a sweep axis."""


@dataclass(frozen=True)
class GridSpec:
    dims: int = 3
    points_per_axis: int = 32
    extent: float = 18.0

    def build(self) -> qgrid.Grid:
        return qgrid.make_grid(self.dims, self.points_per_axis, self.extent)


@dataclass(frozen=True)
class PacketSpec:
    center: tuple[float, ...]
    width: float


@dataclass(frozen=True)
class SweepAxis:
    """``steps`` intervals from ``start`` to ``stop``, i.e. steps + 1 points."""

    parameter: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        if self.steps == 0:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps + 1)


@dataclass(frozen=True)
class Scenario:
    """One run: what to compute, on which model, grid and packets, over which sweep."""

    kind: ScenarioKind
    alpha_tilde: float = 0.0
    length_scale_m: float = 1.0
    alpha_per_m2: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    packet_a: PacketSpec = field(default_factory=lambda: PacketSpec((0.0, 0.0, 0.0), 0.9))
    packet_b: PacketSpec = field(default_factory=lambda: PacketSpec((0.0, 0.0, 0.0), 0.9))
    factor_method: str = "quadrature"
    factors: tuple[float, float] | None = None
    state: Any = field(default_factory=lambda: {"bell": "psi-"})
    settings: Any = "standard"
    sweep: tuple[SweepAxis, ...] = ()
    seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"
    max_alpha_order: int = 1
    axis: int = 0
    magnetic_field: tuple[float, float, float] = (0.0, 0.0, 1.0)
    states: int | None = None
    restarts: int = 32
    max_iterations: int = 2000
    grid_resolution: int = 128
    workers: int = 1

    def model(self) -> deformation.DeformationModel:
        return deformation.model_from_alpha(self.alpha_tilde, self.length_scale_m)

    def uses_grid(self) -> bool:
        if self.kind is ScenarioKind.UNCERTAINTY_SWEEP:
            return True
        return (
            self.kind in (ScenarioKind.CHSH, ScenarioKind.OPTIMIZE)
            and self.factor_method == "quadrature"
        )

    def at(self, point: Mapping[str, float]) -> "Scenario":
        """The scenario with one sweep point's values substituted."""
        s = self
        dims = s.grid.dims
        for name, value in point.items():
            value = float(value)
            if name == "alpha_tilde":
                s = replace(s, alpha_tilde=value, alpha_per_m2=None)
            elif name == "alpha_per_m2":
                s = replace(s, alpha_per_m2=value, alpha_tilde=value * s.length_scale_m**2)
            elif name == "length_scale_m":
                alpha = s.alpha_tilde if s.alpha_per_m2 is None else s.alpha_per_m2 * value**2
                s = replace(s, length_scale_m=value, alpha_tilde=alpha)
            elif name == "separation":
                s = replace(s, packet_b=replace(s.packet_b, center=_along_x(value, dims)))
            elif name == "offset":
                s = replace(s, packet_a=replace(s.packet_a, center=_along_x(value, dims)))
            elif name == "width":
                s = replace(
                    s,
                    packet_a=replace(s.packet_a, width=value),
                    packet_b=replace(s.packet_b, width=value),
                )
            elif name == "width_a":
                s = replace(s, packet_a=replace(s.packet_a, width=value))
            elif name == "width_b":
                s = replace(s, packet_b=replace(s.packet_b, width=value))
            else:
                raise ConfigurationError(f"Unknown sweep parameter {name!r}.")
        return s


def _along_x(value: float, dims: int) -> tuple[float, ...]:
    return (value,) + (0.0,) * (dims - 1)


class _Reader:
    """Typed access to a scenario document, collecting problems instead of raising."""

    def __init__(self):
        self.problems: list[str] = []

    def section(self, doc: Mapping, key: str) -> Mapping:
        value = doc.get(key) or {}
        if not isinstance(value, Mapping):
            self.problems.append(f"{key} must be a mapping, got {value!r}")
            return {}
        return value

    def real(self, doc: Mapping, key: str, default):
        value = doc.get(key, default)
        if value is None:
            return None
        try:
            return float(value)
        except (TypeError, ValueError):
            self.problems.append(f"{key}={value!r} is not a number")
            return default

    def integer(self, doc: Mapping, key: str, default):
        value = doc.get(key, default)
        if value is None:
            return None
        try:
            number = float(value)
            if not number.is_integer() or isinstance(value, bool):
                raise ValueError
            return int(number)
        except (TypeError, ValueError):
            self.problems.append(f"{key}={value!r} is not an integer")
            return default

    def vector(self, doc: Mapping, key: str, default) -> tuple[float, ...]:
        value = doc.get(key, default)
        try:
            return tuple(float(v) for v in np.atleast_1d(np.asarray(value, dtype=object)))
        except (TypeError, ValueError):
            self.problems.append(f"{key}={value!r} is not a vector of numbers")
            return tuple(default)


def scenario_from_dict(document: Mapping, kind: ScenarioKind | None = None) -> Scenario:
    """Parse a scenario document.

    ``kind`` is the subcommand the document is run under; the document may omit
    its own ``kind`` then, but must not contradict it.

    Raises:
        ScenarioValidationError: Listing every unreadable field.
    """
    if not isinstance(document, Mapping):
        raise ScenarioValidationError(["scenario document must be a mapping"])
    r = _Reader()

    declared = document.get("kind", None if kind is None else kind.value)
    try:
        declared = ScenarioKind(declared)
    except ValueError:
        r.problems.append(
            f"kind={declared!r} is not one of " + ", ".join(k.value for k in ScenarioKind)
        )
        declared = kind or ScenarioKind.CHSH
    if kind is not None and declared is not kind:
        r.problems.append(f"document kind={declared.value} cannot run as {kind.value}")
    kind = declared

    model = r.section(document, "model")
    length = r.real(model, "length_scale_m", 1.0)
    alpha_per_m2 = r.real(model, "alpha_per_m2", None)
    alpha_tilde = r.real(model, "alpha_tilde", 0.0)
    if alpha_per_m2 is not None:
        if "alpha_tilde" in model:
            r.problems.append("model sets both alpha_tilde and alpha_per_m2")
        alpha_tilde = alpha_per_m2 * length**2

    g = r.section(document, "grid")
    grid = GridSpec(
        r.integer(g, "dims", 3),
        r.integer(g, "points_per_axis", 32),
        r.real(g, "extent", 18.0),
    )

    packets = r.section(document, "packets")
    origin = (0.0,) * grid.dims

    def packet(name: str) -> PacketSpec:
        spec = r.section(packets, name)
        return PacketSpec(r.vector(spec, "center", origin), r.real(spec, "width", 0.9))

    sweep = []
    for index, entry in enumerate(document.get("sweep") or []):
        if not isinstance(entry, Mapping):
            r.problems.append(f"sweep[{index}] must be a mapping")
            continue
        sweep.append(
            SweepAxis(
                str(entry.get("parameter")),
                r.real(entry, "start", 0.0),
                r.real(entry, "stop", 0.0),
                r.integer(entry, "steps", 0),
            )
        )

    factors = None
    if "factors" in document:
        spec = r.section(document, "factors")
        factors = (r.real(spec, "g_a", 1.0), r.real(spec, "g_b", 1.0))

    output = r.section(document, "output")
    optimizer = r.section(document, "optimizer")
    scenario = Scenario(
        kind=kind,
        alpha_tilde=alpha_tilde,
        length_scale_m=length,
        alpha_per_m2=alpha_per_m2,
        grid=grid,
        packet_a=packet("a"),
        packet_b=packet("b"),
        factor_method=str(
            document.get("factor_method", "explicit" if "factors" in document else "quadrature")
        ),
        factors=factors,
        state=document.get("state", {"bell": "psi-"}),
        settings=document.get("settings", "standard"),
        sweep=tuple(sweep),
        seed=r.integer(document, "seed", 0),
        output_path=output.get("path"),
        output_format=str(output.get("format", "csv")),
        max_alpha_order=r.integer(document, "max_alpha_order", 1),
        axis=r.integer(document, "axis", 0),
        magnetic_field=r.vector(document, "field", (0.0, 0.0, 1.0)),
        states=r.integer(document, "states", None),
        restarts=r.integer(optimizer, "restarts", 32),
        max_iterations=r.integer(optimizer, "max_iterations", 2000),
        grid_resolution=r.integer(optimizer, "grid_resolution", 128),
        workers=r.integer(document, "workers", 1),
    )
    if r.problems:
        raise ScenarioValidationError(r.problems)
    return scenario


def load_scenario(path: str, kind: ScenarioKind | None = None) -> Scenario:
    """Load a JSON (or YAML) scenario file.

    Raises:
        ConfigurationError: When the file cannot be read or parsed.
        ScenarioValidationError: When fields are malformed.
    """
    document = read_document(path)
    logging.getLogger(__name__).info("Loaded scenario path=%s", path)
    return scenario_from_dict(document, kind)


def with_overrides(
    scenario: Scenario,
    seed: int | None = None,
    out: str | None = None,
    fmt: str | None = None,
) -> Scenario:
    """Command-line values take precedence over the document."""
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if out is not None:
        changes["output_path"] = out
    if fmt is not None:
        changes["output_format"] = fmt
    return replace(scenario, **changes)


def sweep_points(scenario: Scenario) -> list[dict[str, float]]:
    """Cartesian product of all sweep axes; a single empty point without a sweep."""
    if not scenario.sweep:
        return [{}]
    names = [a.parameter for a in scenario.sweep]
    return [
        dict(zip(names, (float(v) for v in values)))
        for values in product(*(a.values() for a in scenario.sweep))
    ]


def build_state(descriptor, seed: int = 0) -> bell.TwoQubitState:
    """Two-qubit state from a descriptor.

    Accepted forms: a Bell state name, ``{"bell": name}``, ``{"weights": [p0..p3]}``,
    ``{"pauli": 4x4}``, ``{"product": {"a": r_a, "b": r_b}}`` and
    ``{"random": {"rank": n}}`` (drawn from ``seed``).
    """
    if isinstance(descriptor, str):
        return bell.bell_state(descriptor)
    if not isinstance(descriptor, Mapping) or len(descriptor) != 1:
        raise ConfigurationError(f"Invalid state descriptor {descriptor!r}.")
    (key, value), = descriptor.items()
    if key == "bell":
        return bell.bell_state(value)
    if key == "weights":
        return bell.bell_diagonal([float(v) for v in value])
    if key == "pauli":
        return bell.pauli_assemble([[float(v) for v in row] for row in value])
    if key == "product":
        return bell.product_state(
            [float(v) for v in value["a"]], [float(v) for v in value["b"]]
        )
    if key == "random":
        rank = int((value or {}).get("rank", 4)) if isinstance(value, Mapping) else int(value)
        return bell.random_two_qubit_state(np.random.default_rng(seed), rank)
    raise ConfigurationError(f"Unknown state descriptor {key!r}.")


def build_settings(descriptor) -> bell.ChshSettings:
    if descriptor == "standard":
        return bell.standard_settings()
    if not isinstance(descriptor, Mapping):
        raise ConfigurationError(f"Invalid settings {descriptor!r}.")
    try:
        vectors = [
            np.asarray([float(c) for c in descriptor[k]])
            for k in ("a", "a_prime", "b", "b_prime")
        ]
    except (KeyError, TypeError, ValueError) as ex:
        raise ConfigurationError(f"Invalid settings {descriptor!r}.") from ex
    if any(v.shape != (3,) or not np.linalg.norm(v) > 0 for v in vectors):
        raise ConfigurationError(f"Settings need four non-zero 3-vectors, got {descriptor!r}.")
    return bell.ChshSettings.normalized(*vectors)


def _state_label(descriptor) -> str:
    return json.dumps(descriptor, sort_keys=True, separators=(",", ":"))


def _check_packet(s: Scenario, name: str, packet: PacketSpec, problems: list[str], where: str):
    dims = s.grid.dims
    if len(packet.center) != dims:
        problems.append(f"{where}packet {name} center {packet.center} needs {dims} component(s)")
        return
    if not packet.width > 0:
        problems.append(f"{where}packet {name} width={packet.width} must be positive")
        return
    if s.uses_grid():
        half = 0.5 * s.grid.extent
        for axis, c in enumerate(packet.center):
            if abs(c) + qgrid.TRUNCATION_SIGMAS * packet.width > half:
                problems.append(
                    f"{where}packet {name} center={c} width={packet.width} on axis {axis} "
                    f"violates the {qgrid.TRUNCATION_SIGMAS:g}-sigma truncation guard"
                )


def _check_point(s: Scenario, problems: list[str], where: str):
    try:
        model = s.model()
    except ConfigurationError as ex:
        problems.append(f"{where}{ex}")
        return
    if s.kind in (ScenarioKind.VERIFY_ALGEBRA, ScenarioKind.THRESHOLD):
        return
    if s.kind is not ScenarioKind.UNCERTAINTY_SWEEP and s.factor_method == "explicit":
        try:
            bell.PositionalFactors(*s.factors)
        except (EupBellError, TypeError) as ex:
            problems.append(f"{where}factors: {ex}")
        return
    if s.uses_grid():
        try:
            model.check_grid(s.grid.build())
        except ConfigurationError as ex:
            problems.append(f"{where}{ex}")
    parties = [("a", s.packet_a)]
    if s.kind is not ScenarioKind.UNCERTAINTY_SWEEP:
        parties.append(("b", s.packet_b))
    for name, packet in parties:
        before = len(problems)
        _check_packet(s, name, packet, problems, where)
        if len(problems) == before and not s.uses_grid():
            try:
                bell.gaussian_positional_factor(model, packet.center, packet.width, s.grid.dims)
            except EupBellError as ex:
                problems.append(f"{where}packet {name}: {ex}")


def validate(scenario: Scenario):
    """Check every parameter and every sweep point against the guards.

    Raises:
        ScenarioValidationError: With one entry per offending parameter or point.
    """
    s = scenario
    problems = []
    if s.factor_method not in FACTOR_METHODS:
        problems.append(f"factor_method={s.factor_method!r} is not one of {FACTOR_METHODS}")
    if s.output_format not in OUTPUT_FORMATS:
        problems.append(f"format={s.output_format!r} is not one of {OUTPUT_FORMATS}")
    if s.workers is None or s.workers < 1:
        problems.append(f"workers={s.workers} must be >= 1")
    if s.uses_grid():
        try:
            s.grid.build()
        except ConfigurationError as ex:
            problems.append(str(ex))
    if s.kind is ScenarioKind.UNCERTAINTY_SWEEP:
        if s.grid.dims != 3:
            problems.append("uncertainty-sweep needs a 3D grid")
        elif s.axis not in range(3):
            problems.append(f"axis={s.axis} out of range")
    if s.kind is ScenarioKind.VERIFY_ALGEBRA:
        if s.max_alpha_order not in (0, 1, 2):
            problems.append(f"max_alpha_order={s.max_alpha_order} must be 0, 1 or 2")
        if len(s.magnetic_field) != 3:
            problems.append(f"field={s.magnetic_field} must have 3 components")
    if s.kind in (ScenarioKind.CHSH, ScenarioKind.OPTIMIZE):
        if s.states is None:
            try:
                build_state(s.state, s.seed)
            except (EupBellError, KeyError, TypeError, ValueError) as ex:
                problems.append(f"state: {ex}")
        elif s.states < 1:
            problems.append(f"states={s.states} must be >= 1")
        try:
            build_settings(s.settings)
        except EupBellError as ex:
            problems.append(f"settings: {ex}")
    if s.kind is ScenarioKind.OPTIMIZE:
        for name in ("restarts", "max_iterations", "grid_resolution"):
            if getattr(s, name) < 1:
                problems.append(f"optimizer {name}={getattr(s, name)} must be >= 1")

    allowed = SWEEP_PARAMETERS[s.kind]
    for a in s.sweep:
        if a.parameter not in allowed:
            problems.append(
                f"sweep parameter {a.parameter!r} not supported by {s.kind.value}"
                + (f" (allowed: {', '.join(allowed)})" if allowed else "")
            )
        if a.steps is None or a.steps < 0:
            problems.append(f"sweep {a.parameter} steps={a.steps} must be >= 0")

    if not problems:
        for point in sweep_points(s):
            where = f"point {point}: " if point else ""
            _check_point(s.at(point), problems, where)

    if problems:
        raise ScenarioValidationError(problems)


def _input_columns(s: Scenario) -> dict:
    row = {
        "kind": s.kind.value,
        "seed": s.seed,
        "alpha_tilde": s.alpha_tilde,
        "length_scale_m": s.length_scale_m,
        "alpha_per_m2": s.alpha_tilde / s.length_scale_m**2,
    }
    if s.kind in (ScenarioKind.VERIFY_ALGEBRA, ScenarioKind.THRESHOLD):
        return row
    row.update(
        {
            "factor_method": "quadrature" if s.uses_grid() else s.factor_method,
            "dims": s.grid.dims,
            "points_per_axis": s.grid.points_per_axis if s.uses_grid() else math.nan,
            "extent": s.grid.extent if s.uses_grid() else math.nan,
        }
    )
    for name, packet in (("a", s.packet_a), ("b", s.packet_b)):
        padded = tuple(packet.center) + (math.nan,) * (3 - len(packet.center))
        for axis, c in zip("xyz", padded):
            row[f"center_{name}_{axis}"] = c
        row[f"width_{name}"] = packet.width
    return row


def _factors(s: Scenario, model: deformation.DeformationModel):
    """Positional factors and ⟨x̂²⟩ of both parties; NaN moments for explicit factors."""
    if s.factor_method == "explicit":
        return bell.PositionalFactors(*s.factors), math.nan, math.nan
    if s.uses_grid():
        grid = s.grid.build()
        out = []
        for packet in (s.packet_a, s.packet_b):
            psi = qgrid.gaussian_packet(grid, packet.center, packet.width)
            x2 = qgrid.expectation(qgrid.position_squared_op(grid), psi).real
            out.append((bell.positional_factor(model, psi), x2))
    else:
        out = [
            (
                bell.gaussian_positional_factor(model, p.center, p.width, s.grid.dims),
                bell.gaussian_second_moment(p.center, p.width, s.grid.dims),
            )
            for p in (s.packet_a, s.packet_b)
        ]
    (g_a, x2_a), (g_b, x2_b) = out
    return bell.PositionalFactors(g_a, g_b), x2_a, x2_b


UNCERTAINTY_OUTPUTS = (
    "axis",
    "delta_x",
    "delta_p",
    "uncertainty_gap",
    "robertson_gap",
    "xp_residual",
    "gap_tolerance",
    "xp_tolerance",
    "gap_checked",
    "gap_ok",
    "robertson_ok",
    "xp_ok",
)


def _evaluate_uncertainty(s: Scenario) -> dict:
    model = s.model()
    grid = s.grid.build()
    psi = qgrid.gaussian_packet(grid, s.packet_a.center, s.packet_a.width)
    axis = s.axis
    dx = qgrid.std_dev(qgrid.position_op(grid, axis), psi)
    dp = qgrid.std_dev(deformation.physical_momentum_op(model, grid, axis), psi)
    gap = deformation.uncertainty_gap(model, psi, axis)
    robertson = deformation.robertson_gap(model, psi, axis, axis)
    xp = deformation.xp_commutator_residual(model, psi, axis, axis)
    gap_checked = model.alpha >= 0.0
    return {
        "axis": axis,
        "delta_x": dx,
        "delta_p": dp,
        "uncertainty_gap": gap,
        "robertson_gap": robertson,
        "xp_residual": xp,
        "gap_tolerance": GAP_TOLERANCE,
        "xp_tolerance": XP_TOLERANCE,
        "gap_checked": gap_checked,
        "gap_ok": (gap >= -GAP_TOLERANCE) if gap_checked else True,
        "robertson_ok": robertson >= -GAP_TOLERANCE,
        "xp_ok": xp <= XP_TOLERANCE,
    }


CHSH_OUTPUTS = (
    "state",
    "x2_a",
    "x2_b",
    "g_a",
    "g_b",
    "s_value",
    "s_undeformed",
    "s_max",
    "s_perturbative",
    "s_closed_form",
    "tolerance",
    "violates_chsh",
    "factor_ok",
    "bound_ok",
    "perturbative_ok",
    "closed_form_ok",
)


def _evaluate_chsh(s: Scenario) -> dict:
    model = s.model()
    factors, x2_a, x2_b = _factors(s, model)
    rho = build_state(s.state, s.seed)
    settings = build_settings(s.settings)
    value = bell.chsh_value(rho, settings, factors)
    undeformed = bell.chsh_value(rho, settings)
    s_max = bell.tsirelson_bound(factors)
    s_pert = bell.perturbative_tsirelson(model, x2_a, x2_b)
    closed = math.nan
    closed_ok = True
    if s.settings == "standard":
        descriptor = s.state.get("weights") if isinstance(s.state, Mapping) else None
        closed = bell.chsh_closed_form(
            bell.BellDiagonalWeights(tuple(float(v) for v in descriptor))
            if descriptor is not None
            else rho
        ) * factors.product
        closed_ok = abs(closed - value) <= CLOSED_FORM_TOLERANCE
    pert_allowance = (
        3.0 * bell.TSIRELSON * model.alpha**2 * x2_a * x2_b + PERTURBATIVE_TOLERANCE
    )
    perturbative_ok = math.isnan(s_pert) or abs(s_max - s_pert) <= pert_allowance
    return {
        "state": _state_label(s.state),
        "x2_a": x2_a,
        "x2_b": x2_b,
        "g_a": factors.g_a,
        "g_b": factors.g_b,
        "s_value": value,
        "s_undeformed": undeformed,
        "s_max": s_max,
        "s_perturbative": s_pert,
        "s_closed_form": closed,
        "tolerance": CLOSED_FORM_TOLERANCE,
        "violates_chsh": value > 2.0,
        "factor_ok": abs(value - factors.product * undeformed) <= FACTOR_TOLERANCE,
        "bound_ok": value <= s_max + BOUND_TOLERANCE,
        "perturbative_ok": perturbative_ok,
        "closed_form_ok": closed_ok,
    }


THRESHOLD_OUTPUTS = (
    "status",
    "threshold_x2",
    "distance",
    "distance_m",
    "s_at_threshold",
    "scale_kind",
    "scale_value",
    "scale_si",
    "scale_si_unit",
    "tolerance",
    "threshold_ok",
)


def _evaluate_threshold(s: Scenario) -> dict:
    model = s.model()
    report = bell.classical_threshold(model)
    scales = deformation.characteristic_scales(model)
    s_at = math.nan
    ok = True
    if report.has_threshold:
        s_at = bell.perturbative_tsirelson(model, 0.0, report.x2)
        ok = abs(s_at - 2.0) <= FACTOR_TOLERANCE
    scale = scales.to_dict()
    return {
        "status": "threshold" if report.has_threshold else "no-threshold",
        "threshold_x2": _or_nan(report.x2),
        "distance": _or_nan(report.distance),
        "distance_m": _or_nan(report.to_dict()["distance_m"]),
        "s_at_threshold": s_at,
        "scale_kind": scale["kind"],
        "scale_value": _or_nan(scale["value"]),
        "scale_si": _or_nan(scale["si_value"]),
        "scale_si_unit": scale["si_unit"] or "",
        "tolerance": FACTOR_TOLERANCE,
        "threshold_ok": ok,
    }


OPTIMIZE_OUTPUTS = (
    "state_index",
    "state",
    "g_a",
    "g_b",
    "s_optimized",
    "s_horodecki",
    "s_grid_search",
    "s_standard",
    "certified",
    "iterations",
    "residual",
    "horodecki_tolerance",
    "grid_search_tolerance",
    "horodecki_ok",
    "grid_search_ok",
    "standard_ok",
)


def _states(s: Scenario) -> list[tuple[int, str, bell.TwoQubitState]]:
    if s.states is None:
        return [(0, _state_label(s.state), build_state(s.state, s.seed))]
    children = np.random.SeedSequence(s.seed).spawn(s.states)
    return [
        (i, "random", bell.random_two_qubit_state(np.random.default_rng(child)))
        for i, child in enumerate(children)
    ]


def _evaluate_optimize(s: Scenario, index: int, label: str, rho: bell.TwoQubitState) -> dict:
    model = s.model()
    factors, _, _ = _factors(s, model)
    result = bell.optimize_settings(
        rho, factors, restarts=s.restarts, max_iterations=s.max_iterations, seed=s.seed
    )
    horodecki = bell.horodecki_bound(rho, factors)
    _, grid_value = bell.grid_search_settings(rho, factors, s.grid_resolution)
    standard = bell.chsh_value(rho, bell.standard_settings(), factors)
    return {
        "state_index": index,
        "state": label,
        "g_a": factors.g_a,
        "g_b": factors.g_b,
        "s_optimized": result.value,
        "s_horodecki": horodecki,
        "s_grid_search": grid_value,
        "s_standard": standard,
        "certified": result.certified,
        "iterations": result.iterations,
        "residual": result.residual,
        "horodecki_tolerance": HORODECKI_TOLERANCE,
        "grid_search_tolerance": GRID_SEARCH_TOLERANCE,
        "horodecki_ok": abs(result.value - horodecki) <= HORODECKI_TOLERANCE,
        "grid_search_ok": abs(result.value - grid_value) <= GRID_SEARCH_TOLERANCE,
        "standard_ok": result.value >= standard - BOUND_TOLERANCE,
    }


def _or_nan(value):
    return math.nan if value is None else value


@dataclass(frozen=True)
class ResultTable:
    """Rows of one run plus, for algebra runs, the report document."""

    scenario: Scenario
    frame: pd.DataFrame
    passed: bool
    document: dict | None = None

    def to_csv(self) -> str:
        return self.frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    def to_json(self) -> str:
        if self.document is not None:
            return json.dumps(self.document, indent=2, sort_keys=False) + "\n"
        rows = json.loads(self.frame.to_json(orient="records", double_precision=15))
        return (
            json.dumps(
                {
                    "kind": self.scenario.kind.value,
                    "seed": self.scenario.seed,
                    "passed": self.passed,
                    "rows": rows,
                },
                indent=2,
            )
            + "\n"
        )

    def render(self, fmt: str | None = None) -> str:
        fmt = fmt or self.scenario.output_format
        return self.to_json() if fmt == "json" else self.to_csv()


def write_table(table: ResultTable, path: str | None = None, fmt: str | None = None):
    """Write the table to ``path``, or to stdout when no path is given."""
    logger = logging.getLogger(__name__)
    path = path if path is not None else table.scenario.output_path
    text = table.render(fmt)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as file:
        file.write(text)
    logger.info("Wrote results path=%s, rows=%d", path, len(table.frame))


def _flag_columns(outputs: tuple[str, ...]) -> list[str]:
    return [c for c in outputs if c.endswith("_ok")]


def _guarded(evaluate: Callable[[], dict], point: Mapping) -> dict:
    logger = logging.getLogger(__name__)
    logger.debug("Evaluating sweep point %s", dict(point))
    try:
        out = evaluate()
        out["error"] = ""
    except (EupBellError, ValueError, ArithmeticError) as ex:
        logger.warning("Sweep point failed point=%s, error=%s", dict(point), ex)
        out = {"error": f"{type(ex).__name__}: {ex}"}
    return out


def _run_algebra(s: Scenario) -> ResultTable:
    report = series_algebra.verify_deformed_algebra(s.max_alpha_order)
    coupling = spin.magnetic_coupling_coefficient(s.model(), s.magnetic_field)
    report = series_algebra.AlgebraReport(
        report.max_alpha_order, report.checks + tuple(coupling.to_checks()), report.theta
    )
    frame = report.to_frame()
    frame.insert(0, "seed", s.seed)
    frame.insert(0, "kind", s.kind.value)
    document = dict(
        report.to_dict(), kind=s.kind.value, seed=s.seed, field=list(s.magnetic_field)
    )
    return ResultTable(s, frame, report.passed, document)


def run_scenario(scenario: Scenario) -> ResultTable:
    """Validate and run a scenario.

    Sweep points are evaluated concurrently on ``workers`` threads and emitted
    in sweep order. A failing point becomes a row with its ``error`` column set.

    Raises:
        ScenarioValidationError: When any parameter or sweep point violates a guard.
    """
    logger = logging.getLogger(__name__)
    validate(scenario)
    s = scenario
    logger.info(
        "Starting scenario kind=%s, seed=%d, sweep_points=%d",
        s.kind.value,
        s.seed,
        len(sweep_points(s)),
    )
    if s.kind is ScenarioKind.VERIFY_ALGEBRA:
        table = _run_algebra(s)
        logger.info("Finished scenario kind=%s, passed=%s", s.kind.value, table.passed)
        return table

    outputs, tasks = _tasks(s)
    with ThreadPoolExecutor(max_workers=s.workers) as pool:
        results = list(pool.map(lambda t: _guarded(t.evaluate, t.point), tasks))

    rows = [
        {**t.inputs, **{c: result.get(c, math.nan) for c in outputs}, "error": result["error"]}
        for t, result in zip(tasks, results)
    ]
    frame = pd.DataFrame(rows, columns=list(rows[0]))
    flags = _flag_columns(outputs)
    passed = bool((frame["error"] == "").all() and frame[flags].astype(bool).all(axis=None))
    logger.info(
        "Finished scenario kind=%s, rows=%d, passed=%s", s.kind.value, len(frame), passed
    )
    return ResultTable(s, frame, passed)


@dataclass(frozen=True)
class _Task:
    point: dict
    inputs: dict
    evaluate: Callable[[], dict]


def _tasks(s: Scenario) -> tuple[tuple[str, ...], list[_Task]]:
    """Output columns and one task per row, in sweep order."""
    tasks = []
    for point in sweep_points(s):
        at = s.at(point)
        inputs = _input_columns(at)
        if s.kind is ScenarioKind.UNCERTAINTY_SWEEP:
            tasks.append(_Task(point, inputs, partial(_evaluate_uncertainty, at)))
        elif s.kind is ScenarioKind.CHSH:
            tasks.append(_Task(point, inputs, partial(_evaluate_chsh, at)))
        elif s.kind is ScenarioKind.THRESHOLD:
            tasks.append(_Task(point, inputs, partial(_evaluate_threshold, at)))
        else:
            for index, label, rho in _states(at):
                tasks.append(
                    _Task(point, inputs, partial(_evaluate_optimize, at, index, label, rho))
                )
    outputs = {
        ScenarioKind.UNCERTAINTY_SWEEP: UNCERTAINTY_OUTPUTS,
        ScenarioKind.CHSH: CHSH_OUTPUTS,
        ScenarioKind.THRESHOLD: THRESHOLD_OUTPUTS,
        ScenarioKind.OPTIMIZE: OPTIMIZE_OUTPUTS,
    }[s.kind]
    return outputs, tasks
