"""Exact operator polynomials in x̂ and P̂ with α-graded coefficients.

A polynomial is a sum of canonically ordered monomials ``α^n x^a P^b`` (every
position factor left of every auxiliary momentum factor) with Gaussian-rational
coefficients from :data:`sympy.polys.domains.QQ_I`. Products are brought back to
canonical order with the Heisenberg rule [x^i, P_j] = iδ^i_j, per axis::

    P^n x^m = Σ_k C(n,k) C(m,k) k! (-i)^k x^(m-k) P^(n-k)

so a residual that is reported as zero is exactly zero.

Axes are 0-based throughout; labels print them 1-based.
"""
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from itertools import product
from math import comb, factorial
from types import MappingProxyType
from typing import Mapping, NamedTuple, Sequence
import logging

import pandas as pd
import sympy
from sympy.polys.domains import QQ, QQ_I

from ..errors import ConfigurationError, UsageError

Coefficient = QQ_I.dtype
"""Exact complex coefficient with rational real and imaginary parts."""

AXES = (0, 1, 2)

ZERO = QQ_I.zero
ONE = QQ_I.one
IMAG_UNIT = QQ_I(0, 1)
HALF = QQ_I(QQ(1, 2), 0)

_MINUS_I_POWERS = (ONE, QQ_I(0, -1), QQ_I(-1, 0), IMAG_UNIT)


def coefficient(value) -> Coefficient:
    """Convert an int, Fraction, sympy number or float literal into an exact coefficient."""
    if isinstance(value, Coefficient):
        return value
    expr = sympy.sympify(value)
    if expr.has(sympy.Float):
        expr = sympy.nsimplify(expr, rational=True)
    return QQ_I.from_sympy(expr)


def conjugate(c: Coefficient) -> Coefficient:
    return QQ_I(c.x, -c.y)


def divide(a: Coefficient, b: Coefficient) -> Coefficient:
    """Exact a/b."""
    modulus = b.x * b.x + b.y * b.y
    if not modulus:
        raise ZeroDivisionError("Division by a zero coefficient.")
    numerator = a * conjugate(b)
    return QQ_I(numerator.x / modulus, numerator.y / modulus)


def to_complex(c: Coefficient) -> complex:
    return complex(QQ_I.to_sympy(c))


def levi_civita(i: int, j: int, k: int) -> int:
    return int(sympy.LeviCivita(i, j, k))


class OrderedMonomial(NamedTuple):
    """α^alpha_order · Π x_a^x_powers[a] · Π P_a^p_powers[a], x factors first."""

    x_powers: tuple[int, int, int] = (0, 0, 0)
    p_powers: tuple[int, int, int] = (0, 0, 0)
    alpha_order: int = 0

    @property
    def degree(self) -> int:
        return sum(self.x_powers) + sum(self.p_powers)

    @property
    def is_multiplicative(self) -> bool:
        """True when the monomial contains no momentum factor."""
        return not any(self.p_powers)

    def label(self) -> str:
        parts = []
        if self.alpha_order:
            parts.append(f"a^{self.alpha_order}" if self.alpha_order > 1 else "a")
        for name, powers in (("x", self.x_powers), ("P", self.p_powers)):
            for axis, power in enumerate(powers):
                if power:
                    parts.append(f"{name}{axis + 1}" + (f"^{power}" if power > 1 else ""))
        return "*".join(parts) or "1"


IDENTITY = OrderedMonomial()


class OperatorPolynomial:
    """Immutable map from :class:`OrderedMonomial` to exact coefficients.

    Zero coefficients are never stored, so the zero polynomial has no terms.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[OrderedMonomial, object] | None = None):
        cleaned = {}
        for monomial_, value in (terms or {}).items():
            c = coefficient(value)
            if c != ZERO:
                cleaned[OrderedMonomial(*monomial_)] = c
        self._terms = MappingProxyType(cleaned)

    @property
    def terms(self) -> Mapping[OrderedMonomial, Coefficient]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def _combine(self, other: "OperatorPolynomial", sign: Coefficient) -> "OperatorPolynomial":
        acc = dict(self._terms)
        for m, c in other._terms.items():
            acc[m] = acc.get(m, ZERO) + sign * c
        return OperatorPolynomial(acc)

    def __add__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self._combine(other, ONE)

    def __sub__(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return self._combine(other, -ONE)

    def __neg__(self) -> "OperatorPolynomial":
        return self.scale(-ONE)

    def scale(self, value) -> "OperatorPolynomial":
        c = coefficient(value)
        return OperatorPolynomial({m: c * v for m, v in self._terms.items()})

    @property
    def max_alpha_order(self) -> int:
        return max((m.alpha_order for m in self._terms), default=0)

    def grade(self, alpha_order: int) -> "OperatorPolynomial":
        """Terms of exactly the given α-order."""
        return OperatorPolynomial(
            {m: c for m, c in self._terms.items() if m.alpha_order == alpha_order}
        )

    @property
    def is_multiplicative(self) -> bool:
        return all(m.is_multiplicative for m in self._terms)

    def axes_used(self) -> set[int]:
        return {
            a
            for m in self._terms
            for a in AXES
            if m.x_powers[a] or m.p_powers[a]
        }

    def evaluate(self, position: Sequence[float], alpha: float) -> complex:
        """Value of a momentum-free polynomial at a point."""
        if not self.is_multiplicative:
            raise UsageError("Only momentum-free polynomials can be evaluated at a point.")
        if len(position) != 3:
            raise UsageError(f"Position must have 3 components, got {len(position)}.")
        total = 0j
        for m, c in self._terms.items():
            value = to_complex(c) * alpha**m.alpha_order
            for a in AXES:
                value *= position[a] ** m.x_powers[a]
            total += value
        return total

    def sorted_terms(self) -> list[tuple[OrderedMonomial, Coefficient]]:
        return sorted(self._terms.items(), key=lambda item: item[0])

    def term_list(self) -> list[dict]:
        """JSON-ready list of terms."""
        return [
            {
                "x_powers": list(m.x_powers),
                "p_powers": list(m.p_powers),
                "alpha_order": m.alpha_order,
                "coefficient": str(QQ_I.to_sympy(c)),
            }
            for m, c in self.sorted_terms()
        ]

    def to_sympy(self) -> sympy.Expr:
        """Noncommutative sympy expression, for display."""
        xs = sympy.symbols("x1:4", commutative=False)
        ps = sympy.symbols("P1:4", commutative=False)
        alpha = sympy.Symbol("alpha")
        expr = sympy.Integer(0)
        for m, c in self.sorted_terms():
            factors = [QQ_I.to_sympy(c), alpha**m.alpha_order]
            factors += [xs[a] ** m.x_powers[a] for a in AXES]
            factors += [ps[a] ** m.p_powers[a] for a in AXES]
            expr += sympy.Mul(*factors)
        return expr

    def __str__(self) -> str:
        return str(self.to_sympy())

    def __repr__(self) -> str:
        return f"OperatorPolynomial({self})"


def monomial(
    x_powers: Sequence[int] = (0, 0, 0),
    p_powers: Sequence[int] = (0, 0, 0),
    alpha_order: int = 0,
    value=1,
) -> OperatorPolynomial:
    return OperatorPolynomial(
        {OrderedMonomial(tuple(x_powers), tuple(p_powers), alpha_order): value}
    )


def constant(value, alpha_order: int = 0) -> OperatorPolynomial:
    return monomial(alpha_order=alpha_order, value=value)


def zero_poly() -> OperatorPolynomial:
    return OperatorPolynomial()


def identity_poly() -> OperatorPolynomial:
    return constant(1)


def alpha_poly(power: int = 1) -> OperatorPolynomial:
    """The deformation parameter α^power as a constant polynomial."""
    return constant(1, alpha_order=power)


def _check_axis(axis: int):
    if axis not in AXES:
        raise UsageError(f"Axis {axis} out of range, expected one of {AXES}.")


def _unit(axis: int) -> tuple[int, int, int]:
    _check_axis(axis)
    return tuple(1 if a == axis else 0 for a in AXES)


def position_poly(axis: int) -> OperatorPolynomial:
    return monomial(x_powers=_unit(axis))


def momentum_poly(axis: int) -> OperatorPolynomial:
    """Auxiliary momentum P_axis."""
    return monomial(p_powers=_unit(axis))


def radius_squared_poly() -> OperatorPolynomial:
    return reduce(
        lambda acc, a: acc + monomial(x_powers=tuple(2 * u for u in _unit(a))),
        AXES,
        zero_poly(),
    )


def g_poly() -> OperatorPolynomial:
    """g(x̂²) = 1 + αx̂²."""
    return identity_poly() + normal_order_product(alpha_poly(), radius_squared_poly())


def gbar_poly() -> OperatorPolynomial:
    """ḡ(x̂²) = 2αx̂²."""
    return normal_order_product(alpha_poly(), radius_squared_poly()).scale(2)


def gbar_over_radius_squared_poly() -> OperatorPolynomial:
    """ḡ(x̂²)/x̂² = 2α, the cancelled form of the removable singularity."""
    return alpha_poly().scale(2)


def g_prime_poly() -> OperatorPolynomial:
    """dg/d(x̂²) = α."""
    return alpha_poly()


def gbar_prime_poly() -> OperatorPolynomial:
    """dḡ/d(x̂²) = 2α."""
    return alpha_poly().scale(2)


def _reorder_coefficient(n: int, m: int, k: int) -> Coefficient:
    return QQ_I(comb(n, k) * comb(m, k) * factorial(k), 0) * _MINUS_I_POWERS[k % 4]


@lru_cache(maxsize=None)
def _ordered_monomial_product(
    left: OrderedMonomial, right: OrderedMonomial
) -> tuple[tuple[OrderedMonomial, Coefficient], ...]:
    per_axis = []
    for a in AXES:
        n, m = left.p_powers[a], right.x_powers[a]
        per_axis.append([(k, _reorder_coefficient(n, m, k)) for k in range(min(n, m) + 1)])

    order = left.alpha_order + right.alpha_order
    out = {}
    for combo in product(*per_axis):
        c = ONE
        for _, c_axis in combo:
            c = c * c_axis
        ks = [k for k, _ in combo]
        key = OrderedMonomial(
            tuple(left.x_powers[a] + right.x_powers[a] - ks[a] for a in AXES),
            tuple(left.p_powers[a] - ks[a] + right.p_powers[a] for a in AXES),
            order,
        )
        out[key] = out.get(key, ZERO) + c
    return tuple(out.items())


def _check_order(max_alpha_order: int | None):
    if max_alpha_order is not None and max_alpha_order < 0:
        raise UsageError(f"max_alpha_order must be >= 0, got {max_alpha_order}.")


def normal_order_product(
    left: OperatorPolynomial,
    right: OperatorPolynomial,
    max_alpha_order: int | None = None,
) -> OperatorPolynomial:
    """Canonically ordered product left·right.

    Args:
        left (OperatorPolynomial): Left factor.
        right (OperatorPolynomial): Right factor.
        max_alpha_order (int, optional): Drop terms above this α-order. None keeps all.

    Returns:
        OperatorPolynomial: The product with exact coefficients.
    """
    _check_order(max_alpha_order)
    acc = {}
    for ml, cl in left.terms.items():
        for mr, cr in right.terms.items():
            if (
                max_alpha_order is not None
                and ml.alpha_order + mr.alpha_order > max_alpha_order
            ):
                continue
            c = cl * cr
            for m, k in _ordered_monomial_product(ml, mr):
                acc[m] = acc.get(m, ZERO) + c * k
    return OperatorPolynomial(acc)


def ordered_product(
    *factors: OperatorPolynomial, max_alpha_order: int | None = None
) -> OperatorPolynomial:
    """Left-associated product of several factors."""
    return reduce(
        lambda acc, f: normal_order_product(acc, f, max_alpha_order),
        factors,
        identity_poly(),
    )


def commutator_poly(
    p: OperatorPolynomial, q: OperatorPolynomial, max_alpha_order: int | None = None
) -> OperatorPolynomial:
    """[P, Q] = PQ - QP."""
    return normal_order_product(p, q, max_alpha_order) - normal_order_product(
        q, p, max_alpha_order
    )


def anticommutator_poly(
    p: OperatorPolynomial, q: OperatorPolynomial, max_alpha_order: int | None = None
) -> OperatorPolynomial:
    """{P, Q} = PQ + QP."""
    return normal_order_product(p, q, max_alpha_order) + normal_order_product(
        q, p, max_alpha_order
    )


def adjoint(poly: OperatorPolynomial) -> OperatorPolynomial:
    """Formal adjoint: reverse every monomial, conjugate, and re-order."""
    acc = zero_poly()
    for m, c in poly.terms.items():
        reversed_ = normal_order_product(
            monomial(p_powers=m.p_powers, alpha_order=m.alpha_order),
            monomial(x_powers=m.x_powers),
        )
        acc = acc + reversed_.scale(conjugate(c))
    return acc


def truncate(poly: OperatorPolynomial, max_alpha_order: int) -> OperatorPolynomial:
    """Drop every term above the given α-order."""
    return OperatorPolynomial(
        {m: c for m, c in poly.terms.items() if m.alpha_order <= max_alpha_order}
    )


@lru_cache(maxsize=None)
def physical_momentum_poly(axis: int, max_alpha_order: int = 1) -> OperatorPolynomial:
    """Symmetrized physical momentum.

    p̂_i = ½{g(x̂²), P_i} + ½{(ḡ/x̂²) x̂_i x̂_j, P_j}, summed over j, which for
    g = 1 + αx̂² normal-orders to P_i + α(x̂²P_i + 2x̂_i(x̂·P) - 5i x̂_i).
    """
    _check_axis(axis)
    _check_order(max_alpha_order)
    p_axis = momentum_poly(axis)
    total = anticommutator_poly(g_poly(), p_axis, max_alpha_order).scale(HALF)
    for j in AXES:
        weight = ordered_product(
            gbar_over_radius_squared_poly(), position_poly(axis), position_poly(j)
        )
        total = total + anticommutator_poly(
            weight, momentum_poly(j), max_alpha_order
        ).scale(HALF)
    return truncate(total, max_alpha_order)


@lru_cache(maxsize=None)
def angular_momentum_poly(axis: int, max_alpha_order: int = 1) -> OperatorPolynomial:
    """l̂_i = ε_ijk ½{x̂^j, p̂^k}."""
    _check_axis(axis)
    total = zero_poly()
    for j, k in product(AXES, AXES):
        eps = levi_civita(axis, j, k)
        if eps:
            total = total + anticommutator_poly(
                position_poly(j), physical_momentum_poly(k, max_alpha_order), max_alpha_order
            ).scale(HALF * QQ_I(eps, 0))
    return total


def pair_angular_momentum_poly(
    i: int, j: int, max_alpha_order: int = 1
) -> OperatorPolynomial:
    """l̂_ij = x̂_i p̂_j - x̂_j p̂_i."""
    return normal_order_product(
        position_poly(i), physical_momentum_poly(j, max_alpha_order), max_alpha_order
    ) - normal_order_product(
        position_poly(j), physical_momentum_poly(i, max_alpha_order), max_alpha_order
    )


@dataclass(frozen=True)
class IdentityCheck:
    """One verified identity.

    Args:
        name (str): Identity family, e.g. ``position-momentum``.
        label (str): Instance label, e.g. ``[x1,p2]``.
        residual (OperatorPolynomial): LHS - RHS in canonical form.
        required_zero (bool): False for informational entries.
        fitted (Coefficient, optional): Fitted coefficient, for ansatz checks.
    """

    name: str
    label: str
    residual: OperatorPolynomial
    required_zero: bool = True
    fitted: Coefficient | None = None

    @property
    def passed(self) -> bool:
        return self.residual.is_zero or not self.required_zero

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "label": self.label,
            "passed": self.passed,
            "required_zero": self.required_zero,
            "fitted": None if self.fitted is None else str(QQ_I.to_sympy(self.fitted)),
            "residual_terms": self.residual.term_list(),
        }


@dataclass(frozen=True)
class AlgebraReport:
    """Outcome of :func:`verify_deformed_algebra`.

    Violations are reported through ``passed`` and the residual polynomials,
    never raised.
    """

    max_alpha_order: int
    checks: tuple[IdentityCheck, ...] = field(default_factory=tuple)
    theta: Coefficient | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str, label: str) -> IdentityCheck:
        for c in self.checks:
            if c.name == name and c.label == label:
                return c
        raise KeyError(f"No check {name} {label}")

    def to_dict(self) -> dict:
        return {
            "max_alpha_order": self.max_alpha_order,
            "passed": self.passed,
            "theta": None if self.theta is None else str(QQ_I.to_sympy(self.theta)),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "identity": [c.name for c in self.checks],
                "label": [c.label for c in self.checks],
                "max_alpha_order": [self.max_alpha_order] * len(self.checks),
                "residual_terms": [len(c.residual) for c in self.checks],
                "residual": [str(c.residual) if c.residual else "0" for c in self.checks],
                "required_zero": [c.required_zero for c in self.checks],
                "passed": [c.passed for c in self.checks],
            }
        )

    def to_text(self) -> str:
        header = f"max_alpha_order={self.max_alpha_order} passed={self.passed}"
        if self.theta is not None:
            header += f" theta={QQ_I.to_sympy(self.theta)}*alpha^2*x^2"
        return header + "\n" + self.to_frame().to_string(index=False)


def fit_theta(
    commutator: OperatorPolynomial, i: int, j: int
) -> tuple[Coefficient | None, OperatorPolynomial]:
    """Fit the O(α²) part of [p̂_i, p̂_j] to θ·α²x̂²·l̂_ji.

    Returns:
        tuple: The fitted coefficient (None when nothing fits) and the residual.
    """
    observed = commutator.grade(2)
    ansatz = normal_order_product(
        normal_order_product(alpha_poly(2), radius_squared_poly()),
        pair_angular_momentum_poly(j, i, max_alpha_order=0),
    )
    if ansatz.is_zero:
        return None, observed
    pivot, pivot_value = ansatz.sorted_terms()[0]
    fitted = divide(observed.terms.get(pivot, ZERO), pivot_value)
    if fitted == ZERO:
        return None, observed
    return fitted, observed - ansatz.scale(fitted)


def theta_poly(fitted: Coefficient) -> OperatorPolynomial:
    """θ(x̂²) = fitted·α²x̂²."""
    return normal_order_product(alpha_poly(2), radius_squared_poly()).scale(fitted)


def _kronecker(i: int, j: int) -> int:
    return 1 if i == j else 0


def verify_deformed_algebra(max_alpha_order: int = 1) -> AlgebraReport:
    """Verify the deformed position/momentum algebra exactly.

    Checks, each truncated at ``max_alpha_order``:

    - ``position-momentum``: [x̂^i,p̂_j]x̂² - i(g x̂²δ^i_j + ḡ x̂^i x̂_j).
    - ``momentum-hermiticity``: p̂_i - p̂_i†.
    - ``momentum-momentum``: [p̂_i,p̂_j] at O(α).
    - ``momentum-momentum-theta``: [p̂_i,p̂_j] at O(α²) against θ·l̂_ji (order 2 only).
    - ``jacobi``: [p̂_i,[p̂_j,x̂^k]] + [p̂_j,[x̂^k,p̂_i]] + [x̂^k,[p̂_i,p̂_j]].
    - ``closure-g`` / ``closure-gbar``: [f(x̂²),p̂_i] - 2i(g+ḡ)f′x̂_i.
    - ``reduced-jacobi`` (order 2 only):
      θ[x̂^k,l̂_ji] - (2(g+ḡ)g′ - gḡ/x̂²)(x̂_iδ^k_j - x̂_jδ^k_i).
    - ``deformed-so3``: [l̂_i,l̂_j] - iε_ijk g l̂_k.

    Args:
        max_alpha_order (int): 0, 1 or 2.

    Raises:
        ConfigurationError: For any other order.

    Returns:
        AlgebraReport: Residual polynomials of every check.
    """
    if max_alpha_order not in (0, 1, 2):
        raise ConfigurationError(
            f"max_alpha_order must be 0, 1 or 2, got {max_alpha_order}."
        )
    logger = logging.getLogger(__name__)
    order = max_alpha_order

    def prod(*factors):
        return ordered_product(*factors, max_alpha_order=order)

    def comm(a, b):
        return commutator_poly(a, b, order)

    x = [position_poly(a) for a in AXES]
    p = [physical_momentum_poly(a, order) for a in AXES]
    r2 = radius_squared_poly()
    g = truncate(g_poly(), order)
    gbar = truncate(gbar_poly(), order)
    i_unit = IMAG_UNIT
    pairs = [(i, j) for i, j in product(AXES, AXES) if i < j]
    checks: list[IdentityCheck] = []

    for i, j in product(AXES, AXES):
        lhs = prod(comm(x[i], p[j]), r2)
        rhs = prod(gbar, x[i], x[j])
        if i == j:
            rhs = rhs + prod(g, r2)
        checks.append(
            IdentityCheck(
                "position-momentum",
                f"[x{i + 1},p{j + 1}]",
                truncate(lhs - rhs.scale(i_unit), order),
            )
        )

    for i in AXES:
        checks.append(
            IdentityCheck("momentum-hermiticity", f"p{i + 1}", adjoint(p[i]) - p[i])
        )

    commutators = {(i, j): comm(p[i], p[j]) for i, j in pairs}
    for (i, j), c in commutators.items():
        checks.append(
            IdentityCheck("momentum-momentum", f"[p{i + 1},p{j + 1}]", truncate(c, 1))
        )

    theta = None
    if order >= 2:
        fits = []
        for (i, j), c in commutators.items():
            fitted, residual = fit_theta(c, i, j)
            fits.append(fitted)
            checks.append(
                IdentityCheck(
                    "momentum-momentum-theta",
                    f"[p{i + 1},p{j + 1}]",
                    residual,
                    fitted=fitted,
                )
            )
        if fits and fits[0] is not None and all(f == fits[0] for f in fits):
            theta = fits[0]

    for (i, j), k in product(pairs, AXES):
        jacobi = (
            comm(p[i], comm(p[j], x[k]))
            + comm(p[j], comm(x[k], p[i]))
            + comm(x[k], comm(p[i], p[j]))
        )
        checks.append(
            IdentityCheck("jacobi", f"({i + 1},{j + 1},{k + 1})", truncate(jacobi, order))
        )

    for name, f, f_prime in (
        ("closure-g", g_poly(), g_prime_poly()),
        ("closure-gbar", gbar_poly(), gbar_prime_poly()),
    ):
        for i in AXES:
            lhs = comm(f, p[i])
            rhs = prod(g + gbar, f_prime, x[i]).scale(2 * i_unit)
            checks.append(IdentityCheck(name, f"p{i + 1}", truncate(lhs - rhs, order)))

    if theta is not None:
        prefactor = prod(g + gbar, g_prime_poly()).scale(2) - prod(
            g, gbar_over_radius_squared_poly()
        )
        for (i, j), k in product(pairs, AXES):
            lhs = prod(theta_poly(theta), comm(x[k], pair_angular_momentum_poly(j, i, order)))
            bracket = x[i].scale(_kronecker(k, j)) - x[j].scale(_kronecker(k, i))
            rhs = prod(prefactor, bracket)
            checks.append(
                IdentityCheck(
                    "reduced-jacobi",
                    f"({i + 1},{j + 1},{k + 1})",
                    truncate(lhs - rhs, 2),
                )
            )

    ang = [angular_momentum_poly(a, order) for a in AXES]
    for i, j in pairs:
        k = 3 - i - j
        eps = levi_civita(i, j, k)
        rhs = prod(g, ang[k]).scale(i_unit * QQ_I(eps, 0))
        checks.append(
            IdentityCheck(
                "deformed-so3",
                f"[l{i + 1},l{j + 1}]",
                truncate(comm(ang[i], ang[j]) - rhs, order),
            )
        )

    for c in checks:
        logger.debug(
            "Algebra check name=%s, label=%s, terms=%d, passed=%s",
            c.name,
            c.label,
            len(c.residual),
            c.passed,
        )
    report = AlgebraReport(order, tuple(checks), theta)
    logger.info(
        "Verified deformed algebra max_alpha_order=%d, checks=%d, passed=%s",
        order,
        len(checks),
        report.passed,
    )
    return report
