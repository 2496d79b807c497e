import json

import numpy as np
import pytest
from sympy.polys.domains import QQ_I

from eup_bell.errors import ConfigurationError, UsageError
from eup_bell.quantum.series_algebra import (
    IMAG_UNIT,
    OrderedMonomial,
    adjoint,
    alpha_poly,
    angular_momentum_poly,
    commutator_poly,
    constant,
    fit_theta,
    g_poly,
    identity_poly,
    monomial,
    momentum_poly,
    normal_order_product,
    ordered_product,
    physical_momentum_poly,
    position_poly,
    radius_squared_poly,
    truncate,
    verify_deformed_algebra,
    zero_poly,
)


def test_heisenberg_rule():
    assert commutator_poly(position_poly(0), momentum_poly(0)) == constant(IMAG_UNIT)
    assert commutator_poly(position_poly(0), momentum_poly(1)).is_zero
    assert commutator_poly(momentum_poly(2), position_poly(2)) == constant(QQ_I(0, -1))


def test_momentum_moves_right_past_radius_squared():
    product = normal_order_product(momentum_poly(0), radius_squared_poly())
    expected = ordered_product(radius_squared_poly(), momentum_poly(0)) + monomial(
        x_powers=(1, 0, 0), value=QQ_I(0, -2)
    )
    assert product == expected


def test_products_are_associative():
    a = ordered_product(momentum_poly(0), momentum_poly(0))
    b = monomial(x_powers=(3, 1, 0))
    c = ordered_product(momentum_poly(1), position_poly(0))
    assert normal_order_product(normal_order_product(a, b), c) == normal_order_product(
        a, normal_order_product(b, c)
    )


def random_poly(rng, terms=2, max_degree=4):
    poly = zero_poly()
    for _ in range(terms):
        degree = int(rng.integers(0, max_degree + 1))
        powers = [int(n) for n in np.bincount(rng.integers(0, 6, size=degree), minlength=6)]
        value = QQ_I(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        poly = poly + monomial(tuple(powers[:3]), tuple(powers[3:]), value=value)
    return poly


def test_random_products_are_associative(rng):
    for _ in range(100):
        a, b, c = (random_poly(rng) for _ in range(3))
        assert normal_order_product(normal_order_product(a, b), c) == normal_order_product(
            a, normal_order_product(b, c)
        )


def test_commutator_obeys_leibniz_rule(rng):
    for _ in range(50):
        p, q, r = (random_poly(rng) for _ in range(3))
        expected = normal_order_product(commutator_poly(p, q), r) + normal_order_product(
            q, commutator_poly(p, r)
        )
        assert commutator_poly(p, normal_order_product(q, r)) == expected


def test_zero_terms_are_dropped():
    p = position_poly(0) - position_poly(0)
    assert p.is_zero
    assert len(p) == 0
    assert p == zero_poly()
    assert not p


def test_truncation_by_alpha_order():
    squared = normal_order_product(g_poly(), g_poly())
    assert squared.max_alpha_order == 2
    assert truncate(squared, 1) == identity_poly() + normal_order_product(
        alpha_poly(), radius_squared_poly()
    ).scale(2)
    assert normal_order_product(g_poly(), g_poly(), max_alpha_order=0) == identity_poly()
    with pytest.raises(UsageError):
        normal_order_product(g_poly(), g_poly(), max_alpha_order=-1)


def test_physical_momentum_normal_form():
    def term(x_powers, p_powers, value):
        return monomial(x_powers, p_powers, alpha_order=1, value=value)

    expected = (
        momentum_poly(0)
        + term((2, 0, 0), (1, 0, 0), 3)
        + term((0, 2, 0), (1, 0, 0), 1)
        + term((0, 0, 2), (1, 0, 0), 1)
        + term((1, 1, 0), (0, 1, 0), 2)
        + term((1, 0, 1), (0, 0, 1), 2)
        + term((1, 0, 0), (0, 0, 0), QQ_I(0, -5))
    )
    assert physical_momentum_poly(0) == expected
    assert physical_momentum_poly(0, 0) == momentum_poly(0)


def test_physical_momentum_is_hermitian():
    for axis in range(3):
        p = physical_momentum_poly(axis)
        assert adjoint(p) == p


def test_adjoint_reorders():
    xp = ordered_product(position_poly(0), momentum_poly(0))
    assert adjoint(xp) == normal_order_product(momentum_poly(0), position_poly(0))
    assert adjoint(constant(IMAG_UNIT)) == constant(QQ_I(0, -1))


def test_deformed_position_momentum_commutator():
    c = commutator_poly(position_poly(0), physical_momentum_poly(1))
    assert c == monomial((1, 1, 0), alpha_order=1, value=QQ_I(0, 2))


def test_theta_fit():
    c = commutator_poly(physical_momentum_poly(0, 2), physical_momentum_poly(1, 2), 2)
    assert truncate(c, 1).is_zero
    fitted, residual = fit_theta(c, 0, 1)
    assert fitted == QQ_I(0, 4)
    assert residual.is_zero


@pytest.mark.parametrize("order", [0, 1, 2])
def test_verify_deformed_algebra(order):
    report = verify_deformed_algebra(order)
    assert report.passed, report.to_text()
    names = {c.name for c in report.checks}
    assert {
        "position-momentum",
        "momentum-hermiticity",
        "momentum-momentum",
        "jacobi",
        "closure-g",
        "closure-gbar",
        "deformed-so3",
    } <= names
    if order == 2:
        assert report.theta == QQ_I(0, 4)
        assert {"momentum-momentum-theta", "reduced-jacobi"} <= names
    else:
        assert report.theta is None


def test_report_lookup_and_serialization():
    report = verify_deformed_algebra(1)
    check = report.check("position-momentum", "[x1,p2]")
    assert check.passed
    with pytest.raises(KeyError):
        report.check("position-momentum", "[x9,p9]")

    document = json.loads(json.dumps(report.to_dict()))
    assert document["passed"] is True
    assert document["max_alpha_order"] == 1
    assert all(entry["residual_terms"] == [] for entry in document["checks"])

    frame = report.to_frame()
    assert len(frame) == len(report.checks)
    assert frame["passed"].all()
    assert "passed=True" in report.to_text()


def test_verify_rejects_unsupported_order():
    with pytest.raises(ConfigurationError):
        verify_deformed_algebra(3)


def test_angular_momentum_is_g_times_auxiliary():
    lz = angular_momentum_poly(2)
    aux = ordered_product(position_poly(0), momentum_poly(1)) - ordered_product(
        position_poly(1), momentum_poly(0)
    )
    assert lz == normal_order_product(g_poly(), aux)


def test_evaluate_and_labels():
    r2 = normal_order_product(alpha_poly(), radius_squared_poly())
    assert r2.evaluate((1.0, 2.0, 3.0), 0.5) == pytest.approx(7.0)
    with pytest.raises(UsageError):
        momentum_poly(0).evaluate((0.0, 0.0, 0.0), 0.0)
    assert OrderedMonomial((2, 0, 0), (0, 1, 0), 1).label() == "a*x1^2*P2"
    assert OrderedMonomial().label() == "1"
    assert str(position_poly(0)) == "x1"
