"""Interval maps: exact endpoints, odd symmetry, invertibility, specs."""

from fractions import Fraction

import numpy as np
import pytest

from mappedpce import (
    DomainError,
    IdentityMap,
    InvalidMapError,
    MultivariateMap,
    OddPolynomialMap,
    identity_map,
    map_from_spec,
    polynomial_continuation,
    sausage9,
)

SAUSAGE_INTS = (40320, 6720, 3024, 1800, 1225)


def _exact_sausage(s):
    """Rational-arithmetic reference, immune to float rounding."""
    acc = sum(c * Fraction(s) ** (2 * j + 1) for j, c in enumerate(SAUSAGE_INTS))
    return acc / sum(SAUSAGE_INTS)


def test_sausage_endpoints_exact():
    g = sausage9()
    assert g.forward(1.0) == 1.0
    assert g.forward(-1.0) == -1.0
    assert g.forward(0.0) == 0.0


def test_sausage_matches_rational_reference():
    g = sausage9()
    for s in (Fraction(1, 2), Fraction(-3, 8), Fraction(7, 16), Fraction(31, 32)):
        assert abs(g.forward(float(s)) - float(_exact_sausage(s))) < 5e-16


def test_sausage_midpoint_value():
    assert abs(sausage9().forward(0.5) - 0.3976521516345194) < 1e-15


def test_sausage_derivative_endpoints():
    g = sausage9()
    assert abs(g.derivative(0.0) - 40320.0 / 53089.0) < 1e-15
    assert abs(g.derivative(1.0) - 99225.0 / 53089.0) < 1e-14


def test_sausage_odd_symmetry():
    g = sausage9()
    s = np.linspace(0.0, 1.0, 57)
    assert np.array_equal(g.forward(-s), -g.forward(s))


def test_sausage_strictly_increasing():
    g = sausage9()
    s = np.linspace(-1.0, 1.0, 2001)
    assert np.all(np.diff(g.forward(s)) > 0)
    assert np.all(g.derivative(s) > 0)


def test_inverse_round_trip():
    g = sausage9()
    rng = np.random.default_rng(5)
    y = rng.uniform(-1.0, 1.0, 300)
    s = g.inverse(y)
    assert np.max(np.abs(g.forward(s) - y)) < 1e-14
    assert np.all(np.abs(s) <= 1.0)


def test_inverse_endpoints_exact():
    g = sausage9()
    assert g.inverse(1.0) == 1.0
    assert g.inverse(-1.0) == -1.0
    assert g.inverse(0.0) == 0.0


def test_domain_error_beyond_slack():
    g = sausage9()
    with pytest.raises(DomainError):
        g.forward(1.01)
    with pytest.raises(DomainError):
        g.inverse(np.array([0.0, -1.5]))
    # an ulp-scale overshoot is clipped, not rejected
    assert g.forward(1.0 + 1e-13) == 1.0


def test_identity_map_is_passthrough():
    m = identity_map()
    y = np.linspace(-1.0, 1.0, 11)
    assert np.array_equal(m.forward(y), y)
    assert np.array_equal(m.inverse(y), y)
    assert np.all(m.derivative(y) == 1.0)
    assert isinstance(m, IdentityMap)


def test_custom_odd_map_validation():
    with pytest.raises(InvalidMapError):
        OddPolynomialMap([])
    with pytest.raises(InvalidMapError):
        OddPolynomialMap([1.0, np.nan])
    # derivative goes negative inside the interval
    with pytest.raises(InvalidMapError):
        OddPolynomialMap([1.0, -0.9])
    # valid gentle cubic
    m = OddPolynomialMap([3.0, 1.0])
    assert m.forward(1.0) == 1.0
    assert abs(m.forward(0.5) - (3.0 * 0.5 + 0.125) / 4.0) < 1e-15


def test_map_from_spec_round_trip():
    for spec in ("identity", "sausage9", {"odd_coefficients": [3.0, 1.0]}):
        m = map_from_spec(spec)
        again = map_from_spec(m.to_spec())
        assert m.cache_key() == again.cache_key()
    assert map_from_spec("sausage9").to_spec() == "sausage9"
    with pytest.raises(InvalidMapError):
        map_from_spec("mercator")


def test_polynomial_continuation_real_axis_agrees():
    g = sausage9()
    s = np.linspace(-1.0, 1.0, 21)
    cont = polynomial_continuation(g, s.astype(complex))
    assert np.max(np.abs(cont - g.forward(s))) < 1e-15


def test_polynomial_continuation_complex_value():
    g = sausage9()
    z = 0.3 + 0.2j
    expect = sum(c * z ** (2 * j + 1) for j, c in enumerate(SAUSAGE_INTS)) / 53089.0
    assert abs(polynomial_continuation(g, z) - expect) < 1e-15


def test_multivariate_map_per_dimension():
    mm = MultivariateMap([identity_map(), sausage9()])
    assert mm.dimension == 2
    pts = np.array([[0.5, 0.5], [-0.25, 0.75]])
    out = mm.forward(pts)
    assert np.array_equal(out[:, 0], pts[:, 0])
    assert np.allclose(out[:, 1], sausage9().forward(pts[:, 1]))
    back = mm.inverse(out)
    assert np.max(np.abs(back - pts)) < 1e-13
    jac = mm.jacobian_diagonal(pts)
    assert np.all(jac[:, 0] == 1.0)


def test_multivariate_map_shape_check():
    mm = MultivariateMap([identity_map()] * 2)
    with pytest.raises(ValueError):
        mm.forward(np.zeros((3, 5)))
