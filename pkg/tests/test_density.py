"""Densities: normalization, transformed weights, seeded sampling."""

import numpy as np
import pytest

from mappedpce import (
    Beta,
    JointDensity,
    TransformedDensity,
    Uniform,
    density_from_spec,
    identity_map,
    sausage9,
    transform_density,
)

GL_X, GL_W = np.polynomial.legendre.leggauss(400)


def _integral(f):
    """High-order reference integral over [-1,1], exact for polynomials."""
    return float(np.sum(GL_W * f(GL_X)))


def test_uniform_pdf():
    u = Uniform()
    y = np.linspace(-1.0, 1.0, 7)
    assert np.all(u.pdf(y) == 0.5)
    assert abs(_integral(u.pdf) - 1.0) < 1e-14
    assert u.is_symmetric


def test_beta_pdf_normalization_and_peak():
    b = Beta(4.0, 4.0)
    assert abs(b.pdf(0.0) - 35.0 / 32.0) < 1e-14
    assert b.pdf(1.0) == 0.0 and b.pdf(-1.0) == 0.0
    assert abs(_integral(b.pdf) - 1.0) < 1e-13
    assert b.is_symmetric
    skew = Beta(2.0, 5.0)
    assert abs(_integral(skew.pdf) - 1.0) < 1e-13
    assert not skew.is_symmetric


def test_beta_invalid_shapes():
    for alpha, beta in ((0.0, 4.0), (4.0, -1.0)):
        with pytest.raises(ValueError):
            Beta(alpha, beta)


def test_transformed_density_weight_formula():
    g = sausage9()
    for base in (Uniform(), Beta(4.0, 4.0)):
        rho_t = transform_density(base, g)
        s = np.linspace(-1.0, 1.0, 41)
        expect = base.pdf(g.forward(s)) * g.derivative(s)
        assert np.max(np.abs(rho_t.pdf(s) - expect)) < 1e-14
        assert abs(_integral(rho_t.pdf) - 1.0) < 1e-13


def test_transformed_uniform_endpoint_values():
    rho_t = transform_density(Uniform(), sausage9())
    assert abs(rho_t.pdf(0.0) - 0.5 * 40320.0 / 53089.0) < 1e-15
    assert abs(rho_t.pdf(1.0) - 0.5 * 99225.0 / 53089.0) < 1e-14


def test_identity_transform_returns_same_object():
    u = Uniform()
    assert transform_density(u, identity_map()) is u


def test_transformed_sampling_lands_in_interval():
    rho_t = transform_density(Beta(4.0, 4.0), sausage9())
    rng = np.random.default_rng(0)
    draws = rho_t.sample_with(rng, 500)
    assert draws.shape == (500,)
    assert np.all(np.abs(draws) <= 1.0)


def test_joint_sampling_deterministic():
    joint = JointDensity([Uniform(), Beta(4.0, 4.0)])
    a = joint.sample(64, seed=7)
    b = joint.sample(64, seed=7)
    assert np.array_equal(a, b)
    c = joint.sample(64, seed=8)
    assert not np.array_equal(a, c)
    assert a.shape == (64, 2)
    assert np.all(np.abs(a) <= 1.0)


def test_beta_sample_moments():
    # E[y] = (beta - alpha) / (alpha + beta) under this endpoint convention
    joint = JointDensity([Beta(2.0, 5.0)])
    draws = joint.sample(20000, seed=42)[:, 0]
    assert abs(draws.mean() - 3.0 / 7.0) < 0.01
    sym = JointDensity([Beta(4.0, 4.0)]).sample(20000, seed=1)[:, 0]
    assert abs(sym.mean()) < 0.01


def test_joint_pdf_is_product():
    joint = JointDensity([Uniform(), Beta(4.0, 4.0)])
    pts = np.array([[0.0, 0.0], [0.5, -0.25]])
    expect = 0.5 * Beta(4.0, 4.0).pdf(pts[:, 1])
    assert np.max(np.abs(joint.pdf(pts) - expect)) < 1e-14
    assert joint.dimension == 2


def test_joint_transform_wraps_factors():
    joint = JointDensity([Uniform(), Uniform()])
    from mappedpce import MultivariateMap

    mapped = joint.transform(MultivariateMap([sausage9(), identity_map()]))
    assert isinstance(mapped.factors[0], TransformedDensity)
    assert mapped.factors[1] is joint.factors[1]


def test_density_from_spec_round_trip():
    for spec in (
        {"kind": "uniform"},
        {"kind": "beta", "alpha": 4.0, "beta": 4.0},
        {"kind": "transformed", "base": {"kind": "uniform"}, "map": "sausage9"},
    ):
        d = density_from_spec(spec)
        again = density_from_spec(d.to_spec())
        assert d.cache_key() == again.cache_key()
    with pytest.raises(ValueError):
        density_from_spec({"kind": "cauchy"})
