"""Probability densities on [-1,1] and their pullbacks through a map.

Physical parameters are expected to be scaled affinely into [-1,1] inside
the model; every density here lives on that reference interval.  Sampling
uses the counter-based Philox generator so that draws are reproducible for
a given integer seed.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betaln

from .conformal import ConformalMap1D, IdentityMap, _clip_domain
from .exceptions import DomainError, InvalidMapError


class UnivariateDensity:
    """A probability density on [-1,1].

    Subclasses implement ``pdf`` (vectorized, domain-checked) and
    ``sample_with`` (drawing from an explicit numpy Generator).  Instances
    are immutable and safe to share.
    """

    def pdf(self, y):
        raise NotImplementedError

    def sample_with(self, rng, n):
        raise NotImplementedError

    @property
    def is_symmetric(self):
        """True when the density is even; forces symmetric Gauss rules."""
        raise NotImplementedError

    def cache_key(self):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError

    def __eq__(self, other):
        return (
            isinstance(other, UnivariateDensity) and self.cache_key() == other.cache_key()
        )

    def __hash__(self):
        return hash(self.cache_key())

    def __repr__(self):
        return f"<{type(self).__name__} {self.cache_key()}>"


class Uniform(UnivariateDensity):
    """The uniform density 1/2 on [-1,1]."""

    def pdf(self, y):
        y = _clip_domain(y, "density argument")
        if y.ndim == 0:
            return 0.5
        return np.full(y.shape, 0.5)

    def sample_with(self, rng, n):
        return rng.uniform(-1.0, 1.0, size=n)

    @property
    def is_symmetric(self):
        return True

    def cache_key(self):
        return ("uniform",)

    def to_spec(self):
        return {"kind": "uniform"}


class Beta(UnivariateDensity):
    """Beta density on [-1,1]: rho(y) proportional to (1-y)^(a-1) (1+y)^(b-1).

    Normalized analytically through the Beta function.  ``Beta(1, 1)`` is
    the uniform density.  Sampling draws two gammas from the Philox stream.
    """

    def __init__(self, alpha, beta):
        alpha = float(alpha)
        beta = float(beta)
        if not (alpha > 0 and beta > 0):
            raise ValueError(f"beta shape parameters must be positive, got ({alpha}, {beta})")
        self.alpha = alpha
        self.beta = beta
        # mass of (1-y)^(a-1)(1+y)^(b-1) over [-1,1]
        self._log_norm = (alpha + beta - 1.0) * np.log(2.0) + betaln(alpha, beta)

    def pdf(self, y):
        y = _clip_domain(y, "density argument")
        scalar = y.ndim == 0
        y = np.atleast_1d(y)
        with np.errstate(divide="ignore"):
            val = (1.0 - y) ** (self.alpha - 1.0) * (1.0 + y) ** (self.beta - 1.0)
        val = val * np.exp(-self._log_norm)
        return float(val[0]) if scalar else val

    def sample_with(self, rng, n):
        # x ~ Beta on [0,1] with x-exponent (beta-1), via the two-gamma ratio
        g1 = rng.standard_gamma(self.beta, size=n)
        g2 = rng.standard_gamma(self.alpha, size=n)
        return 2.0 * g1 / (g1 + g2) - 1.0

    @property
    def is_symmetric(self):
        return self.alpha == self.beta

    def cache_key(self):
        return ("beta", self.alpha, self.beta)

    def to_spec(self):
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta}


class TransformedDensity(UnivariateDensity):
    """Pullback of a base density through a map: rho(g(s)) * g'(s).

    The map fixes the endpoints, so the pullback integrates to 1 by change
    of variables.  Build instances through :func:`transform_density`, which
    collapses the identity map.
    """

    def __init__(self, base, map_1d):
        if not isinstance(base, UnivariateDensity):
            raise TypeError(f"base must be a UnivariateDensity, got {base!r}")
        if not isinstance(map_1d, ConformalMap1D):
            raise InvalidMapError(f"not a univariate map: {map_1d!r}")
        self.base = base
        self.map = map_1d

    def pdf(self, s):
        s = _clip_domain(s, "density argument")
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        val = self.base.pdf(self.map.forward(s)) * self.map.derivative(s)
        return float(val[0]) if scalar else val

    def sample_with(self, rng, n):
        return self.map.inverse(self.base.sample_with(rng, n))

    @property
    def is_symmetric(self):
        # the map is odd, so symmetry of the base carries over
        return self.base.is_symmetric

    def cache_key(self):
        return ("transformed", self.base.cache_key(), self.map.cache_key())

    def to_spec(self):
        return {
            "kind": "transformed",
            "base": self.base.to_spec(),
            "map": self.map.to_spec(),
        }


def transform_density(density, map_1d):
    """Pull ``density`` back through ``map_1d``.

    The identity map returns the input unchanged, so downstream
    constructions are bit-identical to the plain ones in that case.
    """
    if isinstance(map_1d, IdentityMap):
        return density
    if not isinstance(map_1d, ConformalMap1D):
        raise InvalidMapError(f"not a univariate map: {map_1d!r}")
    probe = map_1d.derivative(np.linspace(-1.0, 1.0, 101))
    if np.any(probe <= 0.0):
        raise InvalidMapError("map must be strictly increasing on [-1, 1]")
    return TransformedDensity(density, map_1d)


class JointDensity:
    """Product density of independent univariate factors."""

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise ValueError("at least one factor density is required")
        for f in factors:
            if not isinstance(f, UnivariateDensity):
                raise TypeError(f"not a univariate density: {f!r}")
        self.factors = tuple(factors)

    @property
    def dimension(self):
        return len(self.factors)

    def pdf(self, points):
        points = np.asarray(points, dtype=np.float64)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        if pts.shape[1] != self.dimension:
            raise DomainError(
                f"expected points of dimension {self.dimension}, got {pts.shape[1]}"
            )
        val = np.ones(pts.shape[0])
        for j, f in enumerate(self.factors):
            val *= f.pdf(pts[:, j])
        return float(val[0]) if single else val

    def sample(self, n, seed):
        """Draw n i.i.d. parameter vectors, shape (n, dimension).

        Deterministic for a fixed integer seed (Philox counter-based
        generator, factors drawn in order).
        """
        n = int(n)
        if n < 1:
            raise ValueError(f"sample count must be >= 1, got {n}")
        rng = np.random.Generator(np.random.Philox(key=int(seed)))
        cols = [f.sample_with(rng, n) for f in self.factors]
        return np.column_stack(cols)

    def transform(self, multivariate_map):
        """Factor-wise pullback; returns the joint transformed density."""
        if multivariate_map.dimension != self.dimension:
            raise InvalidMapError(
                f"map dimension {multivariate_map.dimension} != density dimension "
                f"{self.dimension}"
            )
        return JointDensity(
            [transform_density(f, m) for f, m in zip(self.factors, multivariate_map.maps)]
        )

    def cache_key(self):
        return tuple(f.cache_key() for f in self.factors)

    def __eq__(self, other):
        return isinstance(other, JointDensity) and self.cache_key() == other.cache_key()

    def __hash__(self):
        return hash(self.cache_key())


def density_from_spec(spec):
    """Build a univariate density from its config form."""
    if isinstance(spec, UnivariateDensity):
        return spec
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"unrecognized density spec: {spec!r}")
    kind = spec["kind"]
    if kind == "uniform":
        return Uniform()
    if kind == "beta":
        try:
            return Beta(spec["alpha"], spec["beta"])
        except KeyError as exc:
            raise ValueError(f"beta density spec missing field {exc}") from exc
    if kind == "transformed":
        from .conformal import map_from_spec

        return TransformedDensity(
            density_from_spec(spec["base"]), map_from_spec(spec["map"])
        )
    raise ValueError(f"unrecognized density kind: {kind!r}")
