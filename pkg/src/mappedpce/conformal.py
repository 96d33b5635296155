"""Odd polynomial maps of [-1,1] onto itself and their coordinate-wise products.

The workhorse is the degree-9 "sausage" map (a normalized Taylor polynomial
of arcsin), which straightens Bernstein ellipses and thereby enlarges the
region of analyticity available to polynomial approximation.  The identity
map is provided so that every mapped construction degenerates to the plain
one when requested.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .exceptions import DomainError, InvalidMapError, NumericalError

# Unnormalized odd coefficients (s, s^3, ..., s^9) of the degree-9 sausage
# map; the divisor is their exact sum, so the endpoints evaluate to +-1
# without rounding.
_SAUSAGE9_COEFFS = (40320.0, 6720.0, 3024.0, 1800.0, 1225.0)

_DOMAIN_SLACK = 1e-12
_NEWTON_TOL = 1e-14
_NEWTON_MAXIT = 100
_INVERSE_RESIDUAL_TOL = 1e-13


def _clip_domain(x, what):
    """Validate that x lies in [-1,1] up to rounding slack and clip it there."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} contains non-finite values")
    if np.any(np.abs(x) > 1.0 + _DOMAIN_SLACK):
        bad = np.asarray(x)[np.abs(x) > 1.0 + _DOMAIN_SLACK]
        raise DomainError(f"{what} outside [-1, 1]: {bad.ravel()[:5]}")
    return np.clip(x, -1.0, 1.0)


class ConformalMap1D:
    """A strictly increasing odd map of [-1,1] onto itself.

    Subclasses implement ``forward``, ``derivative`` and ``inverse``; all
    three accept scalars or arrays and are pure.  Instances are immutable.
    """

    name: str

    def forward(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError

    def inverse(self, y):
        raise NotImplementedError

    def cache_key(self):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class IdentityMap(ConformalMap1D):
    """The trivial map g(s) = s; recovers plain gPC everywhere."""

    name = "identity"

    def forward(self, s):
        return _clip_domain(s, "map argument")

    def derivative(self, s):
        s = _clip_domain(s, "map argument")
        return np.ones_like(s) if s.ndim else 1.0

    def inverse(self, y):
        return _clip_domain(y, "map argument")

    def cache_key(self):
        return ("identity",)

    def to_spec(self):
        return "identity"

    def __eq__(self, other):
        return isinstance(other, IdentityMap)

    def __hash__(self):
        return hash(self.cache_key())


class OddPolynomialMap(ConformalMap1D):
    """Odd polynomial map ``g(s) = sum_k c_k s^(2k+1) / scale``.

    Parameters
    ----------
    odd_coefficients : sequence of float
        Coefficients of s, s^3, s^5, ... before normalization.  The divisor
        is fixed to their sum so that g(1) = 1.
    name : str, optional
        Display name used in specs and reports.

    Raises
    ------
    InvalidMapError
        If the coefficients do not define a strictly increasing map of
        [-1,1] onto itself (derivative checked at 1000 equispaced points).
    """

    def __init__(self, odd_coefficients, name=None):
        coeffs = np.asarray(odd_coefficients, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise InvalidMapError("odd_coefficients must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidMapError("odd_coefficients must be finite")
        scale = float(coeffs.sum())
        if scale <= 0.0:
            raise InvalidMapError("coefficient sum must be positive (g(1) = 1)")
        self._coeffs = coeffs
        self._coeffs.setflags(write=False)
        self._scale = scale
        self.name = name or "oddpoly"
        check = _kernels.odd_poly_deriv(coeffs, scale, np.linspace(-1.0, 1.0, 1000))
        if np.any(check <= 0.0):
            raise InvalidMapError(
                "map is not strictly increasing on [-1, 1] "
                f"(min derivative {check.min():.3e})"
            )

    @property
    def odd_coefficients(self):
        return self._coeffs

    @property
    def scale(self):
        return self._scale

    def _apply(self, kernel, x):
        x = _clip_domain(x, "map argument")
        flat = np.atleast_1d(x).ravel().astype(np.float64)
        out = kernel(self._coeffs, self._scale, flat)
        if x.ndim == 0:
            return float(out[0])
        return out.reshape(x.shape)

    def forward(self, s):
        out = self._apply(_kernels.odd_poly_eval, s)
        # rounding can overshoot the interval by an ulp near the endpoints
        return float(np.clip(out, -1.0, 1.0)) if np.ndim(out) == 0 else np.clip(out, -1.0, 1.0)

    def derivative(self, s):
        return self._apply(_kernels.odd_poly_deriv, s)

    def inverse(self, y):
        y = _clip_domain(y, "map argument")
        flat = np.atleast_1d(y).ravel().astype(np.float64)
        s = _kernels.odd_poly_inverse(
            self._coeffs, self._scale, flat, _NEWTON_TOL, _NEWTON_MAXIT
        )
        resid = np.abs(_kernels.odd_poly_eval(self._coeffs, self._scale, s) - flat)
        if np.any(resid > _INVERSE_RESIDUAL_TOL):
            i = int(np.argmax(resid))
            raise NumericalError(
                f"map inversion did not converge at y={flat[i]!r} "
                f"(residual {resid[i]:.3e})"
            )
        s = np.clip(s, -1.0, 1.0)
        if y.ndim == 0:
            return float(s[0])
        return s.reshape(y.shape)

    def cache_key(self):
        return ("oddpoly", tuple(self._coeffs.tolist()))

    def to_spec(self):
        if self.name == "sausage9":
            return "sausage9"
        return {"odd_coefficients": self._coeffs.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, OddPolynomialMap) and self.cache_key() == other.cache_key()
        )

    def __hash__(self):
        return hash(self.cache_key())


def sausage9():
    """The degree-9 sausage map (normalized truncated arcsin series)."""
    return OddPolynomialMap(_SAUSAGE9_COEFFS, name="sausage9")


def identity_map():
    return IdentityMap()


def map_from_spec(spec):
    """Build a map from its config form.

    Accepted forms: ``"identity"``, ``"sausage9"`` or
    ``{"odd_coefficients": [...]}``.
    """
    if isinstance(spec, ConformalMap1D):
        return spec
    if spec == "identity":
        return IdentityMap()
    if spec == "sausage9":
        return sausage9()
    if isinstance(spec, dict) and "odd_coefficients" in spec:
        return OddPolynomialMap(spec["odd_coefficients"])
    raise InvalidMapError(f"unrecognized map spec: {spec!r}")


def polynomial_continuation(map_1d, z):
    """Evaluate the defining polynomial of ``map_1d`` at complex points.

    Only used by convergence-rate oracles that trace ellipse boundaries; the
    runtime map itself is restricted to [-1,1].
    """
    z = np.asarray(z, dtype=np.complex128)
    if isinstance(map_1d, IdentityMap):
        return z
    coeffs = map_1d.odd_coefficients
    z2 = z * z
    acc = np.full_like(z, coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * z2 + coeffs[k]
    return acc * z / map_1d.scale


class MultivariateMap:
    """Coordinate-wise product of univariate maps."""

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise InvalidMapError("at least one factor map is required")
        for m in maps:
            if not isinstance(m, ConformalMap1D):
                raise InvalidMapError(f"not a univariate map: {m!r}")
        self.maps = tuple(maps)

    @property
    def dimension(self):
        return len(self.maps)

    def _per_dim(self, op, points):
        points = np.asarray(points, dtype=np.float64)
        single = points.ndim == 1
        pts = np.atleast_2d(points)
        if pts.shape[1] != self.dimension:
            raise DomainError(
                f"expected points of dimension {self.dimension}, got {pts.shape[1]}"
            )
        out = np.column_stack(
            [getattr(m, op)(pts[:, j]) for j, m in enumerate(self.maps)]
        )
        return out[0] if single else out

    def forward(self, points):
        return self._per_dim("forward", points)

    def inverse(self, points):
        return self._per_dim("inverse", points)

    def jacobian_diagonal(self, points):
        """Per-coordinate derivatives g_j'(s_j), stacked like the input."""
        return self._per_dim("derivative", points)

    def cache_key(self):
        return tuple(m.cache_key() for m in self.maps)

    def __eq__(self, other):
        return isinstance(other, MultivariateMap) and self.cache_key() == other.cache_key()

    def __hash__(self):
        return hash(self.cache_key())
