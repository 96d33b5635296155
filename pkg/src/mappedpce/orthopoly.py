"""Orthonormal polynomial families for arbitrary densities on [-1,1].

Three-term recurrence coefficients come from closed forms where the density
is classical (Legendre for uniform, Jacobi for beta) and from a discretized
Stieltjes procedure otherwise, notably for densities pulled back through a
conformal map.  Gauss rules are derived from the recurrence by eigenvalue
decomposition of the symmetric tridiagonal (Jacobi) matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .density import Beta, TransformedDensity, Uniform, UnivariateDensity
from .exceptions import NumericalError

# Stieltjes discretization: composite Gauss-Legendre, panels doubled until
# every coefficient settles below this tolerance.
_STIELTJES_TOL = 1e-13
_STIELTJES_NODES_PER_PANEL = 60
_STIELTJES_MAX_PANELS = 64

_SYMMETRY_EPS = 1e-14


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Recurrence data (alpha_k, beta_k), k = 0..max_index.

    The orthonormal family satisfies
    ``sqrt(beta[k+1]) p_{k+1}(y) = (y - alpha[k]) p_k(y) - sqrt(beta[k]) p_{k-1}(y)``
    with ``p_0 = 1/sqrt(beta[0])``; ``beta[0]`` is the total mass, 1 for
    probability densities.
    """

    alpha: np.ndarray
    beta: np.ndarray
    sqrt_beta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        beta = np.asarray(self.beta, dtype=np.float64)
        if alpha.shape != beta.shape or alpha.ndim != 1 or alpha.size == 0:
            raise ValueError("alpha and beta must be equal-length 1-D arrays")
        if np.any(beta <= 0.0):
            raise ValueError("all beta coefficients must be positive")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        sq = np.sqrt(beta)
        sq.setflags(write=False)
        object.__setattr__(self, "sqrt_beta", sq)

    @property
    def max_index(self):
        return self.alpha.size - 1

    def truncated(self, max_index):
        if max_index > self.max_index:
            raise ValueError(
                f"requested index {max_index} beyond available {self.max_index}"
            )
        return RecurrenceCoefficients(
            self.alpha[: max_index + 1].copy(), self.beta[: max_index + 1].copy()
        )


def legendre_recurrence(max_degree):
    """Closed-form recurrence for the uniform probability density."""
    k = np.arange(max_degree + 1, dtype=np.float64)
    alpha = np.zeros(max_degree + 1)
    beta = np.empty(max_degree + 1)
    beta[0] = 1.0
    if max_degree >= 1:
        kk = k[1:]
        beta[1:] = kk * kk / (4.0 * kk * kk - 1.0)
    return RecurrenceCoefficients(alpha, beta)


def jacobi_recurrence(max_degree, shape_alpha, shape_beta):
    """Closed-form recurrence for the beta density on [-1,1].

    ``shape_alpha``/``shape_beta`` are the density shape parameters; the
    matching Jacobi weight exponents are ``a = shape_alpha - 1`` on (1-y)
    and ``b = shape_beta - 1`` on (1+y).  Normalized so beta[0] = 1.
    """
    a = float(shape_alpha) - 1.0
    b = float(shape_beta) - 1.0
    if a <= -1.0 or b <= -1.0:
        raise ValueError("beta density shape parameters must be positive")
    n = max_degree + 1
    alpha = np.zeros(n)
    beta = np.empty(n)
    beta[0] = 1.0
    alpha[0] = (b - a) / (a + b + 2.0)
    if n > 1:
        k = np.arange(1.0, n)
        alpha[1:] = (b * b - a * a) / ((2.0 * k + a + b) * (2.0 * k + a + b + 2.0))
        beta[1] = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) ** 2 * (a + b + 3.0))
    if n > 2:
        k = np.arange(2.0, n)
        num = 4.0 * k * (k + a) * (k + b) * (k + a + b)
        den = (2.0 * k + a + b) ** 2 * (2.0 * k + a + b + 1.0) * (2.0 * k + a + b - 1.0)
        beta[2:] = num / den
    return RecurrenceCoefficients(alpha, beta)


def _composite_gl_grid(panels, nodes_per_panel):
    """Nodes and weights of a composite Gauss-Legendre rule on [-1,1]."""
    x0, w0 = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


def _stieltjes_pass(x, w, max_degree):
    """Monic Stieltjes recursion on a discrete inner product."""
    n = max_degree + 1
    alpha = np.empty(n)
    beta = np.empty(n)
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    norm_cur = w.sum()
    beta[0] = norm_cur
    for k in range(n):
        alpha[k] = np.dot(w, x * p_cur * p_cur) / norm_cur
        if k == n - 1:
            break
        if k == 0:
            p_next = (x - alpha[k]) * p_cur
        else:
            p_next = (x - alpha[k]) * p_cur - beta[k] * p_prev
        norm_next = np.dot(w, p_next * p_next)
        if not norm_next > 0.0:
            raise NumericalError(
                f"Stieltjes procedure lost positivity at degree {k + 1}"
            )
        beta[k + 1] = norm_next / norm_cur
        p_prev, p_cur = p_cur, p_next
        norm_cur = norm_next
    return alpha, beta


def stieltjes(density, max_degree):
    """Recurrence coefficients by the discretized Stieltjes procedure.

    The density is discretized on a composite Gauss-Legendre grid whose
    panel count doubles until all coefficients up to ``max_degree`` change
    by less than 1e-13.  Intended for smooth densities; raises
    NumericalError if the refinement cap is hit.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    prev = None
    panels = 1
    while panels <= _STIELTJES_MAX_PANELS:
        x, glw = _composite_gl_grid(panels, _STIELTJES_NODES_PER_PANEL)
        w = glw * density.pdf(x)
        cur = _stieltjes_pass(x, w, max_degree)
        if prev is not None:
            change = max(
                np.max(np.abs(cur[0] - prev[0])), np.max(np.abs(cur[1] - prev[1]))
            )
            if change < _STIELTJES_TOL:
                return RecurrenceCoefficients(cur[0], cur[1])
        prev = cur
        panels *= 2
    raise NumericalError(
        f"Stieltjes discretization did not converge within {_STIELTJES_MAX_PANELS} "
        f"panels for {density!r}"
    )


_RECURRENCE_CACHE = {}
_CACHE_DEGREE_STEP = 32


def recurrence_coefficients(density, max_degree):
    """Recurrence for ``density``, via closed forms where available.

    Uniform and beta densities use their classical recurrences; transformed
    and other densities go through :func:`stieltjes`.  Results are cached on
    the density's value key, computed in blocks so repeated requests at
    increasing degree reuse one construction.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    capped = ((max_degree // _CACHE_DEGREE_STEP) + 1) * _CACHE_DEGREE_STEP
    key = (density.cache_key(), capped)
    full = _RECURRENCE_CACHE.get(key)
    if full is None:
        if isinstance(density, Uniform):
            full = legendre_recurrence(capped)
        elif isinstance(density, Beta):
            full = jacobi_recurrence(capped, density.alpha, density.beta)
        elif isinstance(density, UnivariateDensity):
            full = stieltjes(density, capped)
        else:
            raise TypeError(f"not a univariate density: {density!r}")
        _RECURRENCE_CACHE[key] = full
    return full.truncated(max_degree)


class OrthonormalBasis1D:
    """Orthonormal polynomials of one variable w.r.t. a density.

    Parameters
    ----------
    density : UnivariateDensity
    max_degree : int
    recurrence : RecurrenceCoefficients, optional
        Reuse precomputed coefficients (e.g. from a surrogate file) instead
        of reconstructing them.
    """

    def __init__(self, density, max_degree, recurrence=None):
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        self.density = density
        self.max_degree = int(max_degree)
        if recurrence is None:
            recurrence = recurrence_coefficients(density, max_degree)
        elif recurrence.max_index < max_degree:
            raise ValueError(
                f"recurrence provides indices up to {recurrence.max_index}, "
                f"need {max_degree}"
            )
        self.recurrence = recurrence

    def evaluate_all(self, points):
        """Values of all basis polynomials: shape (npoints, max_degree+1)."""
        pts = np.ascontiguousarray(np.atleast_1d(points), dtype=np.float64)
        return _kernels.recurrence_eval(
            self.recurrence.alpha, self.recurrence.sqrt_beta, self.max_degree + 1, pts
        )

    def evaluate(self, degree, points):
        """Value of the degree-m basis polynomial at ``points``."""
        if not 0 <= degree <= self.max_degree:
            raise IndexError(
                f"degree {degree} outside basis range 0..{self.max_degree}"
            )
        points = np.asarray(points, dtype=np.float64)
        table = self.evaluate_all(points)
        col = table[:, degree]
        return float(col[0]) if points.ndim == 0 else col.reshape(points.shape)


def golub_welsch(recurrence, n):
    """Gauss nodes and weights from the recurrence's Jacobi matrix.

    Returns (nodes, weights): n nodes ascending in (-1,1), weights positive
    summing to beta[0].  Rules for symmetric densities (all alpha = 0) are
    symmetrized so paired nodes are exact negatives.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    if recurrence.max_index < n - 1:
        raise ValueError(
            f"recurrence provides indices up to {recurrence.max_index}, "
            f"need {n - 1} for an n={n} rule"
        )
    diag = recurrence.alpha[:n]
    beta0 = recurrence.beta[0]
    if n == 1:
        return diag.copy(), np.array([beta0])
    off = recurrence.sqrt_beta[1:n]
    try:
        vals, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Gauss rule eigen-solve failed for n={n}") from exc
    order = np.argsort(vals)
    nodes = vals[order]
    weights = beta0 * vecs[0, order] ** 2
    if np.all(np.abs(diag) < _SYMMETRY_EPS):
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
    if np.any(weights <= 0.0):
        raise NumericalError(f"non-positive Gauss weight for n={n}")
    return nodes, weights
