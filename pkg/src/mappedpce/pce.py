"""Polynomial chaos bases, pseudo-spectral projection, and surrogates.

The basis is orthonormal with respect to the input density; with a
nontrivial map it is assembled from polynomials orthonormal under the
transformed density, composed with the inverse map.  Projection pairs that
basis with the mapped Gauss rule, so basis evaluations happen at the
pre-map nodes and no map inversion is needed on the projection path.
"""

from __future__ import annotations

import datetime
import json

import numpy as np

from .conformal import IdentityMap, MultivariateMap, identity_map, map_from_spec
from .density import JointDensity, density_from_spec, transform_density
from .exceptions import ProjectionError, SurrogateFormatError
from .models import evaluate_on_grid
from .orthopoly import OrthonormalBasis1D, RecurrenceCoefficients
from .quadrature import mapped_rule, tensor_rule

_FORMAT_VERSION = 1


def tensor_index_set(degree, dimension):
    """All multi-indices in {0..degree}^dimension, last dimension fastest.

    Row ordering matches the tensor quadrature node ordering so index m of
    a degree-p basis and node m of a (p+1)-point rule line up per level.
    """
    degree = int(degree)
    dimension = int(dimension)
    if degree < 0 or dimension < 1:
        raise ValueError(f"need degree >= 0 and dimension >= 1, got p={degree} N={dimension}")
    axes = [np.arange(degree + 1)] * dimension
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel(order="C") for m in mesh], axis=1)


class PCBasis:
    """Multivariate orthonormal basis for a density, optionally mapped.

    Parameters
    ----------
    density : JointDensity
        The original input density on [-1,1]^N.
    degree : int
        Maximum per-dimension polynomial degree p.
    mapping : MultivariateMap, optional
        Coordinate-wise conformal maps; identity in every dimension by
        default, which reduces to the classical construction.
    """

    def __init__(self, density, degree, mapping=None):
        if not isinstance(density, JointDensity):
            density = JointDensity([density])
        self.density = density
        self.degree = int(degree)
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {degree}")
        if mapping is None:
            mapping = MultivariateMap([identity_map()] * density.dimension)
        if mapping.dimension != density.dimension:
            raise ValueError(
                f"map dimension {mapping.dimension} != density dimension {density.dimension}"
            )
        self.mapping = mapping
        self.transformed_factors = tuple(
            transform_density(f, m) for f, m in zip(density.factors, mapping.maps)
        )
        self.bases_1d = tuple(
            OrthonormalBasis1D(rho_t, self.degree) for rho_t in self.transformed_factors
        )
        self.multi_indices = tensor_index_set(self.degree, density.dimension)

    @property
    def dimension(self):
        return self.density.dimension

    @property
    def size(self):
        return self.multi_indices.shape[0]

    @property
    def is_mapped(self):
        return any(not isinstance(m, IdentityMap) for m in self.mapping.maps)

    def _tabulate(self, premap_points):
        premap_points = np.atleast_2d(np.asarray(premap_points, dtype=np.float64))
        if premap_points.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {premap_points.shape[1]}, basis has {self.dimension}"
            )
        return [b.evaluate_all(premap_points[:, d]) for d, b in enumerate(self.bases_1d)]

    def evaluate_premap(self, premap_points):
        """Basis matrix at pre-map coordinates s, shape (n, size).

        Column m is the product over dimensions of the 1-d orthonormal
        polynomial of degree ``multi_indices[m, d]`` at s_d.
        """
        tables = self._tabulate(premap_points)
        out = tables[0][:, self.multi_indices[:, 0]]
        for d in range(1, self.dimension):
            out = out * tables[d][:, self.multi_indices[:, d]]
        return out

    def evaluate(self, points):
        """Basis matrix at physical coordinates y (inverts the map)."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if points.shape[1] != self.dimension:
            raise ValueError(
                f"points have dimension {points.shape[1]}, basis has {self.dimension}"
            )
        return self.evaluate_premap(self.mapping.inverse(points))

    def evaluate_function(self, m, points):
        """Single basis function m at physical points, shape (n,)."""
        if not 0 <= m < self.size:
            raise IndexError(f"basis index {m} outside 0..{self.size - 1}")
        return self.evaluate(points)[:, m]

    def cache_key(self):
        return ("pcbasis", self.density.cache_key(), self.mapping.cache_key(), self.degree)


class Surrogate:
    """A truncated expansion sum_m s_m Phi_m with complex coefficients."""

    def __init__(self, basis, coefficients, metadata=None):
        coefficients = np.asarray(coefficients, dtype=np.complex128)
        if coefficients.shape != (basis.size,):
            raise ValueError(
                f"coefficient vector shape {coefficients.shape} does not match "
                f"basis size {basis.size}"
            )
        self.basis = basis
        self.coefficients = coefficients
        self.metadata = dict(metadata or {})

    @property
    def dimension(self):
        return self.basis.dimension

    @property
    def degree(self):
        return self.basis.degree

    def evaluate(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return self.basis.evaluate(points) @ self.coefficients

    def __call__(self, y):
        return complex(self.evaluate(np.asarray(y, dtype=np.float64).reshape(1, -1))[0])

    def as_model(self):
        from .models import ParametricModel

        return ParametricModel(
            self.dimension,
            lambda pts: self.evaluate(pts) if np.ndim(pts) == 2 else self(pts),
            label=f"surrogate({self.metadata.get('model', '?')},p={self.degree})",
            vectorized=True,
        )


def project(model, basis, quad_nodes_per_dim=None):
    """Pseudo-spectral projection of ``model`` onto ``basis``.

    Uses the tensor Gauss rule of the (transformed) density with
    ``quad_nodes_per_dim`` points per dimension, default degree+1.  The
    model is evaluated exactly once per tensor node; coefficients are the
    weighted inner products of those values with the basis columns.
    """
    if model.dimension != basis.dimension:
        raise ProjectionError(
            f"model dimension {model.dimension} != basis dimension {basis.dimension}"
        )
    if quad_nodes_per_dim is None:
        quad_nodes_per_dim = basis.degree + 1
    quad_nodes_per_dim = int(quad_nodes_per_dim)
    if quad_nodes_per_dim < 1:
        raise ProjectionError(f"need at least one quadrature node, got {quad_nodes_per_dim}")
    rules = [
        mapped_rule(f, m, quad_nodes_per_dim)
        for f, m in zip(basis.density.factors, basis.mapping.maps)
    ]
    grid = tensor_rule(rules)
    values = evaluate_on_grid(model, grid.nodes)
    phi = basis.evaluate_premap(grid.source_nodes)
    coefficients = phi.T @ (grid.weights * values)
    metadata = {
        "model": model.label,
        "quadrature_nodes": int(grid.size),
        "nodes_per_dim": quad_nodes_per_dim,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    return Surrogate(basis, coefficients, metadata)


def coefficient_decay(surrogate):
    """Per-level energy: max |s_m|^2 over indices with max degree k, k=0..p.

    The decay slope of this sequence on a log scale is the practical
    diagnostic for the convergence rate of the expansion.
    """
    levels = surrogate.basis.multi_indices.max(axis=1)
    energy = np.abs(surrogate.coefficients) ** 2
    out = np.zeros(surrogate.degree + 1)
    for k in range(surrogate.degree + 1):
        mask = levels == k
        if mask.any():
            out[k] = energy[mask].max()
    return out


def _floats(arr):
    return [float(v) for v in np.asarray(arr, dtype=np.float64)]


def save_surrogate(surrogate, path):
    """Serialize to JSON with exact float round-trip.

    The stored recurrence coefficients make reloading bit-exact: the basis
    is rebuilt from them rather than recomputed from the density.
    """
    basis = surrogate.basis
    doc = {
        "format": "mappedpce-surrogate",
        "version": _FORMAT_VERSION,
        "dimension": basis.dimension,
        "degree": basis.degree,
        "densities": [f.to_spec() for f in basis.density.factors],
        "maps": [m.to_spec() for m in basis.mapping.maps],
        "recurrences": [
            {"alpha": _floats(b.recurrence.alpha), "beta": _floats(b.recurrence.beta)}
            for b in basis.bases_1d
        ],
        "multi_indices": surrogate.basis.multi_indices.tolist(),
        "coefficients_real": _floats(surrogate.coefficients.real),
        "coefficients_imag": _floats(surrogate.coefficients.imag),
        "metadata": surrogate.metadata,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_surrogate(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SurrogateFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != "mappedpce-surrogate":
        raise SurrogateFormatError(f"{path}: not a surrogate file")
    if doc.get("version") != _FORMAT_VERSION:
        raise SurrogateFormatError(
            f"{path}: unsupported format version {doc.get('version')!r}"
        )
    try:
        dimension = int(doc["dimension"])
        degree = int(doc["degree"])
        factors = [density_from_spec(s) for s in doc["densities"]]
        maps = [map_from_spec(s) for s in doc["maps"]]
        recurrences = [
            RecurrenceCoefficients(np.array(r["alpha"]), np.array(r["beta"]))
            for r in doc["recurrences"]
        ]
        indices = np.asarray(doc["multi_indices"], dtype=np.int64)
        coefficients = np.asarray(doc["coefficients_real"], dtype=np.float64) + 1j * np.asarray(
            doc["coefficients_imag"], dtype=np.float64
        )
        metadata = dict(doc.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise SurrogateFormatError(f"{path}: malformed surrogate file: {exc}") from exc
    if len(factors) != dimension or len(maps) != dimension or len(recurrences) != dimension:
        raise SurrogateFormatError(
            f"{path}: dimension {dimension} does not match stored per-dimension data"
        )
    basis = PCBasis(JointDensity(factors), degree, MultivariateMap(maps))
    if indices.shape != basis.multi_indices.shape or not np.array_equal(
        indices, basis.multi_indices
    ):
        raise SurrogateFormatError(f"{path}: stored multi-index set is inconsistent")
    basis.bases_1d = tuple(
        OrthonormalBasis1D(rho_t, degree, recurrence=rec)
        for rho_t, rec in zip(basis.transformed_factors, recurrences)
    )
    if coefficients.shape != (basis.size,):
        raise SurrogateFormatError(
            f"{path}: coefficient count {coefficients.shape[0]} does not match basis "
            f"size {basis.size}"
        )
    return Surrogate(basis, coefficients, metadata)
