"""Gauss rules for densities on [-1,1], mapped rules, and tensor grids.

A mapped rule is the Gauss rule of the transformed density with its nodes
pushed through the map and its weights kept; pushed nodes stay inside
[-1,1] because the map fixes the interval.  Tensor grids are flattened
lexicographically with the last dimension varying fastest, which fixes the
pairing between exported node files and externally computed model values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .conformal import ConformalMap1D, IdentityMap
from .density import Beta, TransformedDensity, Uniform, transform_density
from .exceptions import TableIngestionError
from .orthopoly import golub_welsch, recurrence_coefficients

FLOAT_FMT = "%.17g"


def describe_density(density):
    if isinstance(density, Uniform):
        return "uniform"
    if isinstance(density, Beta):
        return f"beta({density.alpha:g},{density.beta:g})"
    if isinstance(density, TransformedDensity):
        return f"transformed({describe_density(density.base)},{density.map.name})"
    return repr(density)


@dataclass(frozen=True)
class QuadratureRule1D:
    """A univariate quadrature rule weighted by a probability density.

    ``source_nodes`` are the pre-map Gauss nodes; they equal ``nodes`` for
    plain rules and carry the auxiliary coordinates for mapped rules, which
    lets the projection evaluate the auxiliary polynomials without a
    numerical map inversion.
    """

    nodes: np.ndarray
    weights: np.ndarray
    density_tag: str
    mapped: bool
    source_nodes: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "weights", "source_nodes"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self):
        return self.nodes.size


def gauss_rule(density, n):
    """The n-node Gauss rule for ``density`` (exactness degree 2n-1)."""
    n = int(n)
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    rec = recurrence_coefficients(density, n - 1)
    nodes, weights = golub_welsch(rec, n)
    return QuadratureRule1D(
        nodes=nodes,
        weights=weights,
        density_tag=describe_density(density),
        mapped=False,
        source_nodes=nodes,
    )


def mapped_rule(density, map_1d, n):
    """Gauss rule for the transformed density, nodes pushed through the map.

    With the identity map this takes the plain construction path and is
    bit-identical to :func:`gauss_rule`.
    """
    if not isinstance(map_1d, ConformalMap1D):
        raise TypeError(f"not a univariate map: {map_1d!r}")
    if isinstance(map_1d, IdentityMap):
        return gauss_rule(density, n)
    rho_t = transform_density(density, map_1d)
    base = gauss_rule(rho_t, n)
    return QuadratureRule1D(
        nodes=map_1d.forward(base.nodes),
        weights=base.weights,
        density_tag=f"{describe_density(density)} via {map_1d.name}",
        mapped=True,
        source_nodes=base.nodes,
    )


class TensorQuadrature:
    """Tensor product of univariate rules, flattened last-dimension-fastest."""

    def __init__(self, factor_rules):
        factor_rules = tuple(factor_rules)
        if not factor_rules:
            raise ValueError("at least one factor rule is required")
        self.factor_rules = factor_rules
        self.nodes = _tensor_columns([r.nodes for r in factor_rules])
        self.source_nodes = _tensor_columns([r.source_nodes for r in factor_rules])
        weight_grids = np.meshgrid(*[r.weights for r in factor_rules], indexing="ij")
        w = np.ones_like(weight_grids[0])
        for grid in weight_grids:
            w = w * grid
        self.weights = w.ravel()

    @property
    def dimension(self):
        return len(self.factor_rules)

    @property
    def size(self):
        return self.weights.size


def _tensor_columns(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def tensor_rule(rules):
    """Tensor-product rule from univariate factors."""
    return TensorQuadrature(rules)


def export_nodes_csv(grid, path):
    """Write the tensor grid as ``index,y1,...,yN,weight`` rows.

    Full double precision; the index column keys externally computed model
    values back to their nodes.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["index"] + [f"y{j + 1}" for j in range(grid.dimension)] + ["weight"]
        )
        for i in range(grid.size):
            row = [str(i)]
            row += [FLOAT_FMT % v for v in grid.nodes[i]]
            row.append(FLOAT_FMT % grid.weights[i])
            writer.writerow(row)


def read_nodes_csv(path):
    """Read a grid export back as (indices, nodes, weights)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "index" or header[-1] != "weight":
            raise TableIngestionError(f"{path}: not a node export (header {header})")
        dim = len(header) - 2
        indices = []
        coords = []
        weights = []
        for row in reader:
            if not row:
                continue
            if len(row) != dim + 2:
                raise TableIngestionError(f"{path}: malformed row {row!r}")
            try:
                indices.append(int(row[0]))
                coords.append([float(v) for v in row[1 : 1 + dim]])
                weights.append(float(row[-1]))
            except ValueError as exc:
                raise TableIngestionError(
                    f"{path}: non-numeric entry in row {row!r}"
                ) from exc
    return np.asarray(indices), np.asarray(coords), np.asarray(weights)
