"""Convergence studies: error versus order for competing maps, rate fits.

A study runs the same projection workflow once per (map, order) pair,
scores every surrogate against one shared validation sample set and one
shared high-order quadrature reference for the moments, and fits the
geometric convergence rate from the error decay.  Sharing the samples and
the reference across maps keeps the comparison paired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conformal import ConformalMap1D, MultivariateMap, identity_map, sausage9
from .density import JointDensity
from .exceptions import MappedPceError
from .models import evaluate_on_grid
from .pce import PCBasis, project
from .quadrature import gauss_rule, tensor_rule
from .stats import mean, std

DEFAULT_RATE_WINDOW = (4, 18)
DEFAULT_REFERENCE_NODES = 200


@dataclass(frozen=True)
class StudyRow:
    order: int
    map_name: str
    e_cv: float
    mean_err: float
    std_err: float
    model_evals: int


@dataclass
class StudyResult:
    rows: list = field(default_factory=list)
    reference_mean: complex = 0.0
    reference_std: float = 0.0
    rates: dict = field(default_factory=dict)
    rate_window: tuple = DEFAULT_RATE_WINDOW

    def rows_for(self, map_name):
        return [r for r in self.rows if r.map_name == map_name]

    def map_names(self):
        seen = []
        for r in self.rows:
            if r.map_name not in seen:
                seen.append(r.map_name)
        return seen


def _as_multimap(mapping, dimension):
    if mapping is None:
        mapping = identity_map()
    if isinstance(mapping, ConformalMap1D):
        return MultivariateMap([mapping] * dimension)
    if isinstance(mapping, MultivariateMap):
        if mapping.dimension != dimension:
            raise ValueError(
                f"map dimension {mapping.dimension} != model dimension {dimension}"
            )
        return mapping
    raise TypeError(f"not a map: {mapping!r}")


def default_maps():
    """The standard comparison pair: no map versus the degree-9 stretch."""
    return {"identity": identity_map(), "sausage9": sausage9()}


def reference_moments(model, density, nodes_per_dim=DEFAULT_REFERENCE_NODES):
    """Mean and standard deviation from a dense tensor Gauss rule.

    This is the moment reference a study converges against; it never goes
    through an expansion.
    """
    if not isinstance(density, JointDensity):
        density = JointDensity([density])
    grid = tensor_rule([gauss_rule(f, int(nodes_per_dim)) for f in density.factors])
    values = evaluate_on_grid(model, grid.nodes)
    mu = np.sum(grid.weights * values)
    second = np.sum(grid.weights * np.abs(values) ** 2)
    var = max(float(second - abs(mu) ** 2), 0.0)
    return complex(mu), float(np.sqrt(var))


def fit_rate(orders, errors, window=DEFAULT_RATE_WINDOW):
    """Geometric rate fitted from squared-error decay over an order window.

    With errors behaving like C * r**(-2p), the least-squares slope of
    log10(error) against order p gives r = 10**(-slope/2).  Orders outside
    the window or with non-finite or non-positive error are dropped;
    fewer than two usable points yield nan.
    """
    orders = np.asarray(orders, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    lo, hi = window
    keep = (orders >= lo) & (orders <= hi) & np.isfinite(errors) & (errors > 0.0)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(orders[keep], np.log10(errors[keep]), 1)[0]
    return float(10.0 ** (-0.5 * slope))


def fit_decay_slope(level_energy):
    """Least-squares slope of log coefficient energy against level.

    Levels at the roundoff floor relative to the peak (below peak times
    eps^2, e.g. odd levels of an even model) carry no decay information
    and are excluded; fewer than two usable levels yield nan.
    """
    level_energy = np.asarray(level_energy, dtype=np.float64)
    levels = np.arange(level_energy.size, dtype=np.float64)
    floor = np.max(level_energy, initial=0.0) * np.finfo(np.float64).eps ** 2
    keep = level_energy > floor
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(levels[keep], np.log(level_energy[keep]), 1)[0])


def run_study(
    model,
    density,
    maps=None,
    orders=range(0, 21),
    cv_samples=1000,
    seed=0,
    reference_nodes=DEFAULT_REFERENCE_NODES,
    rate_window=DEFAULT_RATE_WINDOW,
    quad_nodes=None,
):
    """Run the order sweep for every map and collect one row per pair.

    The validation samples are drawn once from ``density`` with ``seed``
    and reused across every order and map.  ``quad_nodes`` overrides the
    per-order default of order+1 projection nodes per dimension.
    """
    if not isinstance(density, JointDensity):
        density = JointDensity([density])
    if maps is None:
        maps = default_maps()
    orders = [int(p) for p in orders]
    if not orders:
        raise ValueError("no orders requested")
    if min(orders) < 0:
        raise ValueError(f"orders must be >= 0, got {min(orders)}")

    samples = density.sample(int(cv_samples), seed)
    try:
        truth = model.evaluate_batch(samples)
        ref_mean, ref_std = reference_moments(model, density, reference_nodes)
    except MappedPceError:
        # Tabulated models exist only on their projection grid; validation
        # error and moment references are unavailable for them.
        truth = None
        ref_mean, ref_std = complex(float("nan")), float("nan")

    result = StudyResult(
        reference_mean=ref_mean, reference_std=ref_std, rate_window=tuple(rate_window)
    )
    for map_name, mapping in maps.items():
        mapping = _as_multimap(mapping, density.dimension)
        for p in orders:
            basis = PCBasis(density, p, mapping)
            nodes = quad_nodes if quad_nodes is not None else p + 1
            surrogate = project(model, basis, nodes)
            if truth is None:
                e_cv = float("nan")
            else:
                residual = surrogate.evaluate(samples) - truth
                e_cv = float(np.mean(np.abs(residual) ** 2))
            result.rows.append(
                StudyRow(
                    order=p,
                    map_name=map_name,
                    e_cv=e_cv,
                    mean_err=abs(mean(surrogate) - ref_mean),
                    std_err=abs(std(surrogate) - ref_std),
                    model_evals=surrogate.metadata["quadrature_nodes"],
                )
            )
        rows = result.rows_for(map_name)
        result.rates[map_name] = fit_rate(
            [r.order for r in rows], [r.e_cv for r in rows], tuple(rate_window)
        )
    return result
