"""Built-in parametric models and the adapter for externally computed values.

The RLC circuit is the analytic benchmark: its current amplitude has a
conjugate pole pair on the imaginary axis whose distance from the interval
controls the spectral convergence rate, making it the reference problem for
rate studies.  The tabulated adapter couples external solvers through the
exported quadrature grid.
"""

from __future__ import annotations

import cmath
import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .conformal import IdentityMap, polynomial_continuation
from .exceptions import MappedPceError, ProjectionError, TableIngestionError

_NODE_MATCH_TOL = 1e-10


class ParametricModel:
    """A scalar quantity of interest over the parameter hypercube [-1,1]^N.

    ``evaluator`` maps one parameter vector (shape (N,)) to a real or
    complex scalar; set ``vectorized=True`` if it also accepts an (n, N)
    batch and returns shape (n,).
    """

    def __init__(self, dimension, evaluator, label, vectorized=False):
        self.dimension = int(dimension)
        self._evaluator = evaluator
        self.label = label
        self.vectorized = bool(vectorized)

    def __call__(self, y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.dimension,):
            raise ValueError(
                f"{self.label}: expected parameter vector of shape ({self.dimension},), "
                f"got {y.shape}"
            )
        return complex(self._evaluator(y))

    def evaluate_node(self, index, y):
        """Evaluate at grid node ``index`` located at ``y``.

        The default ignores the index; the tabulated adapter keys on it.
        """
        return self(y)

    def evaluate_batch(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.vectorized:
            return np.asarray(self._evaluator(points), dtype=np.complex128)
        return np.array([self(p) for p in points], dtype=np.complex128)

    def __repr__(self):
        return f"<ParametricModel {self.label} N={self.dimension}>"


def evaluate_on_grid(model, nodes):
    """Evaluate ``model`` once per tensor node, preserving node order.

    Honors the MAPPEDPCE_WORKERS environment variable for thread-based
    dispatch of non-vectorized models; results are gathered in node order
    regardless of scheduling.  A failure aborts with the node identified.
    """
    nodes = np.atleast_2d(nodes)
    if model.vectorized and type(model).evaluate_node is ParametricModel.evaluate_node:
        try:
            return model.evaluate_batch(nodes)
        except Exception as exc:
            raise ProjectionError(f"{model.label}: batch evaluation failed: {exc}") from exc

    def at_node(i):
        try:
            return model.evaluate_node(i, nodes[i])
        except MappedPceError:
            raise
        except Exception as exc:
            raise ProjectionError(
                f"{model.label}: evaluation failed at node {i} (y={nodes[i]!r}): {exc}"
            ) from exc

    workers = int(os.environ.get("MAPPEDPCE_WORKERS", "1") or "1")
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(at_node, range(len(nodes))))
    else:
        values = [at_node(i) for i in range(len(nodes))]
    return np.asarray(values, dtype=np.complex128)


@dataclass(frozen=True)
class RLCModel:
    """Series RLC circuit with a linearly parametrized inductance.

    The inductance is ``L(y) = L0 + dL * y`` for y in [-1,1]; all values
    are SI.  The quantity of interest is the amplitude of the current under
    harmonic excitation.
    """

    omega: float = 1.0e4
    u_e: float = 1.0
    C: float = 1.0e-5
    R: float = 1.0
    L0: float = 1.0e-3
    dL: float = 0.25e-3

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"resistance must be positive, got {self.R}")
        if self.C <= 0:
            raise ValueError(f"capacitance must be positive, got {self.C}")
        if self.L0 - abs(self.dL) <= 0:
            raise ValueError(
                f"inductance L0 +- dL must stay positive on [-1,1] "
                f"(L0={self.L0}, dL={self.dL})"
            )

    def inductance(self, y):
        return self.L0 + self.dL * np.asarray(y, dtype=np.float64)

    def current(self, y):
        """Complex current phasor at parameter y (vectorized)."""
        L = self.inductance(y)
        impedance_term = -L * self.omega**2 + 1j * self.omega * self.R + 1.0 / self.C
        return 1j * self.omega * self.u_e / impedance_term

    def amplitude(self, y):
        """Current amplitude |i(y)|, the study's quantity of interest."""
        return np.abs(self.current(y))

    def model(self):
        return ParametricModel(
            1,
            lambda y: self.amplitude(np.asarray(y)[..., 0]),
            label=f"rlc(R={self.R:g})",
            vectorized=True,
        )


def rlc_amplitude(model, y):
    return model.amplitude(y)


def rlc_pole_locations(model):
    """Poles of the complex continuation of the current: a conjugate pair.

    The impedance vanishes (up to the capacitive offset canceling the
    inductive one) where L(y) balances the damping term, which puts the
    pair at ``+- i R / (omega * dL)``.
    """
    if model.dL == 0:
        raise ValueError("dL = 0: the current has no poles in the parameter plane")
    b = model.R / (model.omega * abs(model.dL))
    return complex(0.0, b), complex(0.0, -b)


def bernstein_rate(pole):
    """Size of the Bernstein ellipse (foci +-1) through ``pole``.

    Size means semi-major plus semi-minor axis; computed as the larger
    magnitude of ``z +- sqrt(z^2 - 1)``, which inverts the Joukowski map.
    For a purely imaginary pole ib this is ``b + sqrt(b^2 + 1)``.
    """
    z = complex(pole)
    if abs(z.imag) == 0.0 and abs(z.real) <= 1.0:
        raise ValueError(f"pole {z} lies on [-1,1]: ellipse is degenerate")
    root = cmath.sqrt(z * z - 1.0)
    return max(abs(z + root), abs(z - root))


def _ellipse_boundary(size, num_points):
    theta = np.linspace(0.0, 2.0 * np.pi, num_points, endpoint=False)
    u = size * np.exp(1j * theta)
    return 0.5 * (u + 1.0 / u)


def _winding_number(curve, point):
    rel = curve - point
    angles = np.angle(rel)
    dgamma = np.diff(np.concatenate([angles, angles[:1]]))
    dgamma = (dgamma + np.pi) % (2.0 * np.pi) - np.pi
    return int(round(dgamma.sum() / (2.0 * np.pi)))


def mapped_bernstein_rate(map_1d, pole, num_points=4096, tol=1e-4, r_hi=16.0):
    """Largest ellipse size whose image under the map avoids ``pole``.

    Scans the ellipse boundary through the map's polynomial continuation
    and bisects on the winding number of the image curve around the pole.
    This is the convergence-rate oracle for mapped approximations of
    functions with a known pole.
    """
    if isinstance(map_1d, IdentityMap):
        return bernstein_rate(pole)
    pole = complex(pole)

    def excludes(size):
        curve = polynomial_continuation(map_1d, _ellipse_boundary(size, num_points))
        return _winding_number(curve, pole) == 0

    lo = 1.0
    if not excludes(lo * (1.0 + 1e-9)):
        raise ValueError(f"pole {pole} is inside the image of the unit interval")
    hi = lo
    while excludes(hi) and hi < r_hi:
        lo = hi
        hi *= 1.25
    if hi >= r_hi:
        raise ValueError(f"no bounding ellipse found below size {r_hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excludes(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def runge_model(a):
    """Runge-type test function 1/(1 + a y^2) with poles at +- i/sqrt(a)."""
    a = float(a)
    if a <= 0:
        raise ValueError(f"parameter a must be positive, got {a}")
    return ParametricModel(
        1,
        lambda y: 1.0 / (1.0 + a * np.asarray(y)[..., 0] ** 2),
        label=f"runge(a={a:g})",
        vectorized=True,
    )


def runge_poles(a):
    a = float(a)
    if a <= 0:
        raise ValueError(f"parameter a must be positive, got {a}")
    b = 1.0 / math.sqrt(a)
    return complex(0.0, b), complex(0.0, -b)


def runge_product_model(a, dimension):
    """Product of independent Runge factors, one per input dimension."""
    a = float(a)
    dimension = int(dimension)
    if a <= 0 or dimension < 1:
        raise ValueError("need a > 0 and dimension >= 1")

    def evaluator(points):
        points = np.asarray(points, dtype=np.float64)
        return np.prod(1.0 / (1.0 + a * points**2), axis=-1)

    return ParametricModel(
        dimension, evaluator, label=f"runge_product(a={a:g},N={dimension})", vectorized=True
    )


def interaction_toy_model():
    """The two-input toy y1 + y1*y2 with a known exact variance split."""

    def evaluator(points):
        points = np.asarray(points, dtype=np.float64)
        return points[..., 0] + points[..., 0] * points[..., 1]

    return ParametricModel(2, evaluator, label="interaction_toy", vectorized=True)


class TabulatedModel(ParametricModel):
    """Model backed by externally computed values on one exact tensor grid.

    Evaluation is keyed by the grid's node index; querying anything but the
    grid nodes is an error by design, so tabulated models are used for
    projection only.
    """

    def __init__(self, grid, values, label="tabulated"):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (grid.size,):
            raise TableIngestionError(
                f"need exactly one value per grid node ({grid.size}), got {values.shape}"
            )
        super().__init__(grid.dimension, None, label=label, vectorized=False)
        self.grid = grid
        self.values = values

    def __call__(self, y):
        raise MappedPceError(
            f"{self.label}: tabulated models are only defined on their projection grid"
        )

    def evaluate_node(self, index, y):
        if not 0 <= index < self.grid.size:
            raise TableIngestionError(f"node index {index} outside grid of size {self.grid.size}")
        expected = self.grid.nodes[index]
        y = np.asarray(y, dtype=np.float64)
        if np.max(np.abs(expected - y)) > _NODE_MATCH_TOL:
            raise TableIngestionError(
                f"{self.label}: node {index} coordinate mismatch: grid {expected!r} "
                f"vs query {y!r}"
            )
        return self.values[index]


def tabulated_from_csv(path, grid):
    """Ingest ``index,y1,...,yN,value_real,value_imag`` rows for ``grid``.

    Rows may be permuted (the index column keys them); missing, duplicate
    or out-of-range indices and coordinate mismatches beyond 1e-10 are
    ingestion errors listing the offenders.
    """
    expected_cols = grid.dimension + 3
    values = np.full(grid.size, np.nan, dtype=np.complex128)
    seen = np.zeros(grid.size, dtype=bool)
    duplicates = []
    mismatched = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TableIngestionError(f"{path}: empty file")
        if len(header) != expected_cols:
            raise TableIngestionError(
                f"{path}: expected {expected_cols} columns "
                f"(index,y1..y{grid.dimension},value_real,value_imag), got {len(header)}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != expected_cols:
                raise TableIngestionError(f"{path}: malformed row {row!r}")
            try:
                idx = int(row[0])
            except ValueError as exc:
                raise TableIngestionError(f"{path}: bad node index in row {row!r}") from exc
            if not 0 <= idx < grid.size:
                raise TableIngestionError(
                    f"{path}: node index {idx} outside grid of size {grid.size}"
                )
            if seen[idx]:
                duplicates.append(idx)
                continue
            try:
                coords = np.array([float(v) for v in row[1 : 1 + grid.dimension]])
                value = complex(float(row[-2]), float(row[-1]))
            except ValueError as exc:
                raise TableIngestionError(
                    f"{path}: non-numeric entry in row {row!r}"
                ) from exc
            if np.max(np.abs(coords - grid.nodes[idx])) > _NODE_MATCH_TOL:
                mismatched.append(idx)
            values[idx] = value
            seen[idx] = True
    if duplicates:
        raise TableIngestionError(f"{path}: duplicate node indices {sorted(duplicates)}")
    missing = np.flatnonzero(~seen)
    if missing.size:
        raise TableIngestionError(
            f"{path}: missing node indices {missing.tolist()[:20]}"
            + ("..." if missing.size > 20 else "")
        )
    if mismatched:
        raise TableIngestionError(
            f"{path}: node coordinates disagree with the grid beyond {_NODE_MATCH_TOL} "
            f"at indices {sorted(mismatched)[:20]}"
        )
    return TabulatedModel(grid, values, label=f"tabulated({os.path.basename(path)})")
