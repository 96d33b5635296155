"""Statistics read off expansion coefficients, plus Monte Carlo validation.

Orthonormality makes the moments algebraic in the coefficients: the mean
is the constant coefficient and the variance is the energy of the rest.
Variance-based sensitivity indices follow by summing that energy over the
index subsets that involve a given dimension.
"""

from __future__ import annotations

import csv

import numpy as np

from .exceptions import ProjectionError
from .quadrature import FLOAT_FMT

_VARIANCE_FLOOR = 0.0


def mean(surrogate):
    """Expected value of the surrogate: the coefficient of the constant."""
    indices = surrogate.basis.multi_indices
    zero = np.flatnonzero(~indices.any(axis=1))
    return complex(surrogate.coefficients[zero[0]])


def variance(surrogate):
    """Variance: summed squared magnitude of all non-constant coefficients."""
    indices = surrogate.basis.multi_indices
    nonconstant = indices.any(axis=1)
    return float(np.sum(np.abs(surrogate.coefficients[nonconstant]) ** 2))


def std(surrogate):
    return float(np.sqrt(variance(surrogate)))


def sobol_indices(surrogate):
    """Main and total variance shares per input dimension.

    Returns ``(main, total)`` arrays of length N.  ``main[d]`` sums the
    coefficient energy of indices involving only dimension d; ``total[d]``
    sums everything involving d at all.  Both are normalized by the
    variance, so mains sum to at most 1 and totals to at least 1.
    """
    indices = surrogate.basis.multi_indices
    energy = np.abs(surrogate.coefficients) ** 2
    var = variance(surrogate)
    if var <= _VARIANCE_FLOOR:
        raise ValueError("variance is zero: sensitivity indices are undefined")
    active = indices > 0
    n_active = active.sum(axis=1)
    main = np.empty(indices.shape[1])
    total = np.empty(indices.shape[1])
    for d in range(indices.shape[1]):
        main[d] = energy[active[:, d] & (n_active == 1)].sum() / var
        total[d] = energy[active[:, d]].sum() / var
    return main, total


def cross_validation_error(surrogate, model, num_samples, seed):
    """Mean squared modulus error over random samples of the input density.

    Samples are drawn from the surrogate's original (untransformed)
    density; the same ``seed`` therefore reproduces the same sample set
    for any surrogate sharing that density, which keeps comparisons
    between maps and orders paired.
    """
    num_samples = int(num_samples)
    if num_samples < 1:
        raise ValueError(f"need at least one validation sample, got {num_samples}")
    samples = surrogate.basis.density.sample(num_samples, seed)
    try:
        truth = model.evaluate_batch(samples)
    except ProjectionError:
        raise
    except Exception as exc:
        raise ProjectionError(
            f"{model.label}: validation evaluation failed ({exc}); first sample "
            f"{samples[0]!r}"
        ) from exc
    approx = surrogate.evaluate(samples)
    return float(np.mean(np.abs(approx - truth) ** 2))


def rms_validation_error(surrogate, model, num_samples, seed):
    """Square root of the mean squared validation error."""
    return float(np.sqrt(cross_validation_error(surrogate, model, num_samples, seed)))


def write_sobol_csv(surrogate, path):
    main, total = sobol_indices(surrogate)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "S_main", "S_total"])
        for d in range(len(main)):
            writer.writerow([d + 1, FLOAT_FMT % main[d], FLOAT_FMT % total[d]])


def write_moments_csv(surrogate, path):
    mu = mean(surrogate)
    var = variance(surrogate)
    sd = std(surrogate)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["statistic", "value_real", "value_imag"])
        writer.writerow(["mean", FLOAT_FMT % mu.real, FLOAT_FMT % mu.imag])
        writer.writerow(["variance", FLOAT_FMT % var, FLOAT_FMT % 0.0])
        writer.writerow(["std", FLOAT_FMT % sd, FLOAT_FMT % 0.0])
