"""Numeric kernels with a numba fast path and a pure-numpy fallback.

The two hot loops of the package live here: evaluation of orthonormal
polynomials through their three-term recurrence, and pointwise evaluation /
inversion of odd polynomial maps.  Set ``MAPPEDPCE_DISABLE_NUMBA=1`` in the
environment (before import) to force the numpy implementations; otherwise
numba is used when importable.  Both backends perform the same arithmetic in
the same order, so results agree to the last bit up to compiler fusion.

Odd polynomials are represented by their unnormalized coefficients
``c[0]*s + c[1]*s**3 + ...`` together with a scalar divisor ``scale``.
"""

import os

import numpy as np

NUMBA_DISABLED = os.environ.get("MAPPEDPCE_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
}


def _odd_poly_eval_numpy(coeffs, scale, s):
    s = np.asarray(s, dtype=np.float64)
    s2 = s * s
    acc = np.full_like(s, coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * s2 + coeffs[k]
    return acc * s / scale


def _odd_poly_deriv_numpy(coeffs, scale, s):
    s = np.asarray(s, dtype=np.float64)
    s2 = s * s
    n = len(coeffs)
    acc = np.full_like(s, (2 * n - 1) * coeffs[-1])
    for k in range(n - 2, -1, -1):
        acc = acc * s2 + (2 * k + 1) * coeffs[k]
    return acc / scale


def _odd_poly_inverse_numpy(coeffs, scale, y, tol, maxit):
    # Safeguarded Newton per point: bisection step whenever the Newton
    # update leaves the current bracket.  Vectorized with an active mask.
    y = np.asarray(y, dtype=np.float64)
    s = y.copy()
    lo = np.full_like(y, -1.0)
    hi = np.full_like(y, 1.0)
    active = np.ones(y.shape, dtype=bool)
    for _ in range(maxit):
        f = _odd_poly_eval_numpy(coeffs, scale, s) - y
        converged = np.abs(f) <= tol
        active = active & ~converged
        if not active.any():
            break
        pos = active & (f > 0.0)
        neg = active & (f <= 0.0)
        hi[pos] = s[pos]
        lo[neg] = s[neg]
        step = f / _odd_poly_deriv_numpy(coeffs, scale, s)
        trial = s - step
        outside = active & ((trial <= lo) | (trial >= hi))
        trial[outside] = 0.5 * (lo[outside] + hi[outside])
        s[active] = trial[active]
    return s


def _recurrence_eval_numpy(alpha, sqrt_beta, num_values, pts):
    pts = np.asarray(pts, dtype=np.float64)
    out = np.empty((pts.size, num_values))
    out[:, 0] = 1.0 / sqrt_beta[0]
    if num_values > 1:
        out[:, 1] = (pts - alpha[0]) * out[:, 0] / sqrt_beta[1]
    for k in range(1, num_values - 1):
        out[:, k + 1] = (
            (pts - alpha[k]) * out[:, k] - sqrt_beta[k] * out[:, k - 1]
        ) / sqrt_beta[k + 1]
    return out


_NUMPY_BACKEND = {
    "odd_poly_eval": _odd_poly_eval_numpy,
    "odd_poly_deriv": _odd_poly_deriv_numpy,
    "odd_poly_inverse": _odd_poly_inverse_numpy,
    "recurrence_eval": _recurrence_eval_numpy,
}

_NUMBA_BACKEND = None
if not NUMBA_DISABLED:
    try:
        from numba import njit
    except ImportError:
        pass
    else:

        @njit(cache=True)
        def _odd_poly_eval_numba(coeffs, scale, s):
            out = np.empty_like(s)
            n = coeffs.shape[0]
            for i in range(s.shape[0]):
                s2 = s[i] * s[i]
                acc = coeffs[n - 1]
                for k in range(n - 2, -1, -1):
                    acc = acc * s2 + coeffs[k]
                out[i] = acc * s[i] / scale
            return out

        @njit(cache=True)
        def _odd_poly_deriv_numba(coeffs, scale, s):
            out = np.empty_like(s)
            n = coeffs.shape[0]
            for i in range(s.shape[0]):
                s2 = s[i] * s[i]
                acc = (2 * n - 1) * coeffs[n - 1]
                for k in range(n - 2, -1, -1):
                    acc = acc * s2 + (2 * k + 1) * coeffs[k]
                out[i] = acc / scale
            return out

        @njit(cache=True)
        def _scalar_odd_eval(coeffs, scale, s):
            s2 = s * s
            acc = coeffs[coeffs.shape[0] - 1]
            for k in range(coeffs.shape[0] - 2, -1, -1):
                acc = acc * s2 + coeffs[k]
            return acc * s / scale

        @njit(cache=True)
        def _scalar_odd_deriv(coeffs, scale, s):
            n = coeffs.shape[0]
            s2 = s * s
            acc = (2 * n - 1) * coeffs[n - 1]
            for k in range(n - 2, -1, -1):
                acc = acc * s2 + (2 * k + 1) * coeffs[k]
            return acc / scale

        @njit(cache=True)
        def _odd_poly_inverse_numba(coeffs, scale, y, tol, maxit):
            out = np.empty_like(y)
            for i in range(y.shape[0]):
                target = y[i]
                s = target
                lo = -1.0
                hi = 1.0
                for _ in range(maxit):
                    f = _scalar_odd_eval(coeffs, scale, s) - target
                    if abs(f) <= tol:
                        break
                    if f > 0.0:
                        hi = s
                    else:
                        lo = s
                    trial = s - f / _scalar_odd_deriv(coeffs, scale, s)
                    if trial <= lo or trial >= hi:
                        trial = 0.5 * (lo + hi)
                    s = trial
                out[i] = s
            return out

        @njit(cache=True)
        def _recurrence_eval_numba(alpha, sqrt_beta, num_values, pts):
            out = np.empty((pts.shape[0], num_values))
            for i in range(pts.shape[0]):
                y = pts[i]
                p_prev = 1.0 / sqrt_beta[0]
                out[i, 0] = p_prev
                if num_values > 1:
                    p_cur = (y - alpha[0]) * p_prev / sqrt_beta[1]
                    out[i, 1] = p_cur
                    for k in range(1, num_values - 1):
                        p_next = (
                            (y - alpha[k]) * p_cur - sqrt_beta[k] * p_prev
                        ) / sqrt_beta[k + 1]
                        out[i, k + 1] = p_next
                        p_prev = p_cur
                        p_cur = p_next
            return out

        _NUMBA_BACKEND = {
            "odd_poly_eval": _odd_poly_eval_numba,
            "odd_poly_deriv": _odd_poly_deriv_numba,
            "odd_poly_inverse": _odd_poly_inverse_numba,
            "recurrence_eval": _recurrence_eval_numba,
        }

BACKEND = "numba" if _NUMBA_BACKEND is not None else "numpy"
_ACTIVE = _NUMBA_BACKEND if _NUMBA_BACKEND is not None else _NUMPY_BACKEND

odd_poly_eval = _ACTIVE["odd_poly_eval"]
odd_poly_deriv = _ACTIVE["odd_poly_deriv"]
odd_poly_inverse = _ACTIVE["odd_poly_inverse"]
recurrence_eval = _ACTIVE["recurrence_eval"]


def get_backend(name):
    """Return the kernel table for ``name`` ("numpy" or "numba").

    Used by the benchmark and by backend-agreement tests.  Raises
    RuntimeError if the numba backend is requested but unavailable.
    """
    if name == "numpy":
        return _NUMPY_BACKEND
    if name == "numba":
        if _NUMBA_BACKEND is None:
            raise RuntimeError(
                "numba backend unavailable (not installed or disabled by "
                "MAPPEDPCE_DISABLE_NUMBA)"
            )
        return _NUMBA_BACKEND
    raise ValueError(f"unknown backend {name!r}")
