"""Quadrature weight vectors for detector reductions on a uniform grid.

Every detector functional used in this package is a linear functional of
the probability density sampled on the grid, so each one is represented
as a single weight vector:

* ``w_prob``:   composite trapezoid, integrates the density,
* ``w_first``:  trapezoid against k, integrates the first moment,
* ``w_signed``: integrates sign(k) times the density.

The signed rule needs care at k = 0 where the integrand has a kink.  The
grid is split there; each half gets an Euler-Maclaurin endpoint
correction built from five-point derivative stencils, and the cell that
straddles zero is integrated against the local cubic interpolant.  That
makes the signed rule fourth-order accurate, which the plain trapezoid
split is not.  Tails are assumed to have decayed at the grid edges (the
same assumption the plain trapezoid rules make for Gaussian states).
"""

from typing import NamedTuple

import numpy as np

from ..errors import DomainError


class QuadWeights(NamedTuple):
    w_prob: np.ndarray
    w_first: np.ndarray
    w_signed: np.ndarray


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _cubic_integral_coeffs(x: float) -> np.ndarray:
    """Weights of f[j-1..j+2] in the integral of the interpolating cubic
    over [0, x] of the cell coordinate t, 0 <= x <= 1."""
    c0 = np.array([0.0, 1.0, 0.0, 0.0])
    c1 = np.array([-2.0, -3.0, 6.0, -1.0]) / 6.0
    c2 = np.array([1.0, -2.0, 1.0, 0.0]) / 2.0
    c3 = np.array([-1.0, 3.0, -3.0, 1.0]) / 6.0
    return c0 * x + c1 * (x**2 / 2) + c2 * (x**3 / 3) + c3 * (x**4 / 4)


def quadrature_weights(k: np.ndarray) -> QuadWeights:
    k = np.asarray(k, dtype=np.float64)
    n = k.size
    if n < 2:
        raise DomainError("quadrature grid needs at least two points")
    h = (k[-1] - k[0]) / (n - 1)
    if h <= 0:
        raise DomainError("quadrature grid must be increasing")
    if np.max(np.abs(np.diff(k) - h)) > 1e-9 * h:
        raise DomainError("quadrature grid must be uniform")

    w_prob = _trapezoid_weights(n, h)
    w_first = k * w_prob

    if k[0] >= 0.0:
        w_signed = w_prob.copy()
    elif k[-1] <= 0.0:
        w_signed = -w_prob
    else:
        w_signed = _signed_weights(k, h, w_prob)
    return QuadWeights(w_prob, w_first, w_signed)


def _signed_weights(k: np.ndarray, h: float, w_prob: np.ndarray) -> np.ndarray:
    n = k.size
    i_right = int(np.searchsorted(k, 0.0, side="left"))
    # Without room for the derivative stencils, fall back to the plain
    # sign-weighted trapezoid (only reachable on tiny diagnostic grids).
    if i_right < 3 or i_right > n - 4:
        return np.sign(k) * w_prob

    w = np.zeros(n)
    stencil = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * h)

    if k[i_right] == 0.0:
        i0 = i_right
        w[i0:] += _trapezoid_weights(n - i0, h)
        w[: i0 + 1] -= _trapezoid_weights(i0 + 1, h)
        # Both half-line integrals lose an O(h^2) endpoint term at the
        # kink; the corrections add up to (h^2/6) f'(0).
        w[[i0 - 2, i0 - 1, i0 + 1, i0 + 2]] += (h * h / 6.0) * stencil
    else:
        j = i_right - 1  # k[j] < 0 < k[j+1]
        w[i_right:] += _trapezoid_weights(n - i_right, h)
        w[: j + 1] -= _trapezoid_weights(j + 1, h)
        # Euler-Maclaurin corrections at the interior endpoints.
        w[[i_right - 2, i_right - 1, i_right + 1, i_right + 2]] += (
            h * h / 12.0
        ) * stencil
        w[[j - 2, j - 1, j + 1, j + 2]] += (h * h / 12.0) * stencil
        # Straddling cell: integrate sign(k) against the cubic through
        # the four surrounding samples.  With a = -k[j]/h the cell
        # contributes h * (I(1) - 2 I(a)).
        a = -k[j] / h
        coeffs = h * (_cubic_integral_coeffs(1.0) - 2.0 * _cubic_integral_coeffs(a))
        w[j - 1 : j + 3] += coeffs
    return w
