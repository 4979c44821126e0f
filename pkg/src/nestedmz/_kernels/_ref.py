"""Portable NumPy backend for the hot kernels.

Used whenever the compiled extension is unavailable (or forced via the
``NESTEDMZ_KERNEL`` environment variable).  The compiled backend must
agree with this one to close to machine precision; tests compare them.
"""

import numpy as np

BACKEND_NAME = "portable"

_CHUNK = 256  # time samples vectorized per block; fixed so summation order is stable


def _norm(sigma: float) -> float:
    return (2.0 / np.pi) ** 0.25 / np.sqrt(sigma)


def profile(coeffs: np.ndarray, shifts: np.ndarray, sigma: float, k: np.ndarray) -> np.ndarray:
    """Sum of shifted Gaussian branches evaluated on the grid.

    Returns the complex amplitude Sum_b c_b N exp(-((k-s_b)/sigma)^2).
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    shifts = np.asarray(shifts, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    z = (k[None, :] - shifts[:, None]) / sigma
    g = np.exp(-z * z)
    return (_norm(sigma) * coeffs) @ g


def dither_series(
    coeffs: np.ndarray,
    member: np.ndarray,
    amps: np.ndarray,
    freqs: np.ndarray,
    phases: np.ndarray,
    sigma: float,
    k: np.ndarray,
    w_prob: np.ndarray,
    w_first: np.ndarray,
    w_signed: np.ndarray,
    n_samples: int,
    dt: float,
    mode: int,
) -> np.ndarray:
    """Detector time series for sinusoidally dithered mirror tilts.

    ``member[b, m]`` counts how often branch b traverses mirror m, so the
    branch shift at time t is member @ kappa(t) with
    kappa_m(t) = amps_m sin(2 pi freqs_m t + phases_m).  ``mode`` selects
    the per-sample reduction: 0 = centroid (first moment over probability),
    1 = signed half-line difference (quadcell), both taken against the
    supplied quadrature weights.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    member = np.asarray(member, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    cn = coeffs * _norm(sigma)
    all_real = not np.any(cn.imag)
    if all_real:
        cn = cn.real

    out = np.empty(n_samples)
    t_all = np.arange(n_samples) * dt
    for start in range(0, n_samples, _CHUNK):
        t = t_all[start : start + _CHUNK, None]
        kappa = amps * np.sin(2.0 * np.pi * freqs * t + phases)  # (c, M)
        sh = kappa @ member.T  # (c, B)
        z = (k[None, None, :] - sh[:, :, None]) / sigma
        g = np.exp(-z * z)  # (c, B, G)
        prof = np.einsum("b,cbg->cg", cn, g)
        dens = prof * prof if all_real else prof.real**2 + prof.imag**2
        if mode == 0:
            out[start : start + _CHUNK] = (dens @ w_first) / (dens @ w_prob)
        else:
            out[start : start + _CHUNK] = dens @ w_signed
    return out
