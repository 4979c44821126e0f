# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for branch-sum Gaussian evaluation and detector reductions.

On a uniform grid, exp(-u_i^2) with u_{i+1} = u_i + delta obeys a pair of
multiplicative recurrences (ratio w_i, second ratio a constant q), so a
whole grid sweep costs two multiplies per point plus one exp seed per
block.  Blocks are reseeded every 256 points to cap rounding drift and to
recover from tail underflow; a block whose seed underflows (or whose ratio
seed is not finite) is computed point-by-point instead.
"""

from libc.math cimport exp, sin, isfinite

import numpy as np

BACKEND_NAME = "compiled"

cdef Py_ssize_t BLOCK = 256
cdef double TWO_PI = 6.283185307179586


cdef void _accum_branch(double cr, double ci, double s, double inv_sigma,
                        double k0, double dk, Py_ssize_t n,
                        double[::1] re, double[::1] im, bint with_imag) noexcept nogil:
    cdef Py_ssize_t i, i0, stop
    cdef double delta = dk * inv_sigma
    cdef double q = exp(-2.0 * delta * delta)
    cdef double u, v, w
    i0 = 0
    while i0 < n:
        stop = i0 + BLOCK
        if stop > n:
            stop = n
        u = (k0 + i0 * dk - s) * inv_sigma
        v = exp(-u * u)
        w = exp(-delta * (2.0 * u + delta))
        if v == 0.0 or not isfinite(w):
            for i in range(i0, stop):
                u = (k0 + i * dk - s) * inv_sigma
                v = exp(-u * u)
                re[i] += cr * v
                if with_imag:
                    im[i] += ci * v
        else:
            for i in range(i0, stop):
                re[i] += cr * v
                if with_imag:
                    im[i] += ci * v
                v *= w
                w *= q
        i0 = stop


def profile(coeffs_in, shifts_in, double sigma, k_in):
    """Complex branch-sum amplitude on a uniform grid."""
    coeffs = np.ascontiguousarray(coeffs_in, dtype=np.complex128)
    shifts_arr = np.ascontiguousarray(shifts_in, dtype=np.float64)
    k_arr = np.ascontiguousarray(k_in, dtype=np.float64)

    cdef double norm = (2.0 / np.pi) ** 0.25 / sigma ** 0.5
    cr_arr = np.ascontiguousarray(coeffs.real * norm)
    ci_arr = np.ascontiguousarray(coeffs.imag * norm)
    cdef double[::1] cr = cr_arr
    cdef double[::1] ci = ci_arr
    cdef double[::1] sh = shifts_arr
    cdef double[::1] k = k_arr
    cdef Py_ssize_t nb = cr.shape[0], ng = k.shape[0], b
    cdef bint with_imag = bool(np.any(ci_arr))
    cdef double dk = (k[ng - 1] - k[0]) / (ng - 1) if ng > 1 else 0.0

    re_arr = np.zeros(ng)
    im_arr = np.zeros(ng)
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    for b in range(nb):
        _accum_branch(cr[b], ci[b], sh[b], 1.0 / sigma, k[0], dk, ng, re, im, with_imag)
    return re_arr + 1j * im_arr


def dither_series(coeffs_in, member_in, amps_in, freqs_in, phases_in,
                  double sigma, k_in, wp_in, wf_in, ws_in,
                  Py_ssize_t n_samples, double dt, int mode):
    """Detector series under sinusoidal mirror dithers (see the portable twin)."""
    coeffs = np.ascontiguousarray(coeffs_in, dtype=np.complex128)
    cdef double norm = (2.0 / np.pi) ** 0.25 / sigma ** 0.5
    cr_arr = np.ascontiguousarray(coeffs.real * norm)
    ci_arr = np.ascontiguousarray(coeffs.imag * norm)
    cdef double[::1] cr = cr_arr
    cdef double[::1] ci = ci_arr
    cdef double[:, ::1] member = np.ascontiguousarray(member_in, dtype=np.float64)
    cdef double[::1] amps = np.ascontiguousarray(amps_in, dtype=np.float64)
    cdef double[::1] freqs = np.ascontiguousarray(freqs_in, dtype=np.float64)
    cdef double[::1] phases = np.ascontiguousarray(phases_in, dtype=np.float64)
    cdef double[::1] k = np.ascontiguousarray(k_in, dtype=np.float64)
    cdef double[::1] wp = np.ascontiguousarray(wp_in, dtype=np.float64)
    cdef double[::1] wf = np.ascontiguousarray(wf_in, dtype=np.float64)
    cdef double[::1] ws = np.ascontiguousarray(ws_in, dtype=np.float64)

    cdef Py_ssize_t nb = cr.shape[0], nm = amps.shape[0], ng = k.shape[0]
    cdef Py_ssize_t n, b, m, i
    cdef bint with_imag = bool(np.any(ci_arr))
    cdef double dk = (k[ng - 1] - k[0]) / (ng - 1) if ng > 1 else 0.0
    cdef double inv_sigma = 1.0 / sigma
    cdef double t, s, f, acc_p, acc_m, acc_s

    kap_arr = np.empty(nm)
    sh_arr = np.empty(nb)
    re_arr = np.empty(ng)
    im_arr = np.empty(ng)
    out_arr = np.empty(n_samples)
    cdef double[::1] kap = kap_arr
    cdef double[::1] sh = sh_arr
    cdef double[::1] re = re_arr
    cdef double[::1] im = im_arr
    cdef double[::1] out = out_arr

    with nogil:
        for n in range(n_samples):
            t = n * dt
            for m in range(nm):
                kap[m] = amps[m] * sin(TWO_PI * freqs[m] * t + phases[m])
            for b in range(nb):
                s = 0.0
                for m in range(nm):
                    s += member[b, m] * kap[m]
                sh[b] = s
            for i in range(ng):
                re[i] = 0.0
            if with_imag:
                for i in range(ng):
                    im[i] = 0.0
            for b in range(nb):
                _accum_branch(cr[b], ci[b], sh[b], inv_sigma, k[0], dk, ng,
                              re, im, with_imag)
            acc_p = 0.0
            acc_m = 0.0
            acc_s = 0.0
            if with_imag:
                for i in range(ng):
                    f = re[i] * re[i] + im[i] * im[i]
                    acc_p += wp[i] * f
                    acc_m += wf[i] * f
                    acc_s += ws[i] * f
            else:
                for i in range(ng):
                    f = re[i] * re[i]
                    acc_p += wp[i] * f
                    acc_m += wf[i] * f
                    acc_s += ws[i] * f
            out[n] = acc_m / acc_p if mode == 0 else acc_s
    return out_arr
