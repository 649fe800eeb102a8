# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the port-objective kernel (see _portgrid_py for the
reference semantics).  Same inputs, same outputs to 1e-12."""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, fabs, sin

cnp.import_array()

cdef double _SING_TOL = 1e-9


cdef inline double _dirichlet(int n, double y) nogil:
    cdef double s = sin(0.5 * y)
    cdef long k
    if fabs(s) < _SING_TOL:
        k = <long> (y / (2.0 * M_PI) + (0.5 if y >= 0 else -0.5))
        if (k * (n - 1)) % 2 == 0:
            return <double> n
        return <double> (-n)
    return sin(0.5 * n * y) / s


def objective_grid(
    double[::1] weight,
    double[::1] phase,
    double[::1] doppler,
    double[::1] cos_eod,
    double[::1] ses_aod,
    double[::1] cos_eoa,
    int n_h,
    int n_v,
    double d_h,
    double d_v,
    double wavelength,
    double t,
    double dt,
    double[::1] x,
):
    cdef Py_ssize_t n_paths = weight.shape[0]
    cdef Py_ssize_t n_x = x.shape[0]
    cdef Py_ssize_t p, q, g
    cdef double n_t = n_h * n_v
    cdef double a, b, dir_hv, psi, amp, dslope

    out_arr = np.zeros(n_x, dtype=np.float64)
    sin_vs_arr = np.empty((n_paths, n_x), dtype=np.float64)
    slope_arr = np.empty(n_paths, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[:, ::1] sin_vs = sin_vs_arr
    cdef double[::1] slope = slope_arr
    cdef double off, w2

    with nogil:
        for p in range(n_paths):
            slope[p] = M_PI / wavelength * cos_eoa[p]
            off = M_PI * dt * doppler[p]
            for g in range(n_x):
                sin_vs[p, g] = sin(off + slope[p] * x[g])

        for p in range(n_paths):
            w2 = 4.0 * n_t * weight[p] * weight[p]
            for g in range(n_x):
                out[g] += w2 * sin_vs[p, g] * sin_vs[p, g]

        for p in range(n_paths):
            for q in range(p + 1, n_paths):
                a = 2.0 * M_PI / wavelength * d_v * (cos_eod[p] - cos_eod[q])
                b = 2.0 * M_PI / wavelength * d_h * (ses_aod[p] - ses_aod[q])
                dir_hv = _dirichlet(n_h, b) * _dirichlet(n_v, a)
                if dir_hv == 0.0:
                    continue
                psi = (
                    (phase[p] - phase[q])
                    + M_PI * (2.0 * t + dt) * (doppler[p] - doppler[q])
                    + 0.5 * (n_h - 1) * b
                    + 0.5 * (n_v - 1) * a
                )
                amp = 8.0 * weight[p] * weight[q] * dir_hv
                dslope = slope[p] - slope[q]
                for g in range(n_x):
                    out[g] += amp * sin_vs[p, g] * sin_vs[q, g] * cos(psi + dslope * x[g])
    return out_arr
