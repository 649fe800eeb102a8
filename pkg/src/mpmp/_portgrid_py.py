"""NumPy implementation of the port-objective kernel.

Evaluates the squared error norm between the port-shifted future channel and
the frozen reference channel, summed over all BS antennas, on a grid of port
offsets ``x`` (meters along the fluid antenna).  The antenna double sum is
collapsed with the Dirichlet-kernel identity

    sum_{k=1..n} cos(c + (k-1)y) = cos(c + (n-1)y/2) * sin(ny/2) / sin(y/2),

so the cost is O(n_paths^2 * len(x)) regardless of array size.  A compiled
twin of this module may be selected at import; both must agree to 1e-12.
"""
from __future__ import annotations

import math

import numpy as np

_PAIR_CHUNK = 256
_SING_TOL = 1e-9


def _dirichlet(n: int, y: np.ndarray) -> np.ndarray:
    """sin(n*y/2)/sin(y/2) with the analytic limit n*(-1)^(k(n-1)) at y=2*pi*k."""
    s = np.sin(0.5 * y)
    out = np.empty_like(y)
    sing = np.abs(s) < _SING_TOL
    reg = ~sing
    out[reg] = np.sin(0.5 * n * y[reg]) / s[reg]
    if np.any(sing):
        k = np.rint(y[sing] / (2.0 * math.pi)).astype(int)
        out[sing] = n * np.where((k * (n - 1)) % 2 == 0, 1.0, -1.0)
    return out


def objective_grid(
    weight: np.ndarray,
    phase: np.ndarray,
    doppler: np.ndarray,
    cos_eod: np.ndarray,
    ses_aod: np.ndarray,
    cos_eoa: np.ndarray,
    n_h: int,
    n_v: int,
    d_h: float,
    d_v: float,
    wavelength: float,
    t: float,
    dt: float,
    x: np.ndarray,
) -> np.ndarray:
    weight = np.asarray(weight, dtype=float)
    x = np.asarray(x, dtype=float)
    n_paths = weight.shape[0]
    n_t = n_h * n_v

    slope = math.pi / wavelength * np.asarray(cos_eoa, dtype=float)
    offset = math.pi * dt * np.asarray(doppler, dtype=float)
    sin_vs = np.sin(offset[:, None] + slope[:, None] * x[None, :])  # (P, G)

    f = 4.0 * n_t * ((weight**2)[:, None] * sin_vs**2).sum(axis=0)
    if n_paths == 1:
        return f

    iu, ju = np.triu_indices(n_paths, k=1)
    for lo in range(0, len(iu), _PAIR_CHUNK):
        p = iu[lo : lo + _PAIR_CHUNK]
        q = ju[lo : lo + _PAIR_CHUNK]
        a = 2.0 * math.pi / wavelength * d_v * (cos_eod[p] - cos_eod[q])
        b = 2.0 * math.pi / wavelength * d_h * (ses_aod[p] - ses_aod[q])
        dir_hv = _dirichlet(n_h, b) * _dirichlet(n_v, a)
        psi = (
            (phase[p] - phase[q])
            + math.pi * (2.0 * t + dt) * (doppler[p] - doppler[q])
            + 0.5 * (n_h - 1) * b
            + 0.5 * (n_v - 1) * a
        )
        amp = 8.0 * weight[p] * weight[q] * dir_hv
        cross = np.cos(psi[:, None] + (slope[p] - slope[q])[:, None] * x[None, :])
        f = f + (amp[:, None] * sin_vs[p] * sin_vs[q] * cross).sum(axis=0)
    return f
