"""Joint Doppler/angle/gain estimation from uplink channel samples.

The sampled channel at one port and one column of BS antennas is a sum of
2-D complex exponentials: a time factor ``z_p = exp(j*2*pi*doppler_p*T)`` and
a vertical-antenna factor ``y_p = exp(j*(2*pi/lambda)*chi_p)`` with
``chi_p = cos(eod_p)*d_v``.  Stacking per-antenna Hankel matrices into a
block-Hankel matrix makes both factors recoverable from the shift invariance
of its column space: deleting the last/first time row (resp. antenna block)
of the truncated left singular basis yields two pencils whose joint
eigenvalues are ``z_p`` and ``y_p``.  Complex amplitudes follow from a
linear least-squares fit on the 2-D Vandermonde basis.

Two sample halves taken at different ports and the second antenna column
provide the extra phase references for the arrival elevation and the
departure azimuth.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import PathComponents, snapshot_from_components
from .errors import ConfigError, EstimationError
from .geometry import FluidAntennaGeometry, UpaGeometry

# Fixed mixing weight for the joint shift-invariance eigenproblem; separates
# paths that coincide in one of the two factors.
_JOINT_MIX = 0.5616


@dataclass(frozen=True)
class PencilConfig:
    """Sampling layout and pencil sizes.

    ``n_s`` samples (even) at interval ``sample_interval``; the first half is
    taken at port ``delta1``, the last half at ``delta2``.  ``pencil_l`` and
    ``pencil_r`` are the time and antenna stacking depths.
    """

    n_s: int
    sample_interval: float
    pencil_l: int
    pencil_r: int
    delta1: int = 1
    delta2: int = 2
    rank_threshold: float = 1e-3
    order_mode: str = "threshold"  # or "mdl"
    max_order: int | None = None
    unit_circle_tol: float = 0.05
    # The inter-port gain ratio of a correctly estimated path has unit
    # modulus; paths whose ratio modulus drifts below this floor carry
    # unreliable angles and are pruned before the final gain fit (0 disables).
    consistency_floor: float = 0.4

    def __post_init__(self):
        if self.n_s % 2 or self.n_s < 4:
            raise ConfigError(f"n_s must be even and >= 4, got {self.n_s}")
        if self.sample_interval <= 0:
            raise ConfigError("sample_interval must be > 0")
        if not 2 <= self.pencil_l <= self.n_s // 2 - 1:
            raise ConfigError(f"pencil_l={self.pencil_l} outside [2, n_s/2 - 1]")
        if self.pencil_r < 1:
            raise ConfigError(f"pencil_r={self.pencil_r} must be >= 1")
        if self.delta1 == self.delta2:
            raise ConfigError("delta1 and delta2 must differ")
        if self.order_mode not in ("threshold", "mdl"):
            raise ConfigError(f"unknown order_mode {self.order_mode!r}")

    @property
    def n_half(self) -> int:
        return self.n_s // 2

    @property
    def mu1(self) -> int:
        return self.n_half - self.pencil_l + 1

    def mu2(self, n_v: int) -> int:
        return n_v - self.pencil_r + 1

    def sample_times(self) -> np.ndarray:
        """All sampling instants, first sample at one interval."""
        return self.sample_interval * np.arange(1, self.n_s + 1)

    def validate_order(self, p_hat: int) -> None:
        """Post-hoc check of the 1-D pencil window against the found order."""
        if not (p_hat + 1 < self.pencil_l < self.n_half - p_hat + 2):
            warnings.warn(
                f"pencil_l={self.pencil_l} outside the 1-D validity window for "
                f"{p_hat} paths; the block pencil may still resolve them",
                stacklevel=2,
            )


def default_pencil_config(
    n_s: int,
    sample_interval: float,
    n_v: int,
    expected_paths: int | None = None,
    **kwargs,
) -> PencilConfig:
    """L defaults to n_s/3 (clamped into the validity window when the path
    count is known a priori), R to half the vertical antennas."""
    l = round(n_s / 3)
    if expected_paths is not None:
        lo, hi = expected_paths + 2, n_s // 2 - expected_paths + 1
        if lo <= hi:
            l = min(max(l, lo), hi)
    l = min(max(l, 2), n_s // 2 - 1)
    r = min(max(math.ceil(n_v / 2), 1), n_v)
    return PencilConfig(n_s=n_s, sample_interval=sample_interval, pencil_l=l, pencil_r=r, **kwargs)


@dataclass(frozen=True)
class RawEstimates:
    """Unpaired per-path estimates from one half / one antenna column.

    Doppler in Hz, antenna-shift parameter ``chi_theta_hat`` in meters
    (``cos(eod) * d_v``); exactly one amplitude field is set per pencil run.
    """

    omega_hat: np.ndarray
    chi_theta_hat: np.ndarray
    p_hat: int
    c_delta1_hat: np.ndarray | None = None
    kappa_hat: np.ndarray | None = None
    varpi_delta2_hat: np.ndarray | None = None


@dataclass(frozen=True)
class EstimatedModel:
    """Paired per-path parameter estimates."""

    doppler: np.ndarray
    eod: np.ndarray
    aod: np.ndarray
    eoa: np.ndarray
    gain: np.ndarray
    path_count: int

    def components(self) -> PathComponents:
        return PathComponents(
            weight=np.abs(self.gain),
            phase=np.angle(self.gain),
            doppler=self.doppler,
            cos_eod=np.cos(self.eod),
            sin_eod_sin_aod=np.sin(self.eod) * np.sin(self.aod),
            cos_eoa=np.cos(self.eoa),
        )


def build_hankel_1d(samples: np.ndarray, l: int) -> np.ndarray:
    """L x (n - L + 1) Hankel matrix: entry (i, k) = samples[i + k]."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    mu = n - l + 1
    if mu < 1:
        raise ValueError(f"sequence of length {n} too short for pencil size {l}")
    idx = np.arange(l)[:, None] + np.arange(mu)[None, :]
    return samples[idx]


def build_block_2d(per_antenna: list, r: int) -> np.ndarray:
    """Block-Hankel stack over the vertical antennas: block (i, k) holds the
    1-D matrix of antenna i + k."""
    n_v = len(per_antenna)
    shapes = {m.shape for m in per_antenna}
    if len(shapes) != 1:
        raise ValueError(f"inconsistent block shapes: {sorted(shapes)}")
    l, mu1 = per_antenna[0].shape
    mu2 = n_v - r + 1
    if mu2 < 1:
        raise ValueError(f"{n_v} blocks too few for antenna pencil size {r}")
    out = np.empty((r * l, mu2 * mu1), dtype=complex)
    for i in range(r):
        for k in range(mu2):
            out[i * l : (i + 1) * l, k * mu1 : (k + 1) * mu1] = per_antenna[i + k]
    return out


def estimate_model_order(singular_values: np.ndarray, threshold: float) -> int:
    """Number of singular values above ``threshold`` relative to the largest;
    never below 1."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0:
        raise EstimationError("all-zero singular spectrum")
    return max(int(np.sum(s / s[0] > threshold)), 1)


def mdl_order(singular_values: np.ndarray, n_snapshots: int) -> int:
    """Wax-Kailath MDL order selection over a singular spectrum."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0:
        raise EstimationError("all-zero singular spectrum")
    lam = np.maximum(s**2 / n_snapshots, s[0] ** 2 * 1e-30)
    d = len(lam)
    n = n_snapshots
    best_k, best_val = 1, math.inf
    log_lam = np.log(lam)
    suffix_log = np.concatenate([np.cumsum(log_lam[::-1])[::-1], [0.0]])
    suffix_sum = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])
    for k in range(1, d):
        m = d - k
        gm_log = suffix_log[k] / m
        am = suffix_sum[k] / m
        val = -n * m * (gm_log - math.log(am)) + 0.5 * k * (2 * d - k) * math.log(n)
        if val < best_val:
            best_k, best_val = k, val
    return best_k


def _order_cap(cfg: PencilConfig, n_v: int) -> int:
    l, r = cfg.pencil_l, cfg.pencil_r
    cap = min(r * (l - 1), cfg.mu1 * cfg.mu2(n_v) - 1, cfg.n_half * n_v - 1)
    if r >= 2:
        cap = min(cap, (r - 1) * l)
    return max(cap, 1)


def _shift_rows(l: int, r: int):
    rows = np.arange(r * l).reshape(r, l)
    t1 = rows[:, :-1].ravel()
    t2 = rows[:, 1:].ravel()
    v1 = rows[:-1, :].ravel()
    v2 = rows[1:, :].ravel()
    return t1, t2, v1, v2


def estimate_half(
    samples: np.ndarray,
    cfg: PencilConfig,
    which_half: str,
    which_column: int = 1,
    *,
    wavelength: float,
    force_order: int | None = None,
) -> RawEstimates:
    """Run the 2-D pencil on one (half, antenna column) sample block.

    ``samples`` has shape (n_s/2, n_v): rows are consecutive sampling
    instants, columns the vertical antennas of the chosen BS column.  The
    returned amplitudes are the time-origin gains of the block: the plain
    port gains for the first half, the half-window-advanced gains for the
    last half, and the azimuth-bearing gains for the second antenna column.
    """
    if which_half not in ("first", "last"):
        raise ValueError(f"which_half must be 'first' or 'last', not {which_half!r}")
    if which_column not in (1, 2):
        raise ValueError(f"which_column must be 1 or 2, not {which_column}")
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 2 or samples.shape[0] != cfg.n_half:
        raise ValueError(f"expected ({cfg.n_half}, n_v) samples, got {samples.shape}")
    n_v = samples.shape[1]
    l, r = cfg.pencil_l, cfg.pencil_r
    if not 1 <= r <= n_v:
        raise ConfigError(f"pencil_r={r} outside [1, {n_v}]")

    blocks = [build_hankel_1d(samples[:, j], l) for j in range(n_v)]
    big = build_block_2d(blocks, r)

    u, s, _ = np.linalg.svd(big, full_matrices=False)
    if force_order is not None:
        p_hat = force_order
    elif cfg.order_mode == "mdl":
        p_hat = mdl_order(s, big.shape[1])
    else:
        p_hat = estimate_model_order(s, cfg.rank_threshold)
    if cfg.max_order is not None:
        p_hat = min(p_hat, cfg.max_order)
    p_hat = min(p_hat, _order_cap(cfg, n_v))
    cfg.validate_order(p_hat)
    us = u[:, :p_hat]

    t1, t2, v1, v2 = _shift_rows(l, r)
    f_time = np.linalg.pinv(us[t1]) @ us[t2]
    if r >= 2:
        f_vert = np.linalg.pinv(us[v1]) @ us[v2]
        _, vecs = np.linalg.eig(f_time + _JOINT_MIX * f_vert)
        vinv = np.linalg.inv(vecs)
        z = np.diag(vinv @ f_time @ vecs)
        y = np.diag(vinv @ f_vert @ vecs)
    else:
        z, vecs = np.linalg.eig(f_time)
        y = np.ones_like(z)
        if n_v > 1:
            warnings.warn("antenna pencil size 1: departure elevation not estimated", stacklevel=2)

    for name, vals in (("time", z), ("antenna", y)):
        drift = float(np.max(np.abs(np.abs(vals) - 1.0))) if vals.size else 0.0
        if drift > cfg.unit_circle_tol:
            warnings.warn(
                f"{name}-shift eigenvalues off the unit circle by {drift:.2e}; projecting",
                stacklevel=2,
            )
    z = np.exp(1j * np.angle(z))
    y = np.exp(1j * np.angle(y))

    omega = np.angle(z) / (2.0 * math.pi * cfg.sample_interval)
    chi = np.angle(y) * wavelength / (2.0 * math.pi)

    order = np.argsort(omega, kind="stable")
    z, y, omega, chi = z[order], y[order], omega[order], chi[order]

    powers_t = np.arange(1, cfg.n_half + 1)
    powers_v = np.arange(n_v)
    vand = (z[None, :] ** powers_t[:, None])[:, None, :] * (
        y[None, :] ** powers_v[:, None]
    )[None, :, :]
    vand = vand.reshape(cfg.n_half * n_v, p_hat)
    amps, *_ = np.linalg.lstsq(vand, samples.reshape(-1), rcond=None)
    if not np.all(np.isfinite(amps)):
        raise EstimationError("rank-deficient amplitude system")

    fields = {"c_delta1_hat": None, "kappa_hat": None, "varpi_delta2_hat": None}
    if which_column == 2:
        fields["kappa_hat"] = amps
    elif which_half == "first":
        fields["c_delta1_hat"] = amps
    else:
        fields["varpi_delta2_hat"] = amps
    return RawEstimates(omega_hat=omega, chi_theta_hat=chi, p_hat=p_hat, **fields)


def pair_dopplers(
    first_half: RawEstimates,
    last_half: RawEstimates,
    *,
    sample_interval: float | None = None,
    wavelength: float | None = None,
) -> np.ndarray:
    """Assignment of last-half path indices to first-half indices minimizing
    the total Doppler mismatch; exhaustive up to 8 paths, greedy beyond.

    When ``sample_interval`` and ``wavelength`` are given, the Doppler
    distance is taken on the phase circle (so frequencies straddling the
    alias boundary still match) and the antenna-shift parameter breaks
    near-ties between Doppler-colliding paths; the greedy pass then visits
    the strongest paths first.
    """
    if first_half.p_hat != last_half.p_hat:
        raise EstimationError(
            f"path count mismatch ({first_half.p_hat} vs {last_half.p_hat}); "
            "re-estimate with a shared threshold"
        )
    a = first_half.omega_hat
    b = last_half.omega_hat
    p = first_half.p_hat
    if sample_interval is not None and wavelength is not None:
        dz = np.abs(
            np.angle(np.exp(1j * 2 * math.pi * sample_interval * (a[:, None] - b[None, :])))
        )
        dy = np.abs(
            np.angle(
                np.exp(
                    1j
                    * 2
                    * math.pi
                    / wavelength
                    * (first_half.chi_theta_hat[:, None] - last_half.chi_theta_hat[None, :])
                )
            )
        )
        dist = dz + dy
    else:
        dist = np.abs(a[:, None] - b[None, :])
    if p <= 8:
        best, best_cost = None, math.inf
        for perm in itertools.permutations(range(p)):
            cost = float(np.sum(dist[np.arange(p), list(perm)]))
            if cost < best_cost - 1e-15:
                best, best_cost = perm, cost
        return np.array(best, dtype=int)
    amp = None
    for field in (first_half.c_delta1_hat, first_half.kappa_hat, first_half.varpi_delta2_hat):
        if field is not None:
            amp = np.abs(field)
            break
    visit = np.argsort(-amp, kind="stable") if amp is not None else np.arange(p)
    taken = np.zeros(p, dtype=bool)
    out = np.empty(p, dtype=int)
    for i in visit:
        row = dist[i].copy()
        row[taken] = math.inf
        j = int(np.argmin(row))
        out[i] = j
        taken[j] = True
    return out


def merge_halves(
    first_col1: RawEstimates,
    last_col1: RawEstimates,
    first_col2: RawEstimates | None,
    cfg: PencilConfig,
    wavelength: float,
) -> RawEstimates:
    """Align the sample halves (and the second antenna column when present)
    by Doppler and merge into one estimate set.  Doppler and antenna-shift
    parameters are averaged on their phase circles."""
    t = cfg.sample_interval
    perm_last = pair_dopplers(first_col1, last_col1, sample_interval=t, wavelength=wavelength)
    omegas = [first_col1.omega_hat, last_col1.omega_hat[perm_last]]
    chis = [first_col1.chi_theta_hat, last_col1.chi_theta_hat[perm_last]]
    kappa = None
    if first_col2 is not None:
        perm_k = pair_dopplers(first_col1, first_col2, sample_interval=t, wavelength=wavelength)
        kappa = first_col2.kappa_hat[perm_k]
        omegas.append(first_col2.omega_hat[perm_k])
        chis.append(first_col2.chi_theta_hat[perm_k])

    omega_phase = sum(np.exp(1j * 2 * math.pi * w * t) for w in omegas)
    omega = np.angle(omega_phase) / (2 * math.pi * t)
    chi_phase = sum(np.exp(1j * 2 * math.pi * c / wavelength) for c in chis)
    chi = np.angle(chi_phase) * wavelength / (2 * math.pi)
    return RawEstimates(
        omega_hat=omega,
        chi_theta_hat=chi,
        p_hat=first_col1.p_hat,
        c_delta1_hat=first_col1.c_delta1_hat,
        kappa_hat=kappa,
        varpi_delta2_hat=last_col1.varpi_delta2_hat[perm_last],
    )


def recover_angles(
    paired: RawEstimates,
    geom: UpaGeometry,
    fa: FluidAntennaGeometry,
    cfg: PencilConfig,
) -> EstimatedModel:
    """Invert phases into physical parameters.

    Departure elevation from the antenna-shift parameter; departure azimuth
    from the second-column/first-column gain ratio (the common port gain
    cancels); arrival elevation from the inter-port gain ratio after removing
    the half-window Doppler advance.  Inverse-trig arguments are clamped to
    [-1, 1]; an antenna-shift parameter more than 0.1% beyond the physical
    range signals estimation failure instead.
    """
    lam = fa.wavelength
    if paired.c_delta1_hat is None or paired.varpi_delta2_hat is None:
        raise EstimationError("merged estimates missing amplitude fields")
    omega = paired.omega_hat

    cos_eod = paired.chi_theta_hat / geom.d_v
    if np.any(np.abs(cos_eod) > 1.0 + 1e-3):
        raise EstimationError(
            f"antenna-shift phase implies |cos(eod)| = {np.max(np.abs(cos_eod)):.4f} > 1"
        )
    eod = np.arccos(np.clip(cos_eod, -1.0, 1.0))

    if paired.kappa_hat is not None and geom.n_h >= 2:
        ratio = paired.kappa_hat / paired.c_delta1_hat
        sin_eod = np.sin(eod)
        arg = np.angle(ratio) * lam / (2.0 * math.pi * geom.d_h)
        arg = np.where(sin_eod > 1e-9, arg / np.where(sin_eod > 1e-9, sin_eod, 1.0), 0.0)
        aod = np.arcsin(np.clip(arg, -1.0, 1.0))
    else:
        aod = np.zeros_like(omega)

    advance = np.exp(-1j * math.pi * cfg.n_s * omega * cfg.sample_interval)
    port_ratio = paired.varpi_delta2_hat / paired.c_delta1_hat * advance
    spacing = fa.port_spacing * (cfg.delta2 - cfg.delta1)
    cos_eoa = np.angle(port_ratio) * lam / (2.0 * math.pi * spacing)
    eoa = np.arccos(np.clip(cos_eoa, -1.0, 1.0))

    gain = paired.c_delta1_hat * np.exp(
        -1j * 2.0 * math.pi / lam * np.cos(eoa) * fa.port_spacing * (cfg.delta1 - 1)
    )
    model = EstimatedModel(
        doppler=omega,
        eod=eod,
        aod=aod,
        eoa=eoa,
        gain=gain,
        path_count=paired.p_hat,
    )
    if cfg.consistency_floor > 0 and paired.p_hat > 1:
        mags = np.abs(port_ratio)
        quality = np.minimum(mags, 1.0 / np.maximum(mags, 1e-30))
        keep = quality >= cfg.consistency_floor
        if not np.all(keep) and np.any(keep):
            model = EstimatedModel(
                doppler=omega[keep],
                eod=eod[keep],
                aod=aod[keep],
                eoa=eoa[keep],
                gain=gain[keep],
                path_count=int(np.sum(keep)),
            )
    return model


def _refit_gains(
    model: EstimatedModel,
    blocks: list,
    cfg: PencilConfig,
    geom: UpaGeometry,
    fa: FluidAntennaGeometry,
) -> EstimatedModel:
    """Re-fit the complex gains jointly over every sample block.

    The fit anchors the gain phase at the end of the sampling window, where
    the model is subsequently evaluated; referencing the time origin instead
    would multiply any residual Doppler error by the whole window length.
    ``blocks`` holds (samples, first_global_index, column, port) tuples.
    """
    lam = fa.wavelength
    t_int = cfg.sample_interval
    z = np.exp(1j * 2 * math.pi * model.doppler * t_int)
    y = np.exp(1j * 2 * math.pi / lam * geom.d_v * np.cos(model.eod))
    col2 = np.exp(
        1j * 2 * math.pi / lam * geom.d_h * np.sin(model.eod) * np.sin(model.aod)
    )
    rows = []
    rhs = []
    for samples, k0, column, port in blocks:
        n_half, n_v = samples.shape
        k_rel = k0 + np.arange(n_half) - cfg.n_s  # 0 at the window end
        basis = (z[None, :] ** k_rel[:, None])[:, None, :] * (
            y[None, :] ** np.arange(n_v)[:, None]
        )[None, :, :]
        factor = np.exp(
            1j * 2 * math.pi / lam * np.cos(model.eoa) * fa.port_spacing * (port - 1)
        )
        if column == 2:
            factor = factor * col2
        rows.append((basis * factor[None, None, :]).reshape(n_half * n_v, -1))
        rhs.append(samples.reshape(-1))
    mat = np.concatenate(rows, axis=0)
    vec = np.concatenate(rhs, axis=0)
    amps, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    if not np.all(np.isfinite(amps)):
        raise EstimationError("rank-deficient joint gain system")
    gain = amps * np.exp(-1j * 2 * math.pi * model.doppler * cfg.n_s * t_int)
    return EstimatedModel(
        doppler=model.doppler,
        eod=model.eod,
        aod=model.aod,
        eoa=model.eoa,
        gain=gain,
        path_count=model.path_count,
    )


def estimate_model(
    first_col1: np.ndarray,
    last_col1: np.ndarray,
    cfg: PencilConfig,
    geom: UpaGeometry,
    fa: FluidAntennaGeometry,
    first_col2: np.ndarray | None = None,
) -> EstimatedModel:
    """Full estimation pipeline: pencil each sample block, reconcile their
    model orders, pair by Doppler, invert to physical parameters, then re-fit
    the gains jointly over all blocks."""
    lam = fa.wavelength
    e1 = estimate_half(first_col1, cfg, "first", 1, wavelength=lam)
    e3 = estimate_half(last_col1, cfg, "last", 1, wavelength=lam)
    e2 = (
        estimate_half(first_col2, cfg, "first", 2, wavelength=lam)
        if first_col2 is not None
        else None
    )
    orders = [e.p_hat for e in (e1, e2, e3) if e is not None]
    if len(set(orders)) > 1:
        shared = min(orders)
        e1 = estimate_half(first_col1, cfg, "first", 1, wavelength=lam, force_order=shared)
        e3 = estimate_half(last_col1, cfg, "last", 1, wavelength=lam, force_order=shared)
        if first_col2 is not None:
            e2 = estimate_half(first_col2, cfg, "first", 2, wavelength=lam, force_order=shared)
    merged = merge_halves(e1, e3, e2, cfg, lam)
    model = recover_angles(merged, geom, fa, cfg)
    blocks = [
        (np.asarray(first_col1, dtype=complex), 1, 1, cfg.delta1),
        (np.asarray(last_col1, dtype=complex), cfg.n_half + 1, 1, cfg.delta2),
    ]
    if first_col2 is not None:
        blocks.append((np.asarray(first_col2, dtype=complex), 1, 2, cfg.delta1))
    return _refit_gains(model, blocks, cfg, geom, fa)


def reconstruct_channel(
    model: EstimatedModel,
    bs: UpaGeometry,
    fa: FluidAntennaGeometry,
    t: float,
    m: int,
):
    """Channel snapshot from estimated parameters; same evaluation path as
    the true-channel synthesis."""
    if model.path_count < 1:
        raise EstimationError("empty model")
    return snapshot_from_components(model.components(), bs, fa, t, m)
