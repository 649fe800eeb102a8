"""Multi-UE downlink simulation with moving-port prediction and baselines.

Per drop and UE: draw a path set, sample the uplink channel over the two
port positions, estimate the path parameters once, build the port schedule
over the CSI-delay horizons, then serve downlink slots with four CSI
strategies and score spectral efficiency and prediction error:

* ``mpmp``          - BS precodes on the reconstructed frozen reference
                      channel; the liquid slides, so the served channel is
                      the true channel at the scheduled port.
* ``no_prediction`` - BS precodes on the last (noisy) observation at port 1;
                      served on the true port-1 channel.
* ``vec_prony``     - linear prediction on the port-1 sample history,
                      extrapolated to the serving slot; served at port 1.
* ``stationary``    - frozen-channel ideal: the channel simply stops
                      evolving at the reference time (performance upper
                      bound).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    PathSet,
    ScenarioSpec,
    add_noise,
    generate_scenario,
    snapshot_from_components,
    synthesize_channel,
)
from .errors import ConfigError, EstimationError
from .geometry import FluidAntennaGeometry, UpaGeometry
from .pencil import PencilConfig, default_pencil_config, estimate_model, reconstruct_channel
from .portselect import build_schedule
from .seeding import substream

METHODS = ("mpmp", "no_prediction", "stationary", "vec_prony")
PRED_ERROR_FLOOR_DB = -200.0


@dataclass(frozen=True)
class SimScenario:
    """Deployment and run parameters for the downlink simulation."""

    carrier_freq: float
    n_ue: int
    bs: UpaGeometry
    fa: FluidAntennaGeometry
    slot_duration: float
    csi_delay: float
    speeds: tuple  # m/s, one per UE (cycled if shorter)
    ricean_k: float
    delay_spread: float
    snr_grid: tuple
    n_drops: int
    master_seed: int
    n_paths: int = 37
    n_samples: int = 160
    n_eval_slots: int = 16
    frequency: float | None = None
    uplink_snr_db: float | None = None  # None: match the downlink SNR point
    prony_order: int | None = None
    port_mode: str = "estimated"  # or "true": ablation of the schedule input
    pencil_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        ratio = self.csi_delay / self.slot_duration
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"csi_delay {self.csi_delay} is not an integer multiple of the "
                f"slot duration {self.slot_duration}"
            )
        if self.port_mode not in ("estimated", "true"):
            raise ConfigError(f"unknown port_mode {self.port_mode!r}")
        if self.n_ue < 1 or self.n_drops < 1 or self.n_eval_slots < 1:
            raise ConfigError("n_ue, n_drops and n_eval_slots must be >= 1")
        if self.csi_delay < self.slot_duration:
            raise ConfigError("csi_delay must be at least one slot")

    @property
    def delay_slots(self) -> int:
        return round(self.csi_delay / self.slot_duration)

    def ue_speed(self, u: int) -> float:
        return float(self.speeds[u % len(self.speeds)])

    def pencil_config(self) -> PencilConfig:
        overrides = dict(self.pencil_overrides)
        if "order_mode" not in overrides:
            overrides["order_mode"] = "mdl"
        if "max_order" not in overrides:
            # The vertical aperture resolves only a handful of departure
            # angles; past that, extra model paths fit noise and corrupt the
            # port schedule more than they help the reconstruction.
            overrides["max_order"] = 2 * self.bs.n_v
        if "delta2" not in overrides:
            # The arrival-elevation phase grows with the port separation, so
            # a wider baseline tolerates more gain-estimate noise; half the
            # per-wavelength port count is the widest unambiguous choice.
            delta1 = overrides.get("delta1", 1)
            sep = max(1, math.floor(self.fa.port_density / 2))
            overrides["delta2"] = min(delta1 + sep, self.fa.m_ports)
        return default_pencil_config(
            self.n_samples,
            self.slot_duration,
            self.bs.n_v,
            expected_paths=self.n_paths,
            **overrides,
        )


@dataclass(frozen=True)
class DropMetrics:
    """Per-drop outcome: sum spectral efficiency per SNR point and the
    slot/UE-averaged prediction error, per method."""

    se_per_snr: dict
    pred_error_db: dict
    diagnostics: dict


def ezf_precode(channels: np.ndarray) -> np.ndarray:
    """Zero-forcing precoder with unit-norm columns.

    ``channels`` holds one UE channel per row; the returned matrix satisfies
    ``channels @ precoder`` diagonal.  A rank-deficient Gram matrix falls
    back to diagonal loading (1e-10 of its trace) and emits a warning.
    """
    h = np.asarray(channels)
    n_ue = h.shape[0]
    gram = h @ h.conj().T
    try:
        cond = np.linalg.cond(gram)
    except np.linalg.LinAlgError:
        cond = math.inf
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn("rank-deficient channel matrix: applying diagonal loading", stacklevel=2)
        gram = gram + (1e-10 * np.trace(gram).real / n_ue + 1e-300) * np.eye(n_ue)
    w = h.conj().T @ np.linalg.inv(gram)
    norms = np.linalg.norm(w, axis=0)
    norms = np.where(norms > 0, norms, 1.0)
    return w / norms


def sinr_se(precoder: np.ndarray, true_channels: np.ndarray, noise_power: float) -> np.ndarray:
    """Per-UE spectral efficiency of one slot: ``log2(1 + SINR)`` with the
    received powers ``|h_u^T w_v|^2`` of the actual served channels."""
    gains = np.abs(true_channels @ precoder) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    sinr = signal / (interference + noise_power)
    return np.log2(1.0 + sinr)


def prediction_error_db(predicted: np.ndarray, truth: np.ndarray) -> float:
    """10*log10 of the squared relative prediction error for one snapshot
    pair; exact predictions return the configured floor instead of -inf."""
    truth_norm = float(np.linalg.norm(truth) ** 2)
    if truth_norm == 0.0:
        raise ValueError("zero-norm truth snapshot")
    ratio = float(np.linalg.norm(predicted - truth) ** 2) / truth_norm
    if ratio <= 10 ** (PRED_ERROR_FLOOR_DB / 10.0):
        return PRED_ERROR_FLOOR_DB
    return 10.0 * math.log10(ratio)


def _prony_fit(hist: np.ndarray, order: int) -> np.ndarray:
    """Shared linear-prediction coefficients (most recent sample first).

    Minimum-norm least squares over the stacked per-antenna system; an
    over-specified order on a low-rank history stays exact.  Only a
    degenerate solve falls back to a small ridge, with a warning.
    """
    n = hist.shape[0]
    if n <= order:
        raise ValueError(f"history of length {n} too short for order {order}")
    rows = []
    rhs = []
    for k in range(order, n):
        rows.append(hist[k - 1 :: -1][:order])
        rhs.append(hist[k])
    a_mat = np.concatenate([r.T for r in rows], axis=0)
    b_vec = np.concatenate(rhs, axis=0)
    coeff, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    if not np.all(np.isfinite(coeff)):
        warnings.warn("ill-conditioned prediction fit: adding ridge", stacklevel=2)
        gram = a_mat.conj().T @ a_mat
        gram = gram + 1e-8 * (np.trace(gram).real / order + 1e-300) * np.eye(order)
        coeff = np.linalg.solve(gram, a_mat.conj().T @ b_vec)
    return coeff


def _prony_roll(coeff: np.ndarray, hist: np.ndarray, horizon: int) -> list:
    """Predicted snapshots 1..horizon steps after the last history row."""
    order = len(coeff)
    window = hist[-order:][::-1].copy()
    out = []
    for _ in range(horizon):
        nxt = coeff @ window
        out.append(nxt)
        window = np.vstack([nxt[None, :], window[:-1]])
    return out


def vec_prony_predict(history: np.ndarray, order: int, horizon: int) -> np.ndarray:
    """Forward-extrapolate per-antenna samples with one shared
    linear-prediction coefficient vector fit by least squares.

    ``history`` has shape (n_samples, n_antennas); returns the predicted
    snapshot ``horizon`` steps after the last history row.  Ill-conditioned
    normal equations fall back to a small ridge with a warning.
    """
    hist = np.asarray(history, dtype=complex)
    coeff = _prony_fit(hist, order)
    return _prony_roll(coeff, hist, horizon)[-1]


def _collect_column(ps: PathSet, bs, fa, times, port, column, sigma2, rng):
    """Noisy samples of one BS antenna column over the given instants."""
    lo, hi = column * bs.n_v, (column + 1) * bs.n_v
    out = np.empty((len(times), bs.n_v), dtype=complex)
    for i, t in enumerate(times):
        snap = add_noise(synthesize_channel(ps, bs, fa, t, port), sigma2, rng)
        out[i] = snap.values[lo:hi]
    return out


def _uplink_sigma2(scenario: SimScenario, snr_db: float) -> float:
    snr = scenario.uplink_snr_db if scenario.uplink_snr_db is not None else snr_db
    if math.isinf(snr):
        return 0.0
    return 10.0 ** (-snr / 10.0)


@dataclass
class _UeState:
    pathset: PathSet
    comp: object
    csi: dict
    schedule_ports: list
    prony: list
    fallback: bool


def _prepare_ue(
    scenario: SimScenario, drop: int, u: int, snr_db: float, horizons, prony_order: int
) -> _UeState:
    bs, fa = scenario.bs, scenario.fa
    cfg = scenario.pencil_config()
    speed = scenario.ue_speed(u)
    vrng = substream(scenario.master_seed, "velocity", drop, u)
    heading = vrng.uniform(-math.pi, math.pi)
    velocity = (speed * math.cos(heading), speed * math.sin(heading), 0.0)
    spec = ScenarioSpec(
        ricean_k=scenario.ricean_k,
        carrier_freq=scenario.carrier_freq,
        frequency=scenario.frequency,
        velocity=velocity,
        n_paths=max(scenario.n_paths - 1, 1),
        tau_min=0.0,
        tau_max=scenario.delay_spread,
    )
    ps = generate_scenario(spec, substream(scenario.master_seed, "paths", drop, u))

    sigma2 = _uplink_sigma2(scenario, snr_db)
    times = cfg.sample_times()
    t_ref = float(times[-1])
    first, last = times[: cfg.n_half], times[cfg.n_half :]
    up_rng = substream(scenario.master_seed, "uplink_noise", drop, u)
    f1 = _collect_column(ps, bs, fa, first, cfg.delta1, 0, sigma2, up_rng)
    f2 = (
        _collect_column(ps, bs, fa, first, cfg.delta1, 1, sigma2, up_rng)
        if bs.n_h >= 2
        else None
    )
    l1 = _collect_column(ps, bs, fa, last, cfg.delta2, 0, sigma2, up_rng)

    base_rng = substream(scenario.master_seed, "baseline_noise", drop, u)
    history = np.empty((scenario.n_samples, bs.n_antennas), dtype=complex)
    for i, t in enumerate(times):
        history[i] = add_noise(synthesize_channel(ps, bs, fa, t, 1), sigma2, base_rng).values

    fallback = False
    est = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = estimate_model(f1, l1, cfg, bs, fa, first_col2=f2)
    except EstimationError:
        fallback = True

    truth_ref = synthesize_channel(ps, bs, fa, t_ref, 1).values
    stale_obs = history[-1]
    csi = {
        "stationary": truth_ref,
        "no_prediction": stale_obs,
        "mpmp": stale_obs if fallback else reconstruct_channel(est, bs, fa, t_ref, 1).values,
        "truth_ref": truth_ref,
        "t_ref": t_ref,
    }

    if fallback:
        ports = [1] * len(horizons)
    else:
        model = ps if scenario.port_mode == "true" else est
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            schedule = build_schedule(model, bs, fa, t_ref, horizons)
        ports = list(schedule.ports)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        coeff = _prony_fit(history, prony_order)
        prony = _prony_roll(coeff, history, scenario.delay_slots + len(horizons) - 1)
    prony = prony[scenario.delay_slots - 1 :]
    return _UeState(
        pathset=ps,
        comp=ps.components(),
        csi=csi,
        schedule_ports=ports,
        prony=prony,
        fallback=fallback,
    )


def run_drop(scenario: SimScenario, drop_seed: int) -> DropMetrics:
    """One simulation drop; deterministic in (scenario, drop_seed)."""
    bs, fa = scenario.bs, scenario.fa
    t_slot = scenario.slot_duration
    horizons = [
        scenario.csi_delay + j * t_slot for j in range(scenario.n_eval_slots)
    ]
    order = scenario.prony_order
    if order is None:
        order = min(4, scenario.n_samples // 2 - 1)

    se_acc = {m: np.zeros(len(scenario.snr_grid)) for m in METHODS}
    err_acc = {m: 0.0 for m in METHODS}
    n_err = 0
    fallbacks = 0
    states = None

    for si, snr_db in enumerate(scenario.snr_grid):
        if states is None or scenario.uplink_snr_db is None:
            states = [
                _prepare_ue(scenario, drop_seed, u, snr_db, horizons, order)
                for u in range(scenario.n_ue)
            ]
        if si == 0:
            fallbacks = sum(s.fallback for s in states)
        noise_power = 10.0 ** (-snr_db / 10.0)
        se_slots = {m: 0.0 for m in METHODS}
        for j in range(scenario.n_eval_slots):
            csi_rows = {m: [] for m in METHODS}
            true_rows = {m: [] for m in METHODS}
            for st in states:
                t_ref = st.csi["t_ref"]
                t_j = t_ref + horizons[j]
                h1_true = snapshot_from_components(st.comp, bs, fa, t_j, 1).values
                port = st.schedule_ports[j]
                h_port_true = (
                    h1_true
                    if port == 1
                    else snapshot_from_components(st.comp, bs, fa, t_j, port).values
                )
                csi_rows["mpmp"].append(st.csi["mpmp"])
                true_rows["mpmp"].append(h_port_true)
                csi_rows["no_prediction"].append(st.csi["no_prediction"])
                true_rows["no_prediction"].append(h1_true)
                csi_rows["vec_prony"].append(st.prony[j])
                true_rows["vec_prony"].append(h1_true)
                csi_rows["stationary"].append(st.csi["stationary"])
                true_rows["stationary"].append(st.csi["truth_ref"])
            for m in METHODS:
                csi_mat = np.array(csi_rows[m])
                true_mat = np.array(true_rows[m])
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    w = ezf_precode(csi_mat)
                se_slots[m] += float(np.sum(sinr_se(w, true_mat, noise_power)))
                if si == 0:
                    for row in range(true_mat.shape[0]):
                        ratio_db = prediction_error_db(csi_mat[row], true_mat[row])
                        err_acc[m] += 10.0 ** (ratio_db / 10.0)
            if si == 0:
                n_err += scenario.n_ue
        for m in METHODS:
            se_acc[m][si] = se_slots[m] / scenario.n_eval_slots

    pred_err = {
        m: 10.0 * math.log10(max(err_acc[m] / n_err, 10 ** (PRED_ERROR_FLOOR_DB / 10.0)))
        for m in METHODS
    }
    return DropMetrics(
        se_per_snr={m: se_acc[m].copy() for m in METHODS},
        pred_error_db=pred_err,
        diagnostics={"estimation_fallbacks": fallbacks},
    )


def simulate(scenario: SimScenario, threads: int = 1) -> list[DropMetrics]:
    """All drops, optionally across a thread pool; per-drop seeding keeps the
    result independent of the worker count."""
    drops = list(range(scenario.n_drops))
    if threads <= 1:
        return [run_drop(scenario, d) for d in drops]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda d: run_drop(scenario, d), drops))


def aggregate_se(drops: list[DropMetrics], snr_grid) -> list[dict]:
    """Mean sum-SE and a normal-approximation confidence half-width per
    (SNR, method) over drops."""
    rows = []
    n = len(drops)
    for si, snr in enumerate(snr_grid):
        for m in METHODS:
            vals = np.array([d.se_per_snr[m][si] for d in drops])
            ci = 1.96 * float(vals.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
            rows.append(
                {"snr_db": float(snr), "method": m, "se": float(vals.mean()), "se_ci": ci}
            )
    return rows


def aggregate_pred_error(drops: list[DropMetrics]) -> dict:
    """Drop-averaged prediction error per method (power-domain mean)."""
    out = {}
    for m in METHODS:
        ratios = np.array([10 ** (d.pred_error_db[m] / 10.0) for d in drops])
        out[m] = 10.0 * math.log10(float(ratios.mean()))
    return out
