"""Time-varying fluid-antenna channel: path parameterization and synthesis.

A channel between the planar BS array and port ``m`` of the fluid antenna is a
sum over propagation paths.  Each path contributes

    c_p * exp(j*2*pi*doppler_p*t)
        * exp(j*(2*pi/lambda) * cos(eoa_p) * port_spacing * (m-1))
        * exp(j*(2*pi/lambda) * (sin(eod_p)*sin(aod_p)*d_h*i + cos(eod_p)*d_v*j))

per antenna (i, j), with ``c_p = amplitude_weight * gain * exp(j*2*pi*f*delay)``.
The Ricean weights split total power between the line-of-sight path and the
aggregate of the others.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import FluidAntennaGeometry, UpaGeometry, wavelength_of

TWO_PI = 2.0 * math.pi


def steering_vector(geom: UpaGeometry, wavelength: float, eod: float, aod: float) -> np.ndarray:
    """3-D steering vector of the planar array for one departure direction.

    Kronecker product of the horizontal response (phase slope
    ``sin(eod)*sin(aod)*d_h``) and the vertical response (slope
    ``cos(eod)*d_v``); every entry has unit modulus and the first entry is
    exactly 1.
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    kh = TWO_PI / wavelength * math.sin(eod) * math.sin(aod) * geom.d_h
    kv = TWO_PI / wavelength * math.cos(eod) * geom.d_v
    a_h = np.exp(1j * kh * np.arange(geom.n_h))
    a_v = np.exp(1j * kv * np.arange(geom.n_v))
    return np.kron(a_h, a_v)


def arrival_unit_vector(eoa: float, aoa: float) -> np.ndarray:
    return np.array(
        [math.sin(eoa) * math.cos(aoa), math.sin(eoa) * math.sin(aoa), math.cos(eoa)]
    )


def doppler_from_velocity(eoa: float, aoa: float, velocity, wavelength: float) -> float:
    """Per-path Doppler shift in Hz: projection of the UE velocity onto the
    arrival direction, divided by the wavelength."""
    if wavelength <= 0:
        raise ValueError("wavelength must be > 0")
    v = np.asarray(velocity, dtype=float)
    return float(arrival_unit_vector(eoa, aoa) @ v) / wavelength


@dataclass(frozen=True)
class Path:
    """One propagation path.

    ``amplitude_weight`` is the Ricean LoS/NLoS weight, ``gain`` the in-cluster
    amplitude; ``doppler`` is in Hz, ``delay`` in seconds and all angles in
    radians (azimuths in (-pi, pi], elevations in [0, pi]).
    """

    amplitude_weight: float
    gain: float
    delay: float
    doppler: float
    eod: float
    aod: float
    eoa: float
    aoa: float

    def __post_init__(self):
        if self.gain < 0:
            raise ConfigError(f"path gain must be >= 0, got {self.gain}")
        for name, val in (("eod", self.eod), ("eoa", self.eoa)):
            if not 0.0 <= val <= math.pi + 1e-12:
                raise ConfigError(f"{name}={val} outside [0, pi]")
        for name, val in (("aod", self.aod), ("aoa", self.aoa)):
            if not -math.pi - 1e-12 < val <= math.pi + 1e-12:
                raise ConfigError(f"{name}={val} outside (-pi, pi]")


@dataclass(frozen=True)
class PathComponents:
    """Vectorized per-path quantities sufficient to evaluate the channel.

    ``weight`` is the nonnegative magnitude |c_p| and ``phase`` the residual
    gain phase, so the complex gain is ``weight * exp(1j*phase)``.  Shared by
    true path sets and estimated models, which keeps synthesis and
    reconstruction on one code path.
    """

    weight: np.ndarray
    phase: np.ndarray
    doppler: np.ndarray
    cos_eod: np.ndarray
    sin_eod_sin_aod: np.ndarray
    cos_eoa: np.ndarray

    @property
    def n_paths(self) -> int:
        return len(self.weight)

    def gains(self) -> np.ndarray:
        return self.weight * np.exp(1j * self.phase)


@dataclass(frozen=True)
class PathSet:
    """Full multipath parameterization of one UE's channel.

    ``paths`` is ordered with the LoS path first when ``has_los``; the phase
    term of path ``p`` uses ``frequency`` (defaults to the carrier).
    """

    ricean_k: float
    carrier_freq: float
    frequency: float
    paths: tuple
    has_los: bool = True

    def __post_init__(self):
        if self.ricean_k < 0:
            raise ConfigError(f"ricean_k must be >= 0, got {self.ricean_k}")
        if not self.paths:
            raise ConfigError("path set is empty")

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    @property
    def wavelength(self) -> float:
        return wavelength_of(self.carrier_freq)

    def components(self) -> PathComponents:
        p = self.paths
        weight = np.array([q.amplitude_weight * q.gain for q in p])
        phase = np.array([TWO_PI * self.frequency * q.delay for q in p])
        return PathComponents(
            weight=weight,
            phase=phase,
            doppler=np.array([q.doppler for q in p]),
            cos_eod=np.cos([q.eod for q in p]),
            sin_eod_sin_aod=np.array([math.sin(q.eod) * math.sin(q.aod) for q in p]),
            cos_eoa=np.cos([q.eoa for q in p]),
        )


@dataclass(frozen=True)
class ChannelSnapshot:
    """Complex channel vector across all BS antennas for one (time, port)."""

    time: float
    port: int
    values: np.ndarray


def steering_matrix(comp: PathComponents, bs: UpaGeometry, wavelength: float) -> np.ndarray:
    """(n_antennas, n_paths) matrix of per-path steering vectors."""
    kh = TWO_PI / wavelength * bs.d_h * comp.sin_eod_sin_aod
    kv = TWO_PI / wavelength * bs.d_v * comp.cos_eod
    e_h = np.exp(1j * np.outer(np.arange(bs.n_h), kh))
    e_v = np.exp(1j * np.outer(np.arange(bs.n_v), kv))
    return (e_h[:, None, :] * e_v[None, :, :]).reshape(bs.n_antennas, comp.n_paths)


def snapshot_from_components(
    comp: PathComponents,
    bs: UpaGeometry,
    fa: FluidAntennaGeometry,
    t: float,
    m: int,
) -> ChannelSnapshot:
    """Evaluate the channel sum for arbitrary per-path components."""
    fa.check_port(m)
    a = steering_matrix(comp, bs, fa.wavelength)
    port_phase = TWO_PI / fa.wavelength * fa.port_spacing * (m - 1) * comp.cos_eoa
    c = comp.gains() * np.exp(1j * (TWO_PI * comp.doppler * t + port_phase))
    return ChannelSnapshot(time=t, port=m, values=a @ c)


def synthesize_channel(
    ps: PathSet, bs: UpaGeometry, fa: FluidAntennaGeometry, t: float, m: int
) -> ChannelSnapshot:
    """Exact time-varying channel of the path set at time ``t``, port ``m``."""
    return snapshot_from_components(ps.components(), bs, fa, t, m)


def add_noise(snap: ChannelSnapshot, sigma2: float, rng: np.random.Generator) -> ChannelSnapshot:
    """Add i.i.d. circularly-symmetric complex Gaussian noise of per-element
    variance ``sigma2``.  ``sigma2 = 0`` returns the snapshot unchanged."""
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    if sigma2 == 0:
        return snap
    n = snap.values.shape[0]
    scale = math.sqrt(sigma2 / 2.0)
    noise = rng.normal(scale=scale, size=n) + 1j * rng.normal(scale=scale, size=n)
    return ChannelSnapshot(time=snap.time, port=snap.port, values=snap.values + noise)


def ricean_weights(ricean_k: float) -> tuple[float, float]:
    """(LoS, NLoS) amplitude weights for Ricean factor ``ricean_k``."""
    return (
        math.sqrt(ricean_k / (1.0 + ricean_k)),
        math.sqrt(1.0 / (1.0 + ricean_k)),
    )


def cluster_gains(cluster_powers, paths_per_cluster) -> np.ndarray:
    """Per-path amplitudes: path p in cluster s gets
    ``sqrt(K_s / (P_s * sum(K)))`` so the aggregate power is 1."""
    powers = np.asarray(cluster_powers, dtype=float)
    counts = np.asarray(paths_per_cluster, dtype=int)
    if np.any(powers < 0):
        raise ConfigError("cluster powers must be >= 0")
    if len(powers) != len(counts) or np.any(counts < 1):
        raise ConfigError("cluster powers and path counts must align, counts >= 1")
    total = powers.sum()
    if total <= 0:
        raise ConfigError("cluster powers sum to zero")
    per_cluster = np.sqrt(powers / (counts * total))
    return np.repeat(per_cluster, counts)


@dataclass(frozen=True)
class ScenarioSpec:
    """Input to :func:`generate_scenario`.

    Either an explicit NLoS ``table`` (list of dicts with keys ``power``,
    ``delay``, ``eod``, ``aod``, ``eoa``, ``aoa``; SI units, radians) or a
    synthetic draw controlled by ``cluster_powers`` / ``paths_per_cluster``
    over the delay window ``[tau_min, tau_max]``.  ``velocity`` is the UE
    velocity 3-vector in m/s; Doppler is derived per path from its arrival
    direction.  The LoS path (when ``has_los``) uses ``los_delay`` and either
    explicit LoS angles or a synthetic draw.
    """

    ricean_k: float
    carrier_freq: float
    velocity: tuple = (0.0, 0.0, 0.0)
    frequency: float | None = None
    has_los: bool = True
    los_delay: float = 0.0
    los_angles: tuple | None = None  # (eod, aod, eoa, aoa)
    table: list | None = None
    cluster_powers: tuple = (1.0,)
    paths_per_cluster: tuple | None = None
    n_paths: int = 36
    tau_min: float = 0.0
    tau_max: float = 616e-9


def _draw_angles(rng: np.random.Generator, n: int):
    eod = rng.uniform(0.0, math.pi, n)
    aod = rng.uniform(-math.pi, math.pi, n)
    eoa = rng.uniform(0.0, math.pi, n)
    aoa = rng.uniform(-math.pi, math.pi, n)
    return eod, aod, eoa, aoa


def generate_scenario(spec: ScenarioSpec, rng: np.random.Generator) -> PathSet:
    """Build a :class:`PathSet` from an explicit table or a synthetic draw.

    Synthetic draws follow uniform distributions: delays over
    ``[tau_min, tau_max]``, elevations over [0, pi], azimuths over (-pi, pi].
    """
    freq = spec.frequency if spec.frequency is not None else spec.carrier_freq
    lam = wavelength_of(spec.carrier_freq)
    a_los, a_nlos = ricean_weights(spec.ricean_k)
    paths = []

    if spec.has_los:
        if spec.los_angles is not None:
            eod, aod, eoa, aoa = spec.los_angles
        else:
            eod, aod, eoa, aoa = (float(x[0]) for x in _draw_angles(rng, 1))
        paths.append(
            Path(
                amplitude_weight=a_los,
                gain=1.0,
                delay=spec.los_delay,
                doppler=doppler_from_velocity(eoa, aoa, spec.velocity, lam),
                eod=eod,
                aod=aod,
                eoa=eoa,
                aoa=aoa,
            )
        )

    if spec.table is not None:
        if not spec.table:
            raise ConfigError("explicit path table is empty")
        powers = [row.get("power", 1.0) for row in spec.table]
        gains = cluster_gains(powers, [1] * len(spec.table))
        for row, g in zip(spec.table, gains):
            eoa, aoa = row["eoa"], row["aoa"]
            doppler = row.get("doppler")
            if doppler is None:
                doppler = doppler_from_velocity(eoa, aoa, spec.velocity, lam)
            paths.append(
                Path(
                    amplitude_weight=a_nlos,
                    gain=float(g),
                    delay=row["delay"],
                    doppler=doppler,
                    eod=row["eod"],
                    aod=row["aod"],
                    eoa=eoa,
                    aoa=aoa,
                )
            )
    else:
        if spec.tau_min > spec.tau_max:
            raise ConfigError(f"tau_min {spec.tau_min} > tau_max {spec.tau_max}")
        counts = spec.paths_per_cluster
        if counts is None:
            counts = (spec.n_paths,) if spec.n_paths > 0 else ()
        counts = tuple(int(c) for c in counts)
        n = sum(counts)
        if n < 1 and not spec.has_los:
            raise ConfigError("synthetic draw needs at least one path")
        gains = cluster_gains(spec.cluster_powers, counts) if n >= 1 else np.empty(0)
        delays = rng.uniform(spec.tau_min, spec.tau_max, n)
        eod, aod, eoa, aoa = _draw_angles(rng, n)
        for k in range(n):
            paths.append(
                Path(
                    amplitude_weight=a_nlos,
                    gain=float(gains[k]),
                    delay=float(delays[k]),
                    doppler=doppler_from_velocity(eoa[k], aoa[k], spec.velocity, lam),
                    eod=float(eod[k]),
                    aod=float(aod[k]),
                    eoa=float(eoa[k]),
                    aoa=float(aoa[k]),
                )
            )

    return PathSet(
        ricean_k=spec.ricean_k,
        carrier_freq=spec.carrier_freq,
        frequency=freq,
        paths=tuple(paths),
        has_los=spec.has_los,
    )
