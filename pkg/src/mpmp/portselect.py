"""Moving-port selection: error functional, closed-form single-path rule,
multipath grid search, periods, and schedule construction.

The objective for horizon ``dt`` at reference time ``t`` is the squared norm
of the difference between the channel at the candidate port at ``t + dt`` and
the frozen reference channel (port 1 at ``t``), summed over BS antennas.  Per
path the mismatch half-phase is

    varsigma_p(m) = pi*doppler_p*dt + pi*cos(eoa_p)*port_spacing*(m-1)/lambda,

affine in the port index; the objective is a trigonometric sum over path
pairs evaluated by the grid kernel.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import PathComponents
from .errors import NumericalError
from .geometry import FluidAntennaGeometry, UpaGeometry
from .kernels import objective_grid

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEGENERATE_COS_TOL = 1e-6


class DegenerateGeometryError(RuntimeError):
    """Single-path selection with an arrival direction broadside to the port
    line (cos(eoa) ~ 0): the port phase cannot steer the path."""


def _components(model) -> PathComponents:
    return model.components()


def round_half_away(x: float) -> int:
    """Nearest integer, halves away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


@dataclass(frozen=True)
class ErrorFunctional:
    """Introspectable view of the port-selection objective at (t, dt).

    Exposes the per-path mismatch phase, the per-antenna gain phase, the
    pairwise antenna-offset angles and the pairwise port-dependent phase; the
    fast evaluation path lives in :mod:`mpmp.kernels`.
    """

    comp: PathComponents
    bs: UpaGeometry
    fa: FluidAntennaGeometry
    t: float
    dt: float

    def varsigma(self, m: int) -> np.ndarray:
        """Per-path mismatch half-phase at port ``m`` (affine in m-1)."""
        lam = self.fa.wavelength
        return (
            math.pi * self.dt * self.comp.doppler
            + math.pi / lam * self.comp.cos_eoa * self.fa.port_spacing * (m - 1)
        )

    def delta(self, i_h: int, i_v: int) -> np.ndarray:
        """Per-path phase at antenna (i_h, i_v) (0-based indices) at time t."""
        lam = self.fa.wavelength
        return (
            self.comp.phase
            + 2.0 * math.pi * self.t * self.comp.doppler
            + 2.0 * math.pi / lam * self.bs.d_v * self.comp.cos_eod * i_v
            + 2.0 * math.pi / lam * self.bs.d_h * self.comp.sin_eod_sin_aod * i_h
        )

    def pair_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Pairwise (a, b) antenna phase steps for p < q, flattened."""
        lam = self.fa.wavelength
        iu, ju = np.triu_indices(self.comp.n_paths, k=1)
        a = 2.0 * math.pi / lam * self.bs.d_v * (self.comp.cos_eod[iu] - self.comp.cos_eod[ju])
        b = (
            2.0
            * math.pi
            / lam
            * self.bs.d_h
            * (self.comp.sin_eod_sin_aod[iu] - self.comp.sin_eod_sin_aod[ju])
        )
        return a, b

    def xi(self, m: int) -> np.ndarray:
        """Pairwise antenna-independent phase difference at port ``m``."""
        lam = self.fa.wavelength
        iu, ju = np.triu_indices(self.comp.n_paths, k=1)
        x = self.fa.port_spacing * (m - 1)
        return (
            (self.comp.phase[iu] - self.comp.phase[ju])
            + math.pi * (2.0 * self.t + self.dt) * (self.comp.doppler[iu] - self.comp.doppler[ju])
            + math.pi / lam * x * (self.comp.cos_eoa[iu] - self.comp.cos_eoa[ju])
        )

    def value_at_offsets(self, x: np.ndarray) -> np.ndarray:
        """Objective on an array of continuous port offsets (meters)."""
        c = self.comp
        return objective_grid(
            np.ascontiguousarray(c.weight, dtype=float),
            np.ascontiguousarray(c.phase, dtype=float),
            np.ascontiguousarray(c.doppler, dtype=float),
            np.ascontiguousarray(c.cos_eod, dtype=float),
            np.ascontiguousarray(c.sin_eod_sin_aod, dtype=float),
            np.ascontiguousarray(c.cos_eoa, dtype=float),
            self.bs.n_h,
            self.bs.n_v,
            self.bs.d_h,
            self.bs.d_v,
            self.fa.wavelength,
            self.t,
            self.dt,
            np.ascontiguousarray(np.atleast_1d(x), dtype=float),
        )

    def value(self, m: int) -> float:
        self.fa.check_port(m)
        return float(self.value_at_offsets(np.array([(m - 1) * self.fa.port_spacing]))[0])


def error_norm_sq(model, bs: UpaGeometry, fa: FluidAntennaGeometry, m: int, t: float, dt: float) -> float:
    """Squared error norm between the port-m channel at t+dt and the frozen
    reference channel, summed over all antennas."""
    return ErrorFunctional(_components(model), bs, fa, t, dt).value(m)


def objective_on_ports(model, bs, fa, t, dt, ports=None) -> np.ndarray:
    """Objective values at integer ports (all ports when ``ports`` is None)."""
    func = ErrorFunctional(_components(model), bs, fa, t, dt)
    if ports is None:
        ports = np.arange(1, fa.m_ports + 1)
    x = (np.asarray(ports) - 1) * fa.port_spacing
    return func.value_at_offsets(x)


def brute_force_port(model, bs: UpaGeometry, fa: FluidAntennaGeometry, t: float, dt: float) -> int:
    """Exhaustive argmin over all ports; ties break to the lowest index."""
    values = objective_on_ports(model, bs, fa, t, dt)
    return int(np.argmin(values)) + 1


def _single_path(model):
    comp = _components(model)
    if comp.n_paths != 1:
        raise ValueError(f"single-path selection called with {comp.n_paths} paths")
    return float(comp.doppler[0]), float(comp.cos_eoa[0])


def select_port_los(model, fa: FluidAntennaGeometry, dt: float, prev_port: int | None = None) -> int:
    """Closed-form port choice for a single-path channel.

    When the line covers at least one period of the mismatch phase, the zeros
    ``m - 1 = rho*(k - doppler*dt)/cos(eoa)`` (integer k) are enumerated and
    the best in-range rounded port returned; with ``prev_port`` given the
    wrap count minimizing liquid travel is preferred.  A shorter line falls
    back to comparing the endpoints and the at-most-one interior extremum.
    """
    omega, cos_eoa = _single_path(model)
    if abs(cos_eoa) < DEGENERATE_COS_TOL:
        raise DegenerateGeometryError(
            f"|cos(eoa)| = {abs(cos_eoa):.2e} cannot steer the port phase"
        )
    rho = fa.port_density
    d = fa.port_spacing
    t_single = abs(round_half_away(rho / cos_eoa))

    def g(m: int) -> float:
        vs = math.pi * omega * dt + math.pi * cos_eoa * d * (m - 1) / fa.wavelength
        return math.sin(vs) ** 2

    if fa.w * fa.wavelength >= t_single * d:
        lo = min(omega * dt, fa.w * cos_eoa + omega * dt)
        hi = max(omega * dt, fa.w * cos_eoa + omega * dt)
        ks = range(math.ceil(lo - 1e-9), math.floor(hi + 1e-9) + 1)
        candidates = set()
        for k in ks:
            m = round_half_away(rho * (k - omega * dt) / cos_eoa) + 1
            candidates.add(min(max(m, 1), fa.m_ports))
        if candidates:
            if prev_port is not None:
                return min(candidates, key=lambda m: (abs(m - prev_port), m))
            # On the integer lattice the mismatch-distance sequence is
            # V-shaped around each zero crossing, so the global argmin is a
            # rounded crossing or a truncated branch at an endpoint.
            candidates.update((1, fa.m_ports))
            return min(candidates, key=lambda m: (g(m), m))

    # Short line: minimum of g over x in [0, W*lambda] is attained at an
    # endpoint or the single interior zero of the mismatch phase.
    xs = [0.0, fa.length_m]
    n_lo = math.ceil(omega * dt + min(0.0, cos_eoa * fa.w) - 1e-9)
    n_hi = math.floor(omega * dt + max(0.0, cos_eoa * fa.w) + 1e-9)
    for n in range(n_lo, n_hi + 1):
        x0 = fa.wavelength * (n - omega * dt) / cos_eoa
        if 0.0 < x0 < fa.length_m:
            xs.append(x0)

    def g_x(x: float) -> float:
        return math.sin(math.pi * omega * dt + math.pi * cos_eoa * x / fa.wavelength) ** 2

    best = min(xs, key=lambda x: (g_x(x), x))
    m = round_half_away(best / d) + 1
    return min(max(m, 1), fa.m_ports)


def compute_periods(model, fa: FluidAntennaGeometry) -> "PeriodInfo":
    """Per-path port periods, their least common multiple and the physical
    repeat length of the objective.  Paths with cos(eoa) ~ 0 contribute a
    port-independent term and are excluded with a warning."""
    comp = _components(model)
    periods = []
    for c in comp.cos_eoa:
        if abs(c) < DEGENERATE_COS_TOL:
            warnings.warn("excluding broadside path from period computation", stacklevel=2)
            periods.append(0)
            continue
        periods.append(abs(round_half_away(fa.port_density / c)))
    usable = [p for p in periods if p > 0]
    if not usable:
        raise NumericalError("all paths are broadside; objective has no port period")
    t_eps = math.lcm(*usable)
    strongest = int(np.argmax(comp.weight))
    t_los = periods[strongest] if periods[strongest] > 0 else max(usable)
    return PeriodInfo(
        t_los=t_los,
        t_paths=tuple(periods),
        t_eps=t_eps,
        l_eps=float(t_eps) * fa.port_spacing,
    )


@dataclass(frozen=True)
class PeriodInfo:
    """Port-index periods of the objective (0 marks an excluded path)."""

    t_los: int
    t_paths: tuple
    t_eps: int
    l_eps: float


def _golden_minimize(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def select_port_multipath(
    model,
    bs: UpaGeometry,
    fa: FluidAntennaGeometry,
    t: float,
    dt: float,
    grid_divisor: int = 4,
) -> int:
    """Port minimizing the multipath objective.

    Dense grid (step ``port_spacing / grid_divisor``) over the whole line,
    golden-section refinement of each bracketed minimum to 1e-3 of a port
    spacing, endpoint evaluation, then an integer-port comparison of all
    candidates.  The objective repeats with the rounded-period length, but
    only to a few percent, so restricting the search to one period and
    translating the winner breaks argmin dominance; the full-line grid costs
    at most ``grid_divisor * (m_ports - 1) + 1`` evaluations.
    """
    func = ErrorFunctional(_components(model), bs, fa, t, dt)
    d = fa.port_spacing
    length = fa.length_m

    step = d / grid_divisor
    n_steps = int(math.floor(length / step + 1e-9))
    grid = np.linspace(0.0, n_steps * step, n_steps + 1)
    fg = func.value_at_offsets(grid)

    def f1(x: float) -> float:
        return float(func.value_at_offsets(np.array([x]))[0])

    tol = 1e-3 * d
    candidates: list[tuple[float, float]] = [(grid[0], float(fg[0])), (grid[-1], float(fg[-1]))]
    interior = np.nonzero((fg[1:-1] <= fg[:-2]) & (fg[1:-1] <= fg[2:]))[0] + 1
    for i in interior:
        x, fx = _golden_minimize(f1, grid[i - 1], grid[i + 1], tol)
        candidates.append((x, fx))

    # The deepest continuous basin can round to a worse port than a slightly
    # shallower basin centered on one, so compare candidates at the
    # integer-port resolution.
    ports = set()
    for x, _ in candidates:
        m0 = round_half_away(x / d) + 1
        for s in (-1, 0, 1):
            ports.add(min(max(m0 + s, 1), fa.m_ports))
    port_list = sorted(ports)
    vals = objective_on_ports(model, bs, fa, t, dt, ports=np.array(port_list))
    return int(port_list[int(np.argmin(vals))])


@dataclass(frozen=True)
class PortSchedule:
    """Selected port per horizon with wrap counts and implied liquid speeds."""

    horizons: tuple
    ports: tuple
    wrap_counts: tuple
    speeds: tuple


def build_schedule(model, bs: UpaGeometry, fa: FluidAntennaGeometry, t0: float, horizons) -> PortSchedule:
    """Port schedule over strictly increasing horizons, dispatching between
    the single-path closed form and the multipath search.

    Records per-step liquid speed from consecutive ports (port 1 is the
    implicit start at horizon 0) and asserts the speed bound
    ``W*lambda / min_step``; a violation would indicate an internal bug.
    """
    horizons = [float(h) for h in horizons]
    if not horizons or horizons[0] <= 0 or any(
        b <= a for a, b in zip(horizons, horizons[1:])
    ):
        raise ValueError("horizons must be strictly increasing and start above 0")

    comp = _components(model)
    strongest = int(np.argmax(comp.weight))
    omega_s = float(comp.doppler[strongest])
    cos_s = float(comp.cos_eoa[strongest])

    ports = []
    wraps = []
    speeds = []
    prev_port = 1
    prev_t = 0.0
    for dt in horizons:
        if comp.n_paths == 1:
            try:
                m = select_port_los(model, fa, dt, prev_port=prev_port)
            except DegenerateGeometryError:
                m = 1
        else:
            m = select_port_multipath(model, bs, fa, t0, dt)
        vs = omega_s * dt + cos_s * fa.port_spacing * (m - 1) / fa.wavelength
        wraps.append(round_half_away(vs))
        step = dt - prev_t
        speed = abs(m - prev_port) * fa.port_spacing / step
        bound = fa.length_m / step
        if speed > bound + 1e-9:
            raise NumericalError(f"sliding speed {speed} exceeds bound {bound}")
        speeds.append(speed)
        ports.append(m)
        prev_port, prev_t = m, dt

    return PortSchedule(
        horizons=tuple(horizons),
        ports=tuple(ports),
        wrap_counts=tuple(wraps),
        speeds=tuple(speeds),
    )
