"""Closed-form asymptotic error terms and bounds, with Monte Carlo oracles.

For a channel with one dominant path and many uniformly distributed others,
the selected-port squared error decomposes into a non-cross term, a
dominant/other cross term and an other/other cross term.  Averaging over the
uniform angle and delay distributions turns each into products of Bessel-J0
factors and delay-window integrals; this module evaluates those closed forms
and estimates the same expectations by direct sampling so every formula can
be checked to statistical precision.

All angle-like inputs live in :class:`BoundInputs`; the six phase-rate
fields a1..f1 encode the horizon and reference-time velocity phases, so the
per-path mismatch half-phase is ``a1*sx + b1*sy + c1*cz`` over the arrival
direction cosines and the reference-time phase is ``d1*sx + e1*sy + f1*cz``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_j0
from .channel import doppler_from_velocity
from .geometry import FluidAntennaGeometry, UpaGeometry

TWO_PI = 2.0 * math.pi

MC_TERMS = (
    "cos_a",
    "sin_a",
    "cos_b",
    "sin_b",
    "cos_g",
    "sin_g",
    "cos_k",
    "sin_k",
    "cos_delta",
    "cos_delta_plus_two_varsigma",
    "sin_sq_varsigma",
    "cross_term_los_nlos",
    "cross_term_nlos_nlos",
)


@dataclass(frozen=True)
class BoundInputs:
    """Per-antenna inputs of the closed-form error terms.

    ``a1, b1, c1`` multiply the arrival direction cosines in the mismatch
    half-phase (horizon-scaled velocity plus the port offset); ``d1, e1, f1``
    do the same for the reference-time phase.  ``d_nh, d_nv`` are the antenna
    phase offsets of the BS element under study.  The derived norms
    ``upsilon``, ``gamma`` and ``eta`` are recomputed on access so they can
    never go stale.
    """

    a1: float
    b1: float
    c1: float
    d1: float
    e1: float
    f1: float
    d_nh: float
    d_nv: float
    tau_min: float
    tau_max: float
    k_r: float
    f: float
    varsigma_los: float
    delta_los: float

    def __post_init__(self):
        if self.tau_max < self.tau_min:
            raise ValueError(f"tau_max {self.tau_max} < tau_min {self.tau_min}")
        if self.k_r < 0:
            raise ValueError(f"k_r must be >= 0, got {self.k_r}")

    @property
    def upsilon(self) -> float:
        return math.sqrt(self.d1**2 + self.e1**2 + self.f1**2)

    @property
    def gamma(self) -> float:
        return math.sqrt(
            (2 * self.a1 + self.d1) ** 2
            + (2 * self.b1 + self.e1) ** 2
            + (2 * self.c1 + self.f1) ** 2
        )

    @property
    def eta(self) -> float:
        return math.sqrt(self.a1**2 + self.b1**2 + self.c1**2)


def bound_inputs_from_geometry(
    velocity,
    t: float,
    horizon: float,
    port: int,
    fa: FluidAntennaGeometry,
    bs: UpaGeometry,
    antenna: tuple,
    frequency: float,
    tau_min: float,
    tau_max: float,
    ricean_k: float,
    los: dict,
) -> BoundInputs:
    """Assemble :class:`BoundInputs` from a physical configuration.

    ``antenna`` is the 1-based (horizontal, vertical) index pair of the BS
    element; ``los`` carries the dominant path's ``delay, eod, aod, eoa,
    aoa`` in SI units/radians.
    """
    v = np.asarray(velocity, dtype=float)
    lam = fa.wavelength
    n_h_idx, n_v_idx = antenna
    d = fa.port_spacing
    omega_los = doppler_from_velocity(los["eoa"], los["aoa"], v, lam)
    varsigma_los = (
        math.pi * omega_los * horizon
        + math.pi / lam * math.cos(los["eoa"]) * d * (port - 1)
    )
    delta_los = (
        TWO_PI * frequency * los["delay"]
        + TWO_PI * omega_los * t
        + TWO_PI / lam * bs.d_v * math.cos(los["eod"]) * (n_v_idx - 1)
        + TWO_PI / lam * bs.d_h * math.sin(los["eod"]) * math.sin(los["aod"]) * (n_h_idx - 1)
    )
    return BoundInputs(
        a1=math.pi * horizon * v[0] / lam,
        b1=math.pi * horizon * v[1] / lam,
        c1=(math.pi * (port - 1) * d + math.pi * horizon * v[2]) / lam,
        d1=TWO_PI * t * v[0] / lam,
        e1=TWO_PI * t * v[1] / lam,
        f1=TWO_PI * t * v[2] / lam,
        d_nh=math.pi * bs.d_h * (n_h_idx - 1) / lam,
        d_nv=math.pi * bs.d_v * (n_v_idx - 1) / lam,
        tau_min=tau_min,
        tau_max=tau_max,
        k_r=ricean_k,
        f=frequency,
        varsigma_los=varsigma_los,
        delta_los=delta_los,
    )


# Closed-form single expectations over the uniform angle/delay laws. --------


def _window(inp: BoundInputs, shift: float = 0.0) -> tuple[float, float]:
    """Mean of (cos, sin) of ``2*pi*f*tau - shift`` over the delay window."""
    span = inp.tau_max - inp.tau_min
    if span == 0.0:
        raise ZeroDivisionError("tau_max == tau_min: delay window is empty")
    den = TWO_PI * inp.f * span
    hi = TWO_PI * inp.f * inp.tau_max - shift
    lo = TWO_PI * inp.f * inp.tau_min - shift
    return (math.sin(hi) - math.sin(lo)) / den, (math.cos(lo) - math.cos(hi)) / den


def expected_cos_a(inp: BoundInputs) -> float:
    s = 2 * inp.c1 + inp.f1
    return float(bessel_j0((inp.gamma + s) / 2) * bessel_j0((inp.gamma - s) / 2))


def expected_cos_g(inp: BoundInputs) -> float:
    return float(bessel_j0((inp.upsilon + inp.f1) / 2) * bessel_j0((inp.upsilon - inp.f1) / 2))


def expected_cos_b(inp: BoundInputs) -> float:
    r = math.sqrt(inp.d_nh**2 + inp.d_nv**2)
    return float(bessel_j0(r + inp.d_nv) * bessel_j0(r - inp.d_nv))


def expected_cos_two_varsigma(inp: BoundInputs) -> float:
    return float(bessel_j0(inp.eta + inp.c1) * bessel_j0(inp.eta - inp.c1))


def cross_term_los_nlos(inp: BoundInputs) -> float:
    """Asymptotic dominant/other cross term (the scaled limit of the
    cross sum divided by the square root of the path count)."""
    _, sin_k = _window(inp, shift=inp.delta_los + inp.varsigma_los)
    k = inp.k_r
    return (
        math.sqrt(k)
        / (k + 1.0)
        * math.sin(inp.varsigma_los)
        * sin_k
        * expected_cos_b(inp)
        * (expected_cos_a(inp) - expected_cos_g(inp))
    )


def cross_term_nlos_nlos(inp: BoundInputs) -> float:
    """Asymptotic other/other cross term (limit of the pair sum divided by
    the path count minus one); a squared magnitude, hence nonnegative."""
    cos_u, sin_u = _window(inp)
    diff = expected_cos_b(inp) * (expected_cos_a(inp) - expected_cos_g(inp))
    return (cos_u**2 + sin_u**2) * diff**2 / (4.0 * (inp.k_r + 1.0))


def non_cross_term(inp: BoundInputs) -> float:
    """Asymptotic non-cross term: dominant-path residual plus the spread of
    the aggregate of the others."""
    k = inp.k_r
    return k / (k + 1.0) * math.sin(inp.varsigma_los) ** 2 + (
        1.0 - expected_cos_two_varsigma(inp)
    ) / (2.0 * (k + 1.0))


def upper_term(inp: BoundInputs) -> float:
    return 2.0 / (inp.k_r + 1.0) * (1.0 - expected_cos_two_varsigma(inp))


def mse_bounds(
    inp: BoundInputs, lambda_term: float, omega_term: float, tol: float = 1e-12
) -> tuple[float, float, int]:
    """Asymptotic (lower, upper, case) for the per-antenna squared error.

    ``lambda_term`` and ``omega_term`` are finite-path proxies of the two
    cross sums (Monte Carlo estimates at the configured path count); the
    trichotomy compares them against the dominant/other limit.
    """
    x = cross_term_los_nlos(inp)
    y = cross_term_nlos_nlos(inp)
    z = non_cross_term(inp)
    u = upper_term(inp)
    s = 4.0 * (x + y + z)
    threshold = -omega_term + x
    scale = max(1.0, abs(lambda_term), abs(threshold))
    if abs(lambda_term - threshold) <= tol * scale:
        return s, s, 3
    if lambda_term < threshold:
        return 0.0, min(s, u), 1
    return max(0.0, s), u, 2


def los_mse_bound(rho: float, k_r: float) -> float:
    """Upper bound on the selected-port squared error of a single dominant
    path at port density ``rho``: the residual phase after rounding to the
    nearest port is at most ``pi / (2 rho)`` per unit direction cosine."""
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    return k_r / (k_r + 1.0) * (2.0 - 2.0 * math.cos(math.pi / rho))


# Monte Carlo oracle over the uniform angle/delay laws. ----------------------


def _draw(inp: BoundInputs, n: int, rng: np.random.Generator) -> dict:
    tau = rng.uniform(inp.tau_min, inp.tau_max, n)
    theta_rx = rng.uniform(0.0, math.pi, n)
    phi_rx = rng.uniform(-math.pi, math.pi, n)
    theta = rng.uniform(0.0, math.pi, n)
    phi = rng.uniform(-math.pi, math.pi, n)
    sx = np.sin(theta_rx) * np.cos(phi_rx)
    sy = np.sin(theta_rx) * np.sin(phi_rx)
    cz = np.cos(theta_rx)
    g = inp.d1 * sx + inp.e1 * sy + inp.f1 * cz
    b = 2.0 * inp.d_nh * np.sin(theta) * np.sin(phi) + 2.0 * inp.d_nv * np.cos(theta)
    varsigma = inp.a1 * sx + inp.b1 * sy + inp.c1 * cz
    delta = TWO_PI * inp.f * tau + g + b
    a = (2 * inp.a1 + inp.d1) * sx + (2 * inp.b1 + inp.e1) * sy + (2 * inp.c1 + inp.f1) * cz
    return {"tau": tau, "a": a, "b": b, "g": g, "varsigma": varsigma, "delta": delta}


def monte_carlo_expectation(
    term: str, inp: BoundInputs, draws: int, rng: np.random.Generator
) -> tuple[float, float]:
    """(sample mean, standard error) of the selected expectation under the
    uniform path distributions; the evaluation goes through the defining
    phases, not through the closed forms it is used to check."""
    if draws < 100:
        raise ValueError(f"draws must be >= 100, got {draws}")
    if term not in MC_TERMS:
        raise ValueError(f"unknown term {term!r}; expected one of {MC_TERMS}")
    d = _draw(inp, draws, rng)
    los_shift = inp.delta_los + inp.varsigma_los
    if term == "cos_a":
        samples = np.cos(d["a"])
    elif term == "sin_a":
        samples = np.sin(d["a"])
    elif term == "cos_b":
        samples = np.cos(d["b"])
    elif term == "sin_b":
        samples = np.sin(d["b"])
    elif term == "cos_g":
        samples = np.cos(d["g"])
    elif term == "sin_g":
        samples = np.sin(d["g"])
    elif term == "cos_k":
        samples = np.cos(TWO_PI * inp.f * d["tau"] - los_shift)
    elif term == "sin_k":
        samples = np.sin(TWO_PI * inp.f * d["tau"] - los_shift)
    elif term == "cos_delta":
        samples = np.cos(d["delta"])
    elif term == "cos_delta_plus_two_varsigma":
        samples = np.cos(d["delta"] + 2.0 * d["varsigma"])
    elif term == "sin_sq_varsigma":
        samples = np.sin(d["varsigma"]) ** 2
    elif term == "cross_term_los_nlos":
        k = inp.k_r
        samples = (
            2.0
            * math.sqrt(k)
            / (k + 1.0)
            * math.sin(inp.varsigma_los)
            * np.sin(d["varsigma"])
            * np.cos(d["delta"] + d["varsigma"] - los_shift)
        )
    else:  # cross_term_nlos_nlos
        d2 = _draw(inp, draws, rng)
        samples = (
            np.sin(d["varsigma"])
            * np.sin(d2["varsigma"])
            * np.cos(d["delta"] + d["varsigma"] - d2["delta"] - d2["varsigma"])
            / (inp.k_r + 1.0)
        )
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(draws))
    return mean, se


def closed_form(term: str, inp: BoundInputs) -> float:
    """Closed-form value of each Monte Carlo checkable expectation."""
    if term == "cos_a":
        return expected_cos_a(inp)
    if term == "cos_b":
        return expected_cos_b(inp)
    if term == "cos_g":
        return expected_cos_g(inp)
    if term in ("sin_a", "sin_b", "sin_g"):
        return 0.0
    if term == "cos_k":
        return _window(inp, shift=inp.delta_los + inp.varsigma_los)[0]
    if term == "sin_k":
        return _window(inp, shift=inp.delta_los + inp.varsigma_los)[1]
    if term == "cos_delta":
        return _window(inp)[0] * expected_cos_g(inp) * expected_cos_b(inp)
    if term == "cos_delta_plus_two_varsigma":
        return _window(inp)[0] * expected_cos_a(inp) * expected_cos_b(inp)
    if term == "sin_sq_varsigma":
        return 0.5 * (1.0 - expected_cos_two_varsigma(inp))
    if term == "cross_term_los_nlos":
        return cross_term_los_nlos(inp)
    if term == "cross_term_nlos_nlos":
        return cross_term_nlos_nlos(inp)
    raise ValueError(f"unknown term {term!r}")
