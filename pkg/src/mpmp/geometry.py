"""Array geometry: BS uniform planar array and the UE fluid-antenna port line.

Conventions
-----------
The BS array lies in the yOz plane with the lower-left element at the origin.
Antenna ``n`` with horizontal index ``i`` (0-based) and vertical index ``j``
sits at ``[0, d_h*i, d_v*j]``.  Flattened antenna order is column-major in the
vertical direction: ``n = i * n_v + j``, so the first ``n_v`` entries of a
channel vector are the first antenna column.

The fluid antenna is a line of ``m_ports`` discrete liquid positions along z;
port ``m`` (1-based) sits at ``[0, 0, port_spacing*(m-1)]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class UpaGeometry:
    """BS uniform planar array: counts and spacings (meters)."""

    n_h: int
    n_v: int
    d_h: float
    d_v: float

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ConfigError(f"antenna counts must be >= 1, got ({self.n_h}, {self.n_v})")
        if self.d_h <= 0 or self.d_v <= 0:
            raise ConfigError(f"antenna spacings must be > 0, got ({self.d_h}, {self.d_v})")

    @property
    def n_antennas(self) -> int:
        return self.n_h * self.n_v

    def positions(self) -> np.ndarray:
        """(n_antennas, 3) element positions in meters, column-major order."""
        i = np.repeat(np.arange(self.n_h), self.n_v)
        j = np.tile(np.arange(self.n_v), self.n_h)
        return np.stack([np.zeros_like(i, dtype=float), self.d_h * i, self.d_v * j], axis=1)


@dataclass(frozen=True)
class FluidAntennaGeometry:
    """Fluid antenna line: length ``w`` in wavelengths, ``m_ports`` positions.

    ``port_density`` is ports per wavelength, ``(m_ports - 1) / w``; the
    physical inter-port spacing is ``wavelength / port_density`` so that the
    full line spans ``w * wavelength`` meters exactly.
    """

    w: float
    m_ports: int
    wavelength: float
    port_density: float = field(init=False)
    port_spacing: float = field(init=False)

    def __post_init__(self):
        if self.m_ports < 2:
            raise ConfigError(f"need at least 2 ports, got {self.m_ports}")
        if self.w <= 0 or self.wavelength <= 0:
            raise ConfigError("fluid antenna length and wavelength must be > 0")
        object.__setattr__(self, "port_density", (self.m_ports - 1) / self.w)
        object.__setattr__(self, "port_spacing", self.wavelength / self.port_density)

    @property
    def length_m(self) -> float:
        return self.w * self.wavelength

    def port_position(self, m: int) -> np.ndarray:
        """Position of port ``m`` (1-based) in meters."""
        self.check_port(m)
        return np.array([0.0, 0.0, self.port_spacing * (m - 1)])

    def check_port(self, m: int) -> None:
        if not 1 <= m <= self.m_ports:
            raise ValueError(f"port index {m} outside [1, {self.m_ports}]")


def wavelength_of(carrier_freq_hz: float) -> float:
    if carrier_freq_hz <= 0:
        raise ConfigError(f"carrier frequency must be > 0, got {carrier_freq_hz}")
    return SPEED_OF_LIGHT / carrier_freq_hz
