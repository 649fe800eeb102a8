"""Run configuration: JSON schema, defaults, overrides, validation.

One schema serves every subcommand.  Keys mirror the deployment table of the
reference scenario (39 GHz, 8 UEs, a 2x8 half-wavelength planar array, a
20-wavelength 300-port fluid antenna, 616 ns delay spread, 4 ms CSI delay,
60/120 km/h UEs); an empty file resolves to exactly those defaults.  Angles
in the explicit path table are degrees, delays nanoseconds.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .geometry import FluidAntennaGeometry, UpaGeometry, wavelength_of
from .linksim import SimScenario

DEFAULTS = {
    "carrier_ghz": 39.0,
    "frequency_ghz": None,
    "n_ue": 8,
    "bs": {"n_h": 2, "n_v": 8, "d_h": 0.5, "d_v": 0.5},
    "fa": {"w": 20.0, "m": 300, "rho": None},
    "delay_spread_ns": 616.0,
    "csi_delay_ms": 4.0,
    "slot_ms": 0.5,
    "speeds_kmh": [60.0, 120.0],
    "ricean_k": 1.0,
    "snr_db": [0.0, 10.0, 20.0, 30.0],
    "n_drops": 50,
    "n_paths": 37,
    "n_samples": 160,
    "n_eval_slots": 8,
    "uplink_snr_db": None,
    "prony_order": None,
    "port_mode": "estimated",
    "master_seed": 0,
    "pencil": {
        "l": None,
        "r": None,
        "delta1": None,
        "delta2": None,
        "rank_threshold": None,
        "order_mode": None,
        "max_order": None,
    },
    "paths": None,
    "theory": {"draws": 1_000_000, "p1": 5000},
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved CLI invocation: scenario source plus run-level knobs."""

    config_path: str | None
    subcommand: str
    overrides: tuple
    master_seed: int
    output_dir: str
    threads: int
    resolved: dict = field(repr=False, default_factory=dict)


def _reject_unknown(data: dict, schema: dict, prefix: str = "") -> None:
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown configuration key {prefix + key!r}")
        if isinstance(schema[key], dict) and isinstance(value, dict):
            _reject_unknown(value, schema[key], prefix + key + ".")


def _set_dotted(data: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = data
    for p in parts[:-1]:
        if p not in node or not isinstance(node[p], dict):
            raise ConfigError(f"unknown configuration key {dotted!r}")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"unknown configuration key {dotted!r}")
    node[parts[-1]] = value


def parse_override(text: str):
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(path: str | None, overrides=()) -> dict:
    """Merge file contents and overrides over the defaults; reject unknown
    keys naming the offending key."""
    resolved = copy.deepcopy(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"configuration file {path!r} does not exist")
        text = p.read_text().strip()
        data = {}
        if text:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"configuration file {path!r} is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a JSON object")
        _reject_unknown(data, DEFAULTS)
        for key, value in data.items():
            if isinstance(value, dict) and isinstance(resolved.get(key), dict):
                resolved[key].update(value)
            else:
                resolved[key] = value
    for item in overrides:
        key, value = item if isinstance(item, tuple) else parse_override(item)
        _set_dotted(resolved, key, value)
    return resolved


def _require_number(cfg: dict, key: str, value, minimum=None, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {key!r} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"field {key!r} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"field {key!r} must be >= {minimum}, got {value}")
    return int(value) if integer else float(value)


def _path_table(rows, wavelength: float) -> list:
    table = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ConfigError(f"paths[{i}] must be an object")
        known = {"power", "delay_ns", "eod_deg", "aod_deg", "eoa_deg", "aoa_deg", "doppler_hz"}
        for key in row:
            if key not in known:
                raise ConfigError(f"unknown configuration key paths[{i}].{key!r}")
        try:
            entry = {
                "power": float(row.get("power", 1.0)),
                "delay": float(row["delay_ns"]) * 1e-9,
                "eod": math.radians(float(row["eod_deg"])),
                "aod": math.radians(float(row["aod_deg"])),
                "eoa": math.radians(float(row["eoa_deg"])),
                "aoa": math.radians(float(row["aoa_deg"])),
            }
        except KeyError as exc:
            raise ConfigError(f"paths[{i}] missing field {exc.args[0]!r}")
        if "doppler_hz" in row:
            entry["doppler"] = float(row["doppler_hz"])
        table.append(entry)
    if not table:
        raise ConfigError("explicit path table is empty")
    return table


def build_scenario(cfg: dict, master_seed: int | None = None) -> SimScenario:
    """Validated simulation scenario from a resolved configuration dict."""
    carrier = _require_number(cfg, "carrier_ghz", cfg["carrier_ghz"], minimum=1e-6) * 1e9
    lam = wavelength_of(carrier)
    bs_cfg = cfg["bs"]
    bs = UpaGeometry(
        n_h=_require_number(cfg, "bs.n_h", bs_cfg["n_h"], minimum=1, integer=True),
        n_v=_require_number(cfg, "bs.n_v", bs_cfg["n_v"], minimum=1, integer=True),
        d_h=_require_number(cfg, "bs.d_h", bs_cfg["d_h"], minimum=1e-9) * lam,
        d_v=_require_number(cfg, "bs.d_v", bs_cfg["d_v"], minimum=1e-9) * lam,
    )
    fa_cfg = cfg["fa"]
    fa = FluidAntennaGeometry(
        w=_require_number(cfg, "fa.w", fa_cfg["w"], minimum=1e-9),
        m_ports=_require_number(cfg, "fa.m", fa_cfg["m"], minimum=2, integer=True),
        wavelength=lam,
    )
    if fa_cfg.get("rho") is not None:
        rho = _require_number(cfg, "fa.rho", fa_cfg["rho"], minimum=1e-9)
        if abs(fa.port_density - rho) > 0.5 + 1e-9:
            raise ConfigError(
                f"fa.rho={rho} inconsistent with (m-1)/w={fa.port_density:.3f}"
            )
    speeds = cfg["speeds_kmh"]
    if isinstance(speeds, (int, float)):
        speeds = [speeds]
    if not speeds:
        raise ConfigError("field 'speeds_kmh' must not be empty")
    speeds_ms = tuple(
        _require_number(cfg, "speeds_kmh", s, minimum=0.0) / 3.6 for s in speeds
    )
    snr = cfg["snr_db"]
    if isinstance(snr, (int, float)):
        snr = [snr]
    snr_grid = tuple(_require_number(cfg, "snr_db", s) for s in snr)
    n_samples = _require_number(cfg, "n_samples", cfg["n_samples"], minimum=4, integer=True)
    if n_samples % 2:
        raise ConfigError(f"field 'n_samples' must be even, got {n_samples}")

    pencil = {}
    pc = cfg["pencil"]
    mapping = {
        "l": "pencil_l",
        "r": "pencil_r",
        "delta1": "delta1",
        "delta2": "delta2",
        "rank_threshold": "rank_threshold",
        "order_mode": "order_mode",
        "max_order": "max_order",
    }
    for key, target in mapping.items():
        if pc.get(key) is not None:
            pencil[target] = pc[key]

    frequency = cfg["frequency_ghz"]
    seed = cfg["master_seed"] if master_seed is None else master_seed
    scenario = SimScenario(
        carrier_freq=carrier,
        n_ue=_require_number(cfg, "n_ue", cfg["n_ue"], minimum=1, integer=True),
        bs=bs,
        fa=fa,
        slot_duration=_require_number(cfg, "slot_ms", cfg["slot_ms"], minimum=1e-9) * 1e-3,
        csi_delay=_require_number(cfg, "csi_delay_ms", cfg["csi_delay_ms"], minimum=0.0) * 1e-3,
        speeds=speeds_ms,
        ricean_k=_require_number(cfg, "ricean_k", cfg["ricean_k"], minimum=0.0),
        delay_spread=_require_number(cfg, "delay_spread_ns", cfg["delay_spread_ns"], minimum=0.0)
        * 1e-9,
        snr_grid=snr_grid,
        n_drops=_require_number(cfg, "n_drops", cfg["n_drops"], minimum=1, integer=True),
        master_seed=int(seed),
        n_paths=_require_number(cfg, "n_paths", cfg["n_paths"], minimum=1, integer=True),
        n_samples=n_samples,
        n_eval_slots=_require_number(cfg, "n_eval_slots", cfg["n_eval_slots"], minimum=1, integer=True),
        frequency=None if frequency is None else _require_number(cfg, "frequency_ghz", frequency, minimum=1e-6) * 1e9,
        uplink_snr_db=None
        if cfg["uplink_snr_db"] is None
        else float(cfg["uplink_snr_db"]),
        prony_order=None
        if cfg["prony_order"] is None
        else _require_number(cfg, "prony_order", cfg["prony_order"], minimum=1, integer=True),
        port_mode=cfg["port_mode"],
        pencil_overrides=pencil,
    )
    return scenario


def explicit_path_table(cfg: dict) -> list | None:
    if cfg.get("paths") is None:
        return None
    carrier = float(cfg["carrier_ghz"]) * 1e9
    return _path_table(cfg["paths"], wavelength_of(carrier))


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:12]


def parse_config(path: str | None, overrides=()) -> SimScenario:
    """Load, merge and validate in one step (file may be absent or empty)."""
    return build_scenario(load_config(path, overrides))
