"""Command-line interface: configuration in, CSV out.

Subcommands: ``simulate`` (drop set -> spectral efficiency per SNR and
method), ``sweep`` (geometry/speed sweeps -> prediction error trends),
``estimate`` (offline parameter estimation from a sample CSV),
``select-port`` (port schedule emission) and ``verify-theory`` (closed forms
against their Monte Carlo oracles).  Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import csvio, theory
from .channel import ScenarioSpec, generate_scenario
from .config import (
    RunConfig,
    build_scenario,
    config_digest,
    explicit_path_table,
    load_config,
    parse_override,
)
from .errors import ConfigError, EstimationError, NumericalError
from .linksim import METHODS, aggregate_pred_error, aggregate_se, simulate
from .pencil import estimate_model
from .portselect import build_schedule, objective_on_ports
from .seeding import substream


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpmp", description=__doc__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON scenario file")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker threads")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a configuration key (repeatable)",
        )

    common(sub.add_parser("simulate", help="run the downlink drop set"))
    sp = sub.add_parser("sweep", help="sweep a scenario key and track prediction error")
    common(sp)
    sp.add_argument(
        "--sweep",
        required=True,
        metavar="KEY=V1,V2,...",
        help="key and comma-separated values to sweep (fa.rho and fa.w keep "
        "the other fluid-antenna parameter fixed by adjusting fa.m)",
    )
    sp = sub.add_parser("estimate", help="estimate path parameters from a sample CSV")
    common(sp)
    sp.add_argument("--samples", required=True, help="CSV with time_index, antenna_index, port_index, re, im")
    common(sub.add_parser("select-port", help="emit a port schedule for the configured scenario"))
    common(sub.add_parser("verify-theory", help="check closed forms against Monte Carlo"))
    return p


def _resolve(args) -> RunConfig:
    overrides = [parse_override(o) for o in args.overrides]
    cfg = load_config(args.config, overrides)
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return RunConfig(
        config_path=args.config,
        subcommand=args.subcommand,
        overrides=tuple(args.overrides),
        master_seed=int(cfg["master_seed"]),
        output_dir=str(out),
        threads=args.threads,
        resolved=cfg,
    )


def _comment(run: RunConfig) -> str:
    cfg = run.resolved
    return (
        f"config_sha256={config_digest(cfg)} seed={cfg['master_seed']} "
        f"config={_compact(cfg)}"
    )


def _compact(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def _cmd_simulate(args) -> int:
    run = _resolve(args)
    cfg, out, comment = run.resolved, Path(run.output_dir), _comment(run)
    scenario = build_scenario(cfg)
    drops = simulate(scenario, threads=run.threads)
    rows = aggregate_se(drops, scenario.snr_grid)
    path = out / "simulate.csv"
    csvio.emit_csv(rows, path, comment)
    pred = aggregate_pred_error(drops)
    print(f"wrote {path}")
    for m in METHODS:
        se20 = [r["se"] for r in rows if r["method"] == m]
        print(f"  {m:14s} se={['%.2f' % v for v in se20]} pred_error={pred[m]:.2f} dB")
    return 0


def _sweep_values(text: str):
    if "=" not in text:
        raise ConfigError(f"--sweep {text!r} is not of the form key=v1,v2,...")
    key, raw = text.split("=", 1)
    values = []
    for item in raw.split(","):
        try:
            values.append(float(item))
        except ValueError:
            raise ConfigError(f"sweep value {item!r} is not numeric")
    if not values:
        raise ConfigError("sweep needs at least one value")
    return key.strip(), values


def _cmd_sweep(args) -> int:
    run = _resolve(args)
    cfg, out, comment = run.resolved, Path(run.output_dir), _comment(run)
    key, values = _sweep_values(args.sweep)
    rows = []
    for value in values:
        point = [(key, value)]
        if key == "fa.rho":
            point = [("fa.m", int(round(value * cfg["fa"]["w"])) + 1)]
        elif key == "fa.w":
            rho = (cfg["fa"]["m"] - 1) / cfg["fa"]["w"]
            point = [("fa.w", value), ("fa.m", int(round(rho * value)) + 1)]
        local = load_config(run.config_path, [parse_override(o) for o in run.overrides] + point)
        local["master_seed"] = run.master_seed
        scenario = build_scenario(local)
        drops = simulate(scenario, threads=run.threads)
        pred = aggregate_pred_error(drops)
        se_rows = aggregate_se(drops, scenario.snr_grid)
        for m in METHODS:
            first = next(r for r in se_rows if r["method"] == m)
            rows.append(
                {
                    "sweep_key": key,
                    "sweep_value": value,
                    "method": m,
                    "pred_error_db": pred[m],
                    "se": first["se"],
                    "se_ci": first["se_ci"],
                }
            )
    path = out / "sweep.csv"
    csvio.emit_csv(rows, path, comment)
    print(f"wrote {path}")
    return 0


def _cmd_estimate(args) -> int:
    run = _resolve(args)
    cfg, out, comment = run.resolved, Path(run.output_dir), _comment(run)
    scenario = build_scenario(cfg)
    pencil = scenario.pencil_config()
    records, _ = csvio.parse_csv(args.samples)
    required = {"time_index", "antenna_index", "port_index", "re", "im"}
    if not records or set(records[0].keys()) != required:
        raise ConfigError(f"sample CSV must have columns {sorted(required)}")
    n_v = scenario.bs.n_v
    half = pencil.n_half
    first1 = np.zeros((half, n_v), dtype=complex)
    first2 = np.zeros((half, n_v), dtype=complex) if scenario.bs.n_h >= 2 else None
    last1 = np.zeros((half, n_v), dtype=complex)
    seen = np.zeros((pencil.n_s, scenario.bs.n_antennas), dtype=bool)
    for rec in records:
        k = int(rec["time_index"])
        n = int(rec["antenna_index"])
        port = int(rec["port_index"])
        if not 1 <= k <= pencil.n_s:
            raise ConfigError(f"time_index {k} outside [1, {pencil.n_s}]")
        if not 0 <= n < scenario.bs.n_antennas:
            raise ConfigError(f"antenna_index {n} outside [0, {scenario.bs.n_antennas - 1}]")
        col, row = divmod(n, n_v)
        value = rec["re"] + 1j * rec["im"]
        expected = pencil.delta1 if k <= half else pencil.delta2
        if port != expected:
            raise ConfigError(
                f"time_index {k} must be sampled at port {expected}, got {port}"
            )
        seen[k - 1, n] = True
        if k <= half and col == 0:
            first1[k - 1, row] = value
        elif k <= half and col == 1 and first2 is not None:
            first2[k - 1, row] = value
        elif k > half and col == 0:
            last1[k - half - 1, row] = value
    needed_cols = min(2, scenario.bs.n_h)
    if not seen[:, : needed_cols * n_v].all():
        missing = int((~seen[:, : needed_cols * n_v]).sum())
        raise ConfigError(f"sample CSV is missing {missing} (time, antenna) entries")
    model = estimate_model(first1, last1, pencil, scenario.bs, scenario.fa, first_col2=first2)
    rows = [
        {
            "path": i + 1,
            "doppler_hz": float(model.doppler[i]),
            "eod_rad": float(model.eod[i]),
            "aod_rad": float(model.aod[i]),
            "eoa_rad": float(model.eoa[i]),
            "gain_re": float(model.gain[i].real),
            "gain_im": float(model.gain[i].imag),
        }
        for i in range(model.path_count)
    ]
    path = out / "estimates.csv"
    csvio.emit_csv(rows, path, comment)
    print(f"wrote {path} ({model.path_count} paths)")
    return 0


def _scenario_pathset(cfg: dict, scenario):
    speed = scenario.ue_speed(0)
    heading = substream(scenario.master_seed, "velocity", 0, 0).uniform(-math.pi, math.pi)
    velocity = (speed * math.cos(heading), speed * math.sin(heading), 0.0)
    spec = ScenarioSpec(
        ricean_k=scenario.ricean_k,
        carrier_freq=scenario.carrier_freq,
        frequency=scenario.frequency,
        velocity=velocity,
        table=explicit_path_table(cfg),
        n_paths=max(scenario.n_paths - 1, 0),
        tau_min=0.0,
        tau_max=scenario.delay_spread,
    )
    return generate_scenario(spec, substream(scenario.master_seed, "paths", 0, 0))


def _cmd_select_port(args) -> int:
    run = _resolve(args)
    cfg, out, comment = run.resolved, Path(run.output_dir), _comment(run)
    scenario = build_scenario(cfg)
    ps = _scenario_pathset(cfg, scenario)
    horizons = [
        scenario.csi_delay + j * scenario.slot_duration
        for j in range(scenario.n_eval_slots)
    ]
    schedule = build_schedule(ps, scenario.bs, scenario.fa, 0.0, horizons)
    rows = []
    for i, dt in enumerate(schedule.horizons):
        f_val = objective_on_ports(
            ps, scenario.bs, scenario.fa, 0.0, dt, ports=np.array([schedule.ports[i]])
        )[0]
        rows.append(
            {
                "dt_s": dt,
                "port": schedule.ports[i],
                "k": schedule.wrap_counts[i],
                "speed_mps": schedule.speeds[i],
                "f_value": float(f_val),
            }
        )
    path = out / "schedule.csv"
    csvio.emit_csv(rows, path, comment)
    print(f"wrote {path}")
    return 0


def _cmd_verify_theory(args) -> int:
    run = _resolve(args)
    cfg, out, comment = run.resolved, Path(run.output_dir), _comment(run)
    scenario = build_scenario(cfg)
    draws = int(cfg["theory"]["draws"])
    speed = scenario.ue_speed(0)
    rng = substream(scenario.master_seed, "theory", 0)
    heading = rng.uniform(-math.pi, math.pi)
    velocity = (speed * math.cos(heading), speed * math.sin(heading), 0.0)
    los = {
        "delay": 0.0,
        "eod": rng.uniform(0.2, math.pi - 0.2),
        "aod": rng.uniform(-math.pi, math.pi),
        "eoa": rng.uniform(0.2, math.pi - 0.2),
        "aoa": rng.uniform(-math.pi, math.pi),
    }
    inputs = theory.bound_inputs_from_geometry(
        velocity=velocity,
        t=scenario.slot_duration,
        horizon=scenario.csi_delay,
        port=max(scenario.fa.m_ports // 3, 1),
        fa=scenario.fa,
        bs=scenario.bs,
        antenna=(min(2, scenario.bs.n_h), scenario.bs.n_v // 2 + 1),
        frequency=scenario.frequency or scenario.carrier_freq,
        tau_min=0.0,
        tau_max=scenario.delay_spread,
        ricean_k=scenario.ricean_k,
        los=los,
    )
    rows = []
    for i, term in enumerate(theory.MC_TERMS):
        mean, se = theory.monte_carlo_expectation(
            term, inputs, draws, substream(scenario.master_seed, "theory", 1, i)
        )
        cf = theory.closed_form(term, inputs)
        if se > 0:
            z = abs(mean - cf) / se
        else:
            z = 0.0 if abs(mean - cf) < 1e-12 else math.inf
        rows.append(
            {
                "term": term,
                "closed_form": cf,
                "mc_mean": mean,
                "mc_se": se,
                "z_score": z,
                "pass": bool(z <= 3.0),
            }
        )
    path = out / "verify_theory.csv"
    csvio.emit_csv(rows, path, comment)
    worst = max(rows, key=lambda r: r["z_score"])
    print(f"wrote {path}; worst |z| = {worst['z_score']:.2f} ({worst['term']})")
    return 0 if all(r["pass"] for r in rows) else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "estimate": _cmd_estimate,
    "select-port": _cmd_select_port,
    "verify-theory": _cmd_verify_theory,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (EstimationError, NumericalError, np.linalg.LinAlgError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
