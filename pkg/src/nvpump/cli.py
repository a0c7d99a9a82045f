"""Batch command-line interface.

    nvpump simulate | steady | sweep | rabi | optimize | figures [options]

Exit codes: 0 success, 1 computation error, 2 usage or configuration error.
CSV column orders are fixed per command (see COLUMNS below and
`nvpump.figures.COLUMNS`); numbers carry 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import FORMATS, RunConfig, parse_config
from .errors import BadParameterError, ConfigError, InvalidRateError, NVPumpError
from .figures import figure_datasets
from .model import build_generator, thermal_state
from .observables import rabi_contrast, relax_to_ground
from .propagator import sample_trajectory
from .sequence import loop_dwell, make_pulse_train, run_schedule, steady_state_iterative
from .sweep import SweepSpec, optimize_schedule, power_scale, sweep

LEVELS = ("P1", "P2", "P3", "P4", "P5", "P6")
COLUMNS = {
    "simulate": ("loop", "time_ns", "polarization", "p21", "p12", "singlet_dwell_ns"),
    "trajectory": ("time_ns", "laser") + LEVELS,
    "steady": ("t_s", "t_w", "power_scale") + LEVELS + ("polarization", "loops_used", "singlet_dwell_ns"),
    "sweep": ("value", "polarization", "contrast", "singlet_dwell_ns", "loops_to_converge"),
    "rabi": ("theta", "counts"),
    "optimize": ("t_s", "t_w", "polarization"),
}
VAR_ALIASES = {"ts": "t_s", "t_s": "t_s", "tw": "t_w", "t_w": "t_w", "n": "n", "power": "power_scale", "power_scale": "power_scale"}


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def rounded(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [rounded(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".12g"))
    return obj


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(meta, data) -> str:
    return json.dumps(rounded({"meta": meta, "data": data}), indent=2) + "\n"


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


def _emit(cfg, columns, rows, meta, data):
    if cfg.output_format == "csv":
        _write(csv_text(columns, rows), cfg.output_path)
    else:
        _write(json_text(meta, data), cfg.output_path)


def _meta(cfg: RunConfig, command, **extra):
    return {"command": command, "engine_version": __version__, "config": cfg.to_dict(), **extra}


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help="output path (directory for figures); stdout if omitted")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--ts", type=float, help="pulse width t_s, ns")
    common.add_argument("--tw", type=float, help="wait time t_w, ns")
    common.add_argument("--n", type=int, help="loop count N")
    common.add_argument("--power", type=float, help="laser power scale for k13, k24")
    common.add_argument("--t-read", type=float, help="readout pulse width, ns")

    parser = argparse.ArgumentParser(prog="nvpump", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one pulse train from the thermal state")
    p.add_argument("--sample-dt", type=float, help="emit a time-sampled trajectory with this step, ns")

    sub.add_parser("steady", parents=[common], help="saturated state of a (t_s, t_w) train")

    p = sub.add_parser("sweep", parents=[common], help="sweep one train parameter")
    p.add_argument("--var", required=True, choices=sorted(VAR_ALIASES))
    p.add_argument("--values", required=True, type=_floats)

    p = sub.add_parser("rabi", parents=[common], help="polarize, then simulate the Rabi contrast readout")
    p.add_argument("--single", action="store_true", help="polarize with one pulse instead of the saturated train")
    p.add_argument("--points", type=int, default=64)

    p = sub.add_parser("optimize", parents=[common], help="maximise steady polarization over (t_s, t_w)")
    p.add_argument("--ts-min", type=float, default=4.0)
    p.add_argument("--ts-max", type=float, default=200.0)
    p.add_argument("--tw-min", type=float, default=100.0)
    p.add_argument("--tw-max", type=float, default=350.0)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--resolution", type=float, default=0.1)

    sub.add_parser("figures", parents=[common], help="write every simulated figure dataset into --out")
    return parser


def resolve_config(args) -> RunConfig:
    if args.config:
        try:
            with open(args.config, "rb") as f:
                cfg = parse_config(f.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}", stage="config") from None
    else:
        cfg = parse_config(b"{}")
    fixed = cfg.fixed
    overrides = {k: v for k, v in (("t_s", args.ts), ("t_w", args.tw), ("n", args.n), ("power_scale", args.power)) if v is not None}
    readout = cfg.readout
    try:
        if overrides:
            fixed = replace(fixed, **overrides)
        if args.t_read is not None:
            readout = replace(readout, t_read=args.t_read)
    except NVPumpError as exc:
        raise ConfigError(str(exc), stage="arguments") from None
    if args.threads < 1:
        raise ConfigError("--threads must be ≥ 1", stage="arguments")
    return replace(
        cfg,
        fixed=fixed,
        readout=readout,
        output_format=args.format or cfg.output_format,
        output_path=args.out if args.out is not None else cfg.output_path,
    )


def cmd_simulate(cfg, args):
    f = cfg.fixed
    rates = power_scale(cfg.rates, f.power_scale)
    sched = make_pulse_train(f.t_s, f.t_w, f.n)
    res = run_schedule(sched, thermal_state(), track_loops=True, rates=rates, tol=cfg.steady_tol)
    loop_len = f.t_s + f.t_w
    loops = [(r.index, r.index * loop_len, r.polarization, r.p21, r.p12, r.dwell) for r in res.per_loop]

    trajectory = None
    if args.sample_dt is not None:
        trajectory = []
        gens = {True: build_generator(rates, True), False: build_generator(rates, False)}
        p, t0 = thermal_state(), 0.0
        for on, d in sched.segments:
            samples = sample_trajectory(gens[on], p, d, min(args.sample_dt, d) if d > 0 else args.sample_dt)
            for t, q in samples[1:] if trajectory else samples:
                trajectory.append((t0 + t, int(on), *q))
            p, t0 = samples[-1][1], t0 + d

    _note(f"simulate: polarization={fmt(res.polarization)} singlet_dwell_ns={fmt(res.singlet_dwell)} "
          f"photon_integral={fmt(res.photon_integral)} converged_at={res.converged_at}")
    data = {
        "result": {
            "final_state": res.final_state,
            "polarization": res.polarization,
            "singlet_dwell": res.singlet_dwell,
            "photon_integral": res.photon_integral,
            "converged_at": res.converged_at,
            "per_loop": [dict(zip(COLUMNS["simulate"], row)) for row in loops],
        },
    }
    if trajectory is not None:
        data["trajectory"] = [dict(zip(COLUMNS["trajectory"], row)) for row in trajectory]
    if trajectory is not None:
        columns, rows = COLUMNS["trajectory"], trajectory
    else:
        columns, rows = COLUMNS["simulate"], loops
    _emit(cfg, columns, rows, _meta(cfg, "simulate"), data)


def cmd_steady(cfg, args):
    f = cfg.fixed
    rates = power_scale(cfg.rates, f.power_scale)
    state, loops = steady_state_iterative(f.t_s, f.t_w, cfg.steady_tol, cfg.n_max, rates=rates)
    dwell = loop_dwell(state, f.t_s, f.t_w, rates)
    row = (f.t_s, f.t_w, f.power_scale, *state, state[0], loops, dwell)
    data = {
        "t_s": f.t_s, "t_w": f.t_w, "power_scale": f.power_scale,
        "final_state": state, "polarization": state[0], "loops_used": loops, "singlet_dwell": dwell,
    }
    _emit(cfg, COLUMNS["steady"], [row], _meta(cfg, "steady"), data)


def cmd_sweep(cfg, args):
    var = VAR_ALIASES[args.var]
    try:
        spec = SweepSpec(var, tuple(args.values), cfg.fixed, readout=cfg.readout, tol=cfg.steady_tol, n_max=cfg.n_max)
    except NVPumpError as exc:
        raise ConfigError(str(exc), stage="arguments") from None
    res = sweep(spec, cfg.rates, args.threads)
    rows = [(r.value, r.polarization, r.contrast, r.singlet_dwell, r.loops_to_converge) for r in res.rows]
    data = {"variable": var, "rows": [dict(zip(COLUMNS["sweep"], r)) for r in rows]}
    _emit(cfg, COLUMNS["sweep"], rows, _meta(cfg, "sweep", sweep=res.meta), data)


def cmd_rabi(cfg, args):
    f = cfg.fixed
    rates = power_scale(cfg.rates, f.power_scale)
    if args.single:
        state = run_schedule(make_pulse_train(f.t_s, f.t_w, 1), rates=rates).final_state
    else:
        state, _ = steady_state_iterative(f.t_s, f.t_w, cfg.steady_tol, cfg.n_max, rates=rates)
    ground = relax_to_ground(state, rates)
    curve = rabi_contrast(ground, cfg.readout, cfg.rates, n_points=args.points)
    _note(f"rabi: polarization={fmt(ground[0])} i_max={fmt(curve.i_max)} i_min={fmt(curve.i_min)} "
          f"contrast={fmt(curve.contrast)} residual={fmt(curve.residual)}")
    rows = list(zip(curve.theta, curve.counts))
    data = {
        "polarization": ground[0], "i_max": curve.i_max, "i_min": curve.i_min, "contrast": curve.contrast,
        "offset": curve.offset, "amplitude": curve.amplitude, "residual": curve.residual,
        "theta": curve.theta, "counts": curve.counts,
    }
    _emit(cfg, COLUMNS["rabi"], rows, _meta(cfg, "rabi", single=args.single), data)


def cmd_optimize(cfg, args):
    rates = power_scale(cfg.rates, cfg.fixed.power_scale)
    try:
        best = optimize_schedule((args.ts_min, args.ts_max), (args.tw_min, args.tw_max), rates,
                                 grid=args.grid, resolution=args.resolution)
    except BadParameterError as exc:
        raise ConfigError(str(exc), stage="arguments") from None
    data = dict(zip(COLUMNS["optimize"], best))
    _emit(cfg, COLUMNS["optimize"], [best], _meta(cfg, "optimize", bounds=[[args.ts_min, args.ts_max], [args.tw_min, args.tw_max]]), data)


def cmd_figures(cfg, args):
    if not cfg.output_path:
        raise ConfigError("figures needs --out <directory>", stage="arguments")
    tables = figure_datasets(cfg.rates, cfg.fixed, cfg.steady_tol, cfg.n_max, cfg.readout, args.threads)
    # single writer, after every dataset is computed
    os.makedirs(cfg.output_path, exist_ok=True)
    for name, (columns, rows) in tables.items():
        if cfg.output_format == "csv":
            text = csv_text(columns, rows)
        else:
            text = json_text(_meta(cfg, "figures", figure=name), [dict(zip(columns, r)) for r in rows])
        _write(text, os.path.join(cfg.output_path, f"{name}.{cfg.output_format}"))


COMMANDS = {
    "simulate": cmd_simulate,
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "rabi": cmd_rabi,
    "optimize": cmd_optimize,
    "figures": cmd_figures,
}


def _error_line(exc, default_stage):
    return f"nvpump {exc}" if exc.stage else f"nvpump {default_stage}: {exc}"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidRateError, BadParameterError) as exc:
        _note(_error_line(exc, "arguments"))
        return 2
    except NVPumpError as exc:
        _note(_error_line(exc, args.command))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
