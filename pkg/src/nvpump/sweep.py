"""Parameter sweeps over the pulse train and a steady-state schedule optimizer."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import BadParameterError, NVPumpError
from .model import DEFAULT_RATES, RateConstants
from .observables import ReadoutConfig, rabi_contrast, relax_to_ground
from .sequence import (
    STEADY_N_MAX,
    STEADY_TOL,
    loop_dwell,
    make_pulse_train,
    run_schedule,
    steady_state_eigen,
    steady_state_iterative,
)

VARIABLES = ("t_s", "t_w", "n", "power_scale")
OUTPUTS = ("polarization", "contrast", "dwell", "per_loop")
RANGES = {
    "t_s": (0.1, 1000.0),
    "t_w": (0.0, 1e4),
    "n": (1, 100000),
    "power_scale": (0.0, 100.0),
}


def _check_range(name, v):
    lo, hi = RANGES[name]
    ok = math.isfinite(v) and (lo < v <= hi if name == "power_scale" else lo <= v <= hi)
    if name == "n":
        ok = ok and int(v) == v
    if not ok:
        bracket = "(" if name == "power_scale" else "["
        raise BadParameterError(f"{name}={v} outside {bracket}{lo}, {hi}]")


@dataclass(frozen=True)
class FixedParams:
    t_s: float = 4.0
    t_w: float = 150.0
    n: int = 400
    power_scale: float = 1.0

    def __post_init__(self):
        for name in VARIABLES:
            _check_range(name, getattr(self, name))


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    fixed: FixedParams = FixedParams()
    outputs: tuple = ("polarization", "contrast", "dwell")
    readout: ReadoutConfig = ReadoutConfig()
    tol: float = STEADY_TOL
    n_max: int = STEADY_N_MAX

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise BadParameterError(f"unknown sweep variable {self.variable!r}; choose from {VARIABLES}")
        values = tuple(int(v) if self.variable == "n" and float(v).is_integer() else float(v) for v in self.values)
        if not values:
            raise BadParameterError("sweep needs at least one value")
        for v in values:
            _check_range(self.variable, v)
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise BadParameterError(f"unknown outputs {sorted(bad)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "outputs", tuple(self.outputs))


@dataclass(frozen=True)
class SweepRow:
    value: float
    polarization: float
    contrast: float
    singlet_dwell: float
    loops_to_converge: int


@dataclass(frozen=True, eq=False)
class SweepResult:
    variable: str
    rows: tuple
    meta: dict = field(default_factory=dict)
    per_loop: tuple | None = None


def power_scale(rates: RateConstants, s: float) -> RateConstants:
    """Scale the optical pump rates k13, k24 by `s`; decays are untouched."""
    if not (s > 0 and math.isfinite(s)):
        raise BadParameterError(f"power scale must be > 0, got {s}")
    return rates.replace(k13=rates.k13 * s, k24=rates.k24 * s)


def _point(spec: SweepSpec, value, rates: RateConstants):
    params = replace(spec.fixed, **{spec.variable: value})
    r = power_scale(rates, params.power_scale)
    per_loop = None
    if spec.variable == "n":
        want_loops = "per_loop" in spec.outputs
        res = run_schedule(make_pulse_train(params.t_s, params.t_w, params.n), track_loops=True, rates=r, tol=spec.tol)
        state = res.final_state
        loops = params.n
        dwell = res.per_loop[-1].dwell
        per_loop = res.per_loop if want_loops else None
    else:
        state, loops = steady_state_iterative(params.t_s, params.t_w, spec.tol, spec.n_max, rates=r)
        dwell = loop_dwell(state, params.t_s, params.t_w, r)
        if "per_loop" in spec.outputs:
            res = run_schedule(make_pulse_train(params.t_s, params.t_w, loops), track_loops=True, rates=r, tol=spec.tol)
            per_loop = res.per_loop
    # contrast is read out with the unscaled readout laser
    curve = rabi_contrast(relax_to_ground(state, r), spec.readout, rates)
    row = SweepRow(value, float(state[0]), curve.contrast, dwell, int(loops))
    return row, per_loop


def sweep(spec: SweepSpec, rates: RateConstants = DEFAULT_RATES, threads: int = 1) -> SweepResult:
    """Evaluate every grid point of `spec`; rows come back in input order.

    Steady states are used for every axis except N, which runs the finite
    train. Grid points are independent, so `threads` only changes wall time.
    """

    def work(v):
        try:
            return _point(spec, v, rates)
        except NVPumpError as exc:
            raise type(exc)(f"{spec.variable}={v}: {exc}", stage="sweep") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(work, spec.values))
    else:
        out = [work(v) for v in spec.values]
    rows = tuple(r for r, _ in out)
    per_loop = tuple(pl for _, pl in out) if "per_loop" in spec.outputs else None
    meta = {
        "variable": spec.variable,
        "fixed": {k: getattr(spec.fixed, k) for k in VARIABLES},
        "rates": rates.as_dict(),
        "tol": spec.tol,
        "n_max": spec.n_max,
        "t_read": spec.readout.t_read,
        "engine_version": __version__,
    }
    return SweepResult(spec.variable, rows, meta, per_loop)


def dwell_vs_polarization(t_s_values, t_w: float = 150.0, rates: RateConstants = DEFAULT_RATES, tol=STEADY_TOL):
    """(t_s, singlet dwell of one steady-state loop in ns, steady polarization) per pulse width."""
    out = []
    for t_s in t_s_values:
        _check_range("t_s", t_s)
        state, _ = steady_state_iterative(t_s, t_w, tol, rates=rates)
        out.append((float(t_s), loop_dwell(state, t_s, t_w, rates), float(state[0])))
    return out


def golden_section_max(f, a, b, resolution):
    """Maximise a unimodal f on [a, b] until the bracket is narrower than `resolution`.

    Returns (x, f(x)) for the best point evaluated, endpoints included.
    """
    inv_phi = (math.sqrt(5) - 1) / 2
    seen = {a: f(a), b: f(b)}
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    seen[c], seen[d] = fc, fd
    while b - a > resolution:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = seen[c] = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = seen[d] = f(d)
    best = min(seen, key=lambda x: (-seen[x], x))
    return best, seen[best]


def _better(cand, best):
    # higher polarization wins; exact ties go to smaller t_s, then smaller t_w
    return (-cand[2], cand[0], cand[1]) < (-best[2], best[0], best[1])


def optimize_schedule(
    t_s_bounds,
    t_w_bounds,
    rates: RateConstants = DEFAULT_RATES,
    grid: int = 16,
    resolution: float = 0.1,
    max_passes: int = 4,
):
    """Maximise steady-state polarization over (t_s, t_w).

    A `grid` x `grid` scan picks the start; golden-section refinement then
    runs alternately along t_s and t_w inside one grid cell either side of
    the incumbent. Returns (t_s*, t_w*, polarization*).
    """
    (s_lo, s_hi), (w_lo, w_hi) = (tuple(map(float, t_s_bounds)), tuple(map(float, t_w_bounds)))
    for lo, hi, name in ((s_lo, s_hi, "t_s"), (w_lo, w_hi, "t_w")):
        if lo > hi:
            raise BadParameterError(f"empty {name} interval [{lo}, {hi}]")
        _check_range(name, lo)
        _check_range(name, hi)

    cache = {}

    def pol(t_s, t_w):
        key = (t_s, t_w)
        if key not in cache:
            cache[key] = float(steady_state_eigen(t_s, t_w, rates)[0])
        return cache[key]

    s_grid = np.unique(np.linspace(s_lo, s_hi, grid))
    w_grid = np.unique(np.linspace(w_lo, w_hi, grid))
    best = None
    for ts in s_grid:
        for tw in w_grid:
            cand = (float(ts), float(tw), pol(float(ts), float(tw)))
            if best is None or _better(cand, best):
                best = cand
    s_cell = (s_hi - s_lo) / max(grid - 1, 1)
    w_cell = (w_hi - w_lo) / max(grid - 1, 1)

    for _ in range(max_passes):
        start = best
        if s_hi > s_lo:
            a, b = max(s_lo, best[0] - s_cell), min(s_hi, best[0] + s_cell)
            ts, p = golden_section_max(lambda x: pol(x, best[1]), a, b, resolution)
            if _better((ts, best[1], p), best):
                best = (ts, best[1], p)
        if w_hi > w_lo:
            a, b = max(w_lo, best[1] - w_cell), min(w_hi, best[1] + w_cell)
            tw, p = golden_section_max(lambda x: pol(best[0], x), a, b, resolution)
            if _better((best[0], tw, p), best):
                best = (best[0], tw, p)
        if best == start:
            break
    return best
