"""Datasets behind every simulated figure, as (columns, rows) tables."""

from __future__ import annotations

import numpy as np

from .model import DEFAULT_RATES
from .sequence import make_pulse_train, run_schedule
from .sweep import FixedParams, SweepSpec, dwell_vs_polarization, sweep

TRAIN_WIDTHS = (4.0, 20.0, 200.0)
WIDTH_GRID = (4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 75.0, 100.0, 150.0, 200.0)
WAIT_GRID = tuple(float(w) for w in range(10, 351, 20))

COLUMNS = {
    "fig2a": ("t_s", "n", "polarization"),
    "fig2c": ("t_s", "polarization", "loops_used"),
    "fig3a": ("t_w", "polarization", "contrast"),
    "fig4a": ("t_s", "n", "p21", "p12"),
    "fig4b": ("t_s", "n", "polarization", "net_transfer"),
    "fig4c": ("t_s", "singlet_dwell_ns", "polarization"),
    "fig4d": ("t_s", "singlet_dwell_ns", "polarization", "linear_fit"),
}


def linear_fit(x, y):
    """Least-squares line y = a + b x; returns (a, b, r_squared)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    b, a = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (a + b * x)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


def figure_datasets(
    rates=DEFAULT_RATES,
    fixed: FixedParams = FixedParams(),
    tol=1e-10,
    n_max=10000,
    readout=None,
    threads=1,
):
    tables = {}

    trains = {}
    for t_s in TRAIN_WIDTHS:
        trains[t_s] = run_schedule(make_pulse_train(t_s, fixed.t_w, fixed.n), track_loops=True, rates=rates, tol=tol)
    tables["fig2a"] = [(t_s, r.index, r.polarization) for t_s, res in trains.items() for r in res.per_loop]
    tables["fig4a"] = [(t_s, r.index, r.p21, r.p12) for t_s, res in trains.items() for r in res.per_loop]
    tables["fig4b"] = [(t_s, r.index, r.polarization, r.net_transfer) for t_s, res in trains.items() for r in res.per_loop]

    extra = {"readout": readout} if readout is not None else {}
    base = dict(fixed=fixed, tol=tol, n_max=n_max, **extra)
    ts_sweep = sweep(SweepSpec("t_s", WIDTH_GRID, **base), rates, threads)
    tables["fig2c"] = [(r.value, r.polarization, r.loops_to_converge) for r in ts_sweep.rows]
    tw_sweep = sweep(SweepSpec("t_w", WAIT_GRID, **base), rates, threads)
    tables["fig3a"] = [(r.value, r.polarization, r.contrast) for r in tw_sweep.rows]

    dv = dwell_vs_polarization(WIDTH_GRID, fixed.t_w, rates, tol)
    tables["fig4c"] = dv
    a, b, _ = linear_fit([d for _, d, _ in dv], [p for _, _, p in dv])
    tables["fig4d"] = [(t_s, d, p, a + b * d) for t_s, d, p in dv]
    return {name: (COLUMNS[name], tables[name]) for name in COLUMNS}
