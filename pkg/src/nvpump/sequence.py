"""Pulse trains, loop maps, steady states and per-loop ground-state transfer.

A train is N repetitions of (laser on for t_s, laser off for t_w). One loop
is the linear map T = exp(M_off t_w) exp(M_on t_s); its fixed point is the
saturated state of an arbitrarily long train.

Ground-state transfer P21 / P12 is the population that left ground level 2
(resp. 1) and arrives in ground level 1 (resp. 2) during one loop. Levels 3
and 4 are only ever fed from 1 and 2 respectively, so only the singlet
levels need an origin tag; the transfer is the exact time integral of the
tagged arrival flux. At the periodic steady state P21 == P12 identically.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    BadParameterError,
    ConvergenceError,
    DegenerateFixedPointError,
    InvariantViolation,
)
from .model import (
    DEFAULT_RATES,
    N_LEVELS,
    SINGLET_WEIGHTS,
    RateConstants,
    build_generator,
    thermal_state,
    validate_state,
)
from .propagator import CONSERVATION_TOL, augmented_propagator, segment_propagator

STEADY_TOL = 1e-10
STEADY_N_MAX = 10000
DEFAULT_T_W = 150.0

# tagged layout: 1, 2, 3, 4, 5 (from 1), 5 (from 2), 6 (from 1), 6 (from 2),
# then the two transfer integrals P21, P12
_N_TAGGED = 8
_I21, _I12 = 8, 9


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple
    t_s: float | None = None
    t_w: float | None = None
    n: int | None = None

    def __post_init__(self):
        segs = tuple((bool(on), float(d)) for on, d in self.segments)
        if not segs:
            raise BadParameterError("schedule has no segments")
        for _, d in segs:
            if not (math.isfinite(d) and d >= 0):
                raise BadParameterError(f"segment duration must be ≥ 0, got {d}")
        object.__setattr__(self, "segments", segs)

    @property
    def duration(self) -> float:
        return sum(d for _, d in self.segments)

    @property
    def is_train(self) -> bool:
        return self.n is not None


def make_pulse_train(t_s: float, t_w: float = DEFAULT_T_W, n: int = 1) -> PulseSchedule:
    if not (t_s > 0 and math.isfinite(t_s)):
        raise BadParameterError(f"pulse width t_s must be > 0, got {t_s}")
    if not (t_w >= 0 and math.isfinite(t_w)):
        raise BadParameterError(f"wait time t_w must be ≥ 0, got {t_w}")
    if int(n) != n or n < 1:
        raise BadParameterError(f"loop count N must be a positive integer, got {n}")
    n = int(n)
    segs = ((True, float(t_s)), (False, float(t_w))) * n
    return PulseSchedule(segs, float(t_s), float(t_w), n)


@dataclass(frozen=True)
class LoopRecord:
    index: int
    polarization: float
    p21: float
    p12: float
    dwell: float

    @property
    def net_transfer(self) -> float:
        return self.p21 - self.p12


@dataclass(frozen=True, eq=False)
class SimulationResult:
    final_state: np.ndarray
    polarization: float
    singlet_dwell: float
    photon_integral: float
    per_loop: tuple | None = None
    converged_at: int | None = None


def _tagged_generator(rates, laser_on):
    r = rates
    m = np.zeros((_N_TAGGED + 2, _N_TAGGED + 2))
    if laser_on:
        m[2, 0] = r.k13
        m[3, 1] = r.k24
    m[0, 2], m[1, 2], m[4, 2] = r.k31, r.k32, r.k35
    m[0, 3], m[1, 3], m[5, 3] = r.k41, r.k42, r.k45
    m[6, 4] = r.k56
    m[7, 5] = r.k56
    m[0, 6], m[1, 6] = r.k61, r.k62
    m[0, 7], m[1, 7] = r.k61, r.k62
    core = m[:_N_TAGGED, :_N_TAGGED]
    core[np.diag_indices(_N_TAGGED)] = -core.sum(axis=0)
    # arrivals in 1 from population that left 2, and vice versa
    m[_I21, 3], m[_I21, 7] = r.k41, r.k61
    m[_I12, 2], m[_I12, 6] = r.k32, r.k62
    return m


@dataclass(frozen=True, eq=False)
class LoopPropagator:
    t: np.ndarray
    t_s: float
    t_w: float
    rates: RateConstants = DEFAULT_RATES
    tagged: np.ndarray = field(repr=False, default=None)

    @functools.cached_property
    def singlet_tag_fractions(self):
        """Share of levels 5 and 6 that left ground level 1, at the tagged fixed point."""
        core = self.tagged[:_N_TAGGED, :_N_TAGGED]
        try:
            x = _stationary(core)
        except DegenerateFixedPointError:
            return 0.5, 0.5
        f5 = x[4] / (x[4] + x[5]) if x[4] + x[5] > 0 else 0.5
        f6 = x[6] / (x[6] + x[7]) if x[6] + x[7] > 0 else 0.5
        return f5, f6

    def tag(self, p) -> np.ndarray:
        f5, f6 = self.singlet_tag_fractions
        x = np.zeros(_N_TAGGED)
        x[:4] = p[:4]
        x[4], x[5] = f5 * p[4], (1 - f5) * p[4]
        x[6], x[7] = f6 * p[5], (1 - f6) * p[5]
        return x


@functools.lru_cache(maxsize=4096)
def _loop_propagator(t_s, t_w, rates):
    on = segment_propagator(build_generator(rates, True), t_s)
    off = segment_propagator(build_generator(rates, False), t_w)
    t = off.t @ on.t
    t.flags.writeable = False
    tagged = expm(_tagged_generator(rates, False) * t_w) @ expm(_tagged_generator(rates, True) * t_s)
    tagged.flags.writeable = False
    return LoopPropagator(t, t_s, t_w, rates, tagged)


def loop_propagator(t_s: float, t_w: float = DEFAULT_T_W, rates: RateConstants = DEFAULT_RATES) -> LoopPropagator:
    if not (t_s > 0 and math.isfinite(t_s)):
        raise BadParameterError(f"pulse width t_s must be > 0, got {t_s}")
    if not (t_w >= 0 and math.isfinite(t_w)):
        raise BadParameterError(f"wait time t_w must be ≥ 0, got {t_w}")
    return _loop_propagator(float(t_s), float(t_w), rates)


def _tagged_step(x, lp):
    y = np.zeros(_N_TAGGED + 2)
    y[:_N_TAGGED] = x
    return lp.tagged @ y


def loop_transfer(p_start, lp: LoopPropagator):
    """(P21, P12) for one loop started from `p_start`.

    `p_start` is a 6-level state; singlet population present at loop start
    is split by origin in the proportions of the tagged fixed point. An
    8-entry tagged vector is used as-is.
    """
    p_start = np.asarray(p_start, dtype=float)
    x = p_start if p_start.size == _N_TAGGED else lp.tag(validate_state(p_start))
    y = _tagged_step(x, lp)
    return float(y[_I21]), float(y[_I12])


def _stationary(t):
    """Unique probability vector with t x = x; t column-stochastic."""
    n = t.shape[0]
    a = t - np.eye(n)
    sv = np.linalg.svd(a, compute_uv=False)
    null_dim = int(np.sum(sv < 1e-12 * max(1.0, sv[0])))
    if null_dim > 1:
        raise DegenerateFixedPointError(f"loop map has a {null_dim}-dimensional fixed-point space")
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def steady_state_eigen(t_s: float, t_w: float = DEFAULT_T_W, rates: RateConstants = DEFAULT_RATES) -> np.ndarray:
    """Fixed point of the loop map by a direct linear solve."""
    lp = loop_propagator(t_s, t_w, rates)
    return validate_state(_stationary(lp.t))


def steady_state_iterative(
    t_s: float,
    t_w: float = DEFAULT_T_W,
    tol: float = STEADY_TOL,
    n_max: int = STEADY_N_MAX,
    rates: RateConstants = DEFAULT_RATES,
    p0=None,
):
    """Apply the loop map from the thermal state until the inf-norm change drops below `tol`.

    Returns (state, loops used).
    """
    if not tol > 0:
        raise BadParameterError("tol must be > 0")
    if n_max < 1:
        raise BadParameterError("n_max must be ≥ 1")
    t = loop_propagator(t_s, t_w, rates).t
    p = thermal_state() if p0 is None else validate_state(p0)
    for n in range(1, int(n_max) + 1):
        q = validate_state(t @ p)
        if np.abs(q - p).max() < tol:
            return q, n
        p = q
    raise ConvergenceError(
        f"no steady state after {n_max} loops (t_s={t_s}, t_w={t_w}, last change {np.abs(q - p).max():.3e})"
    )


def loop_dwell(p_start, t_s: float, t_w: float = DEFAULT_T_W, rates: RateConstants = DEFAULT_RATES) -> float:
    """Integrated singlet population (ns) over one loop, pulse and wait included."""
    p = validate_state(p_start)
    on = augmented_propagator(build_generator(rates, True), t_s, SINGLET_WEIGHTS)
    off = augmented_propagator(build_generator(rates, False), t_w, SINGLET_WEIGHTS)
    x = np.append(p, 0.0)
    y = on @ x
    y = off @ y
    return float(y[-1])


def run_schedule(
    s: PulseSchedule,
    p0=None,
    track_loops: bool = False,
    rates: RateConstants = DEFAULT_RATES,
    tol: float = STEADY_TOL,
) -> SimulationResult:
    """Propagate `p0` (default thermal) through every segment of `s`.

    Singlet dwell and emitted-photon integrals are always accumulated, over
    pulses and waits alike. With `track_loops`, per-loop polarization,
    transfer and dwell are recorded; `converged_at` is the first loop whose
    inf-norm state change is below `tol`.
    """
    p = thermal_state() if p0 is None else validate_state(p0)
    if track_loops and not s.is_train:
        raise BadParameterError("loop tracking needs a schedule built by make_pulse_train")
    weights = np.array([SINGLET_WEIGHTS, [0, 0, rates.k31, rates.k42, 0, 0]], dtype=float)
    gens = {True: build_generator(rates, True), False: build_generator(rates, False)}
    cache = {}
    dwell = photons = 0.0

    lp = loop_propagator(s.t_s, s.t_w, rates) if track_loops else None
    tagged = lp.tag(p) if track_loops else None
    records = []
    converged_at = None
    loop_start, dwell_start = p, 0.0

    for i, (on, d) in enumerate(s.segments):
        key = (on, d)
        if key not in cache:
            cache[key] = augmented_propagator(gens[on], d, weights)
        out = cache[key][:, :N_LEVELS] @ p
        q = out[:N_LEVELS]
        drift = abs(q.sum() - p.sum())
        if drift > CONSERVATION_TOL:
            raise InvariantViolation(f"population not conserved in segment {i} (drift {drift:.3e})")
        p = validate_state(q)
        dwell += float(out[N_LEVELS])
        photons += float(out[N_LEVELS + 1])

        if track_loops and i % 2 == 1:
            y = _tagged_step(tagged, lp)
            tagged = y[:_N_TAGGED]
            idx = i // 2 + 1
            records.append(LoopRecord(idx, float(p[0]), float(y[_I21]), float(y[_I12]), dwell - dwell_start))
            if converged_at is None and np.abs(p - loop_start).max() < tol:
                converged_at = idx
            loop_start, dwell_start = p, dwell

    return SimulationResult(
        final_state=p,
        polarization=float(p[0]),
        singlet_dwell=dwell,
        photon_integral=photons,
        per_loop=tuple(records) if track_loops else None,
        converged_at=converged_at,
    )
