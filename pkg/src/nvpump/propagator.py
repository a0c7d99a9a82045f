"""Exact propagation of populations under a constant rate matrix.

For a constant generator M the solution of dP/dt = M P is P(t) = exp(M t) P(0).
Time integrals of linear functionals w.P(t) come out of the same matrix
exponential by appending one row per functional to the generator:

    d/dt [P; J] = [[M, 0], [W, 0]] [P; J]

so that J(dt) = int_0^dt W P(t) dt with no quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .errors import BadParameterError, InvariantViolation, NonFiniteResultError
from .model import N_LEVELS, SINGLET_WEIGHTS, Generator, validate_state

CONSERVATION_TOL = 1e-10
CLAMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SegmentPropagator:
    t: np.ndarray
    duration: float
    laser_on: bool

    def __matmul__(self, p):
        return self.t @ p


@dataclass(frozen=True)
class Accumulator:
    """Running value of int w.P(t) dt (ns)."""

    weights: tuple
    value: float = 0.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != N_LEVELS:
            raise BadParameterError(f"accumulator needs {N_LEVELS} weights, got {len(w)}")
        object.__setattr__(self, "weights", w)

    def reset(self) -> "Accumulator":
        return replace(self, value=0.0)


def singlet_accumulator() -> Accumulator:
    return Accumulator(tuple(SINGLET_WEIGHTS))


def _check_duration(dt):
    dt = float(dt)
    if not math.isfinite(dt) or dt < 0:
        raise BadParameterError(f"duration must be finite and ≥ 0, got {dt}")
    return dt


def _expm(a):
    t = expm(a)
    if not np.all(np.isfinite(t)):
        raise NonFiniteResultError("matrix exponential overflowed")
    return t


def segment_propagator(g: Generator, dt: float) -> SegmentPropagator:
    """exp(M dt); columns sum to 1 for any valid generator."""
    dt = _check_duration(dt)
    t = _expm(g.m * dt)
    lo = t.min()
    if lo < -CLAMP_TOL:
        raise InvariantViolation(f"propagator entry {lo:.3e} is negative")
    t[t < 0] = 0.0
    colsum = np.abs(t.sum(axis=0) - 1.0).max()
    if colsum > CONSERVATION_TOL:
        raise InvariantViolation(f"propagator column sums off by {colsum:.3e}")
    t.flags.writeable = False
    return SegmentPropagator(t, dt, g.laser_on)


def augmented_propagator(g: Generator, dt: float, weights) -> np.ndarray:
    """exp of the generator augmented by one integrating row per weight vector.

    Returns the (6+n)x(6+n) matrix; rows 6.. map the initial state to the
    accumulated integrals.
    """
    dt = _check_duration(dt)
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    n = w.shape[0] if w.size else 0
    a = np.zeros((N_LEVELS + n, N_LEVELS + n))
    a[:N_LEVELS, :N_LEVELS] = g.m
    if n:
        a[N_LEVELS:, :N_LEVELS] = w
    return _expm(a * dt)


def _finish(q, p_in):
    drift = abs(q.sum() - p_in.sum())
    if drift > CONSERVATION_TOL:
        raise InvariantViolation(f"population not conserved (drift {drift:.3e})")
    if q.min() < -CLAMP_TOL:
        raise InvariantViolation(f"population {q.min():.3e} below clamping tolerance")
    return validate_state(q, clamp_tol=CLAMP_TOL)


def propagate(g: Generator, p, dt: float) -> np.ndarray:
    p = validate_state(p)
    return _finish(segment_propagator(g, dt).t @ p, p)


def propagate_with_accumulators(g: Generator, p, dt: float, accs):
    """Propagate `p` for `dt` and add int_0^dt w.P dt to each accumulator.

    Returns (new state, list of updated accumulators).
    """
    p = validate_state(p)
    accs = list(accs)
    big = augmented_propagator(g, dt, [a.weights for a in accs])
    out = big[:, :N_LEVELS] @ p
    q = _finish(out[:N_LEVELS], p)
    updated = [replace(a, value=a.value + float(out[N_LEVELS + i])) for i, a in enumerate(accs)]
    return q, updated


def sample_trajectory(g: Generator, p, dt: float, sample_dt: float):
    """States at 0, sample_dt, 2 sample_dt, ... and always at dt."""
    dt = _check_duration(dt)
    sample_dt = float(sample_dt)
    if not sample_dt > 0:
        raise BadParameterError(f"sample step must be > 0, got {sample_dt}")
    if sample_dt > dt and dt > 0:
        raise BadParameterError("sample step exceeds duration")
    p = validate_state(p)
    n = int(math.floor(dt / sample_dt + 1e-9)) if dt > 0 else 0
    times = [k * sample_dt for k in range(n + 1)]
    if dt - times[-1] > 1e-9 * max(dt, 1.0):
        times.append(dt)
    else:
        times[-1] = dt if n else 0.0
    out = [(0.0, p)]
    step = segment_propagator(g, sample_dt).t
    cur = p
    for t_prev, t in zip(times, times[1:]):
        h = t - t_prev
        t_mat = step if abs(h - sample_dt) <= 1e-12 * sample_dt else segment_propagator(g, h).t
        cur = _finish(t_mat @ cur, cur)
        out.append((t, cur))
    return out
