"""Experiment-facing quantities: polarization, fluorescence, Rabi contrast."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParameterError, FitError, UnsupportedStateError
from .model import DEFAULT_RATES, N_LEVELS, RateConstants, build_generator, validate_state
from .propagator import augmented_propagator, propagate

GROUND_SUPPORT_TOL = 1e-6
MIN_RABI_POINTS = 32


@dataclass(frozen=True)
class ReadoutConfig:
    t_read: float = 300.0
    collection_eff: float = 1.0

    def __post_init__(self):
        if not (self.t_read > 0 and math.isfinite(self.t_read)):
            raise BadParameterError(f"t_read must be > 0, got {self.t_read}")
        if not (0 < self.collection_eff <= 1):
            raise BadParameterError(f"collection_eff must be in (0, 1], got {self.collection_eff}")


@dataclass(frozen=True, eq=False)
class RabiCurve:
    theta: np.ndarray
    counts: np.ndarray
    i_max: float
    i_min: float
    contrast: float
    offset: float
    amplitude: float
    residual: float


def polarization(p) -> float:
    """Population of the ground m_s = 0 level."""
    return float(validate_state(p)[0])


def fluorescence_rate(p, rates: RateConstants = DEFAULT_RATES) -> float:
    p = validate_state(p)
    return rates.k31 * p[2] + rates.k42 * p[3]


@functools.lru_cache(maxsize=256)
def readout_weights(t_read: float, rates: RateConstants = DEFAULT_RATES) -> np.ndarray:
    """Row vector r with counts(p0) = r . p0 for unit collection efficiency.

    Readout counts are linear in the initial state, so one augmented
    exponential gives the response to every start.
    """
    w = [0, 0, rates.k31, rates.k42, 0, 0]
    big = augmented_propagator(build_generator(rates, True), t_read, w)
    r = big[N_LEVELS, :N_LEVELS].copy()
    r.flags.writeable = False
    return r


def readout_counts(p0, cfg: ReadoutConfig = ReadoutConfig(), rates: RateConstants = DEFAULT_RATES) -> float:
    """Photons emitted during a laser readout pulse, scaled by collection efficiency."""
    p0 = validate_state(p0)
    return max(0.0, cfg.collection_eff * float(readout_weights(float(cfg.t_read), rates) @ p0))


def relax_to_ground(p, rates: RateConstants = DEFAULT_RATES, tol=1e-12, max_time=1e5) -> np.ndarray:
    """Let excited and singlet population decay in the dark.

    Laser-off evolution leaves the ground levels untouched apart from the
    decay feed, so this is what a state looks like once the laser has been
    off long enough for a microwave pulse.
    """
    g = build_generator(rates, False)
    p = validate_state(p)
    dt = 100.0
    elapsed = 0.0
    while p[2:].sum() > tol:
        if elapsed >= max_time:
            raise UnsupportedStateError(f"non-ground population {p[2:].sum():.3e} did not decay in {max_time} ns")
        p = propagate(g, p, dt)
        elapsed += dt
    q = p.copy()
    q[2:] = 0.0
    return validate_state(q / q.sum())


def rabi_signal(p_polarized, theta: float) -> np.ndarray:
    """Incoherent rotation of population between ground levels 1 and 2."""
    p = validate_state(p_polarized)
    if p[2:].max() > GROUND_SUPPORT_TOL:
        raise UnsupportedStateError(
            f"Rabi rotation needs a ground-state population, found {p[2:].max():.3e} outside levels 1-2"
        )
    c2 = math.cos(theta / 2) ** 2
    s2 = math.sin(theta / 2) ** 2
    q = p.copy()
    q[0] = p[0] * c2 + p[1] * s2
    q[1] = p[1] * c2 + p[0] * s2
    return validate_state(q)


def rabi_contrast(
    p_polarized,
    cfg: ReadoutConfig = ReadoutConfig(),
    rates: RateConstants = DEFAULT_RATES,
    n_points: int = 64,
) -> RabiCurve:
    """Sweep the rotation angle, fit I = A + B cos(theta), report (I_max - I_min) / I_max."""
    if n_points < MIN_RABI_POINTS:
        raise BadParameterError(f"need at least {MIN_RABI_POINTS} Rabi points, got {n_points}")
    theta = np.linspace(0.0, 2 * np.pi, n_points)
    counts = np.array([readout_counts(rabi_signal(p_polarized, th), cfg, rates) for th in theta])
    design = np.column_stack([np.ones_like(theta), np.cos(theta)])
    (a, b), *_ = np.linalg.lstsq(design, counts, rcond=None)
    residual = float(np.linalg.norm(design @ [a, b] - counts))
    amplitude = abs(b)
    if residual > 1e-6 * max(amplitude, abs(a)):
        raise FitError(f"cosine fit residual {residual:.3e} too large for amplitude {amplitude:.3e}")
    i_max, i_min = a + amplitude, max(a - amplitude, 0.0)
    contrast = (i_max - i_min) / i_max if i_max > 0 else 0.0
    return RabiCurve(theta, counts, float(i_max), float(i_min), float(contrast), float(a), float(b), residual)
