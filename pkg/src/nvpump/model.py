"""Six-level rate model of the optically pumped N-V electron spin.

Level indices (0-based in arrays, 1-based in names):

    1  ground  m_s = 0
    2  ground  m_s = +-1 (lumped)
    3  excited m_s = 0
    4  excited m_s = +-1 (lumped)
    5  upper singlet
    6  lower singlet

Units are ns and ns^-1 (1 GHz = 1 ns^-1) everywhere.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .errors import InvalidRateError, InvalidStateError

N_LEVELS = 6
STATE_TOL = 1e-9

# zero-field splittings; documentation only, they do not enter the rate model
D_GS_GHZ = 2.87
D_ES_GHZ = 1.41

SINGLET_WEIGHTS = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 1.0])


@dataclass(frozen=True)
class RateConstants:
    """Transition rates k_ij (from level i to level j), ns^-1."""

    k13: float = 0.628
    k24: float = 0.628
    k31: float = 0.4396
    k42: float = 0.4396
    k32: float = 0.0
    k41: float = 0.0
    k35: float = 0.0314
    k45: float = 0.1884
    k56: float = 6.28
    k61: float = 0.020724
    k62: float = 0.013816

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise InvalidRateError(f"{f.name} must be a number, got {v!r}") from None
            if not math.isfinite(v):
                raise InvalidRateError(f"{f.name} must be finite")
            if v < 0:
                raise InvalidRateError(f"{f.name} must be ≥ 0")
            object.__setattr__(self, f.name, v)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def replace(self, **changes) -> "RateConstants":
        return replace(self, **changes)

    @classmethod
    def zero(cls) -> "RateConstants":
        return cls(**{f.name: 0.0 for f in fields(cls)})


DEFAULT_RATES = RateConstants()
RATE_NAMES = tuple(f.name for f in fields(RateConstants))


class StateAudit:
    """Running min / sum-deviation statistics over every validated state."""

    def __init__(self):
        self.count = 0
        self.min_population = math.inf
        self.max_sum_error = 0.0

    def record(self, p):
        self.count += 1
        self.min_population = min(self.min_population, float(p.min()))
        self.max_sum_error = max(self.max_sum_error, abs(float(p.sum()) - 1.0))


_audits: list[StateAudit] = []


@contextlib.contextmanager
def audit_states():
    """Collect statistics on every state passing through `validate_state`.

    The statistics are taken before round-off clamping, so a negative
    `min_population` shows the raw propagator output.
    """
    audit = StateAudit()
    _audits.append(audit)
    try:
        yield audit
    finally:
        _audits.remove(audit)


def validate_state(p, clamp_tol=1e-12, tol=STATE_TOL) -> np.ndarray:
    """Check simplex membership and return a read-only float copy.

    Negative entries no larger than `clamp_tol` in magnitude are set to 0.
    """
    p = np.array(p, dtype=float).reshape(-1)
    if p.shape != (N_LEVELS,):
        raise InvalidStateError(f"state must have {N_LEVELS} populations, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise InvalidStateError("state has non-finite populations")
    for audit in _audits:
        audit.record(p)
    if p.min() < -clamp_tol:
        raise InvalidStateError(f"population {p.min():.3e} below -{clamp_tol:g}")
    p[p < 0] = 0.0
    if p.max() > 1 + tol:
        raise InvalidStateError(f"population {p.max():.12g} exceeds 1")
    if abs(p.sum() - 1.0) > tol:
        raise InvalidStateError(f"populations sum to {p.sum():.12g}, not 1")
    p.flags.writeable = False
    return p


def thermal_state() -> np.ndarray:
    """Room-temperature start: one third in m_s = 0, two thirds in the lumped m_s = +-1."""
    return validate_state([1 / 3, 2 / 3, 0, 0, 0, 0])


def basis_state(level: int) -> np.ndarray:
    """All population in `level` (1-based)."""
    p = np.zeros(N_LEVELS)
    p[level - 1] = 1.0
    return validate_state(p)


@dataclass(frozen=True, eq=False)
class Generator:
    m: np.ndarray
    laser_on: bool

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        m.flags.writeable = False
        object.__setattr__(self, "m", m)


def _offdiagonal(rates: RateConstants, laser_on: bool) -> np.ndarray:
    r = rates
    m = np.zeros((N_LEVELS, N_LEVELS))
    # m[to, from]
    if laser_on:
        m[2, 0] = r.k13
        m[3, 1] = r.k24
    m[0, 2], m[1, 2], m[4, 2] = r.k31, r.k32, r.k35
    m[0, 3], m[1, 3], m[4, 3] = r.k41, r.k42, r.k45
    m[5, 4] = r.k56
    m[0, 5], m[1, 5] = r.k61, r.k62
    return m


def build_generator(rates: RateConstants = DEFAULT_RATES, laser_on: bool = True) -> Generator:
    """Rate matrix M with dP/dt = M P; laser on gives M0, laser off M1.

    Diagonal entries are the negated off-diagonal column sums, so columns
    sum to zero exactly.
    """
    if not isinstance(rates, RateConstants):
        rates = RateConstants(**rates)
    m = _offdiagonal(rates, laser_on)
    m[np.diag_indices(N_LEVELS)] = -m.sum(axis=0)
    return Generator(m, bool(laser_on))
