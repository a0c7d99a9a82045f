"""JSON run configuration.

Schema (every key optional, unknown keys rejected)::

    {
      "rates":  {"k13": 0.628, ...},               # any subset of the eleven k_ij, ns^-1
      "engine": {"steady_tol": 1e-10, "n_max": 10000},
      "fixed":  {"t_s": 4, "t_w": 150, "n": 400, "t_read": 300,
                 "power_scale": 1.0, "collection_eff": 1.0},
      "output": {"format": "csv", "path": null}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, NVPumpError
from .model import DEFAULT_RATES, RATE_NAMES, RateConstants
from .observables import ReadoutConfig
from .sweep import FixedParams

SECTIONS = {
    "rates": set(RATE_NAMES),
    "engine": {"steady_tol", "n_max"},
    "fixed": {"t_s", "t_w", "n", "t_read", "power_scale", "collection_eff"},
    "output": {"format", "path"},
}
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    rates: RateConstants = DEFAULT_RATES
    steady_tol: float = 1e-10
    n_max: int = 10000
    fixed: FixedParams = FixedParams()
    readout: ReadoutConfig = ReadoutConfig()
    output_format: str = "csv"
    output_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "rates": self.rates.as_dict(),
            "engine": {"steady_tol": self.steady_tol, "n_max": self.n_max},
            "fixed": {**asdict(self.fixed), **asdict(self.readout)},
            "output": {"format": self.output_format, "path": self.output_path},
        }


def _number(section, key, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {v!r}", stage="config")
    if not math.isfinite(v):
        raise ConfigError(f"{section}.{key} must be finite", stage="config")
    if integer and int(v) != v:
        raise ConfigError(f"{section}.{key} must be an integer, got {v!r}", stage="config")
    return int(v) if integer else float(v)


def parse_config(text) -> RunConfig:
    """Parse and fully validate a JSON configuration document."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"not UTF-8 (byte {exc.start})", stage="config") from None
    if not text.strip():
        text = "{}"
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}", stage="config") from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object", stage="config")
    for name, body in doc.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown key {name!r}", stage="config")
        if not isinstance(body, dict):
            raise ConfigError(f"{name} must be an object", stage="config")
        for key in body:
            if key not in SECTIONS[name]:
                raise ConfigError(f"unknown key {name}.{key!r}", stage="config")

    rates_doc = {k: _number("rates", k, v) for k, v in doc.get("rates", {}).items()}
    engine = doc.get("engine", {})
    fixed = doc.get("fixed", {})
    output = doc.get("output", {})

    try:
        rates = DEFAULT_RATES.replace(**rates_doc)
    except NVPumpError as exc:
        raise ConfigError(f"rates: {exc}", stage="config") from None

    steady_tol = _number("engine", "steady_tol", engine.get("steady_tol", 1e-10))
    if steady_tol <= 0:
        raise ConfigError("engine.steady_tol must be > 0", stage="config")
    n_max = _number("engine", "n_max", engine.get("n_max", 10000), integer=True)
    if n_max < 1:
        raise ConfigError("engine.n_max must be ≥ 1", stage="config")

    d = FixedParams()
    r = ReadoutConfig()
    try:
        fixed_params = FixedParams(
            t_s=_number("fixed", "t_s", fixed.get("t_s", d.t_s)),
            t_w=_number("fixed", "t_w", fixed.get("t_w", d.t_w)),
            n=_number("fixed", "n", fixed.get("n", d.n), integer=True),
            power_scale=_number("fixed", "power_scale", fixed.get("power_scale", d.power_scale)),
        )
        readout = ReadoutConfig(
            t_read=_number("fixed", "t_read", fixed.get("t_read", r.t_read)),
            collection_eff=_number("fixed", "collection_eff", fixed.get("collection_eff", r.collection_eff)),
        )
    except ConfigError:
        raise
    except NVPumpError as exc:
        raise ConfigError(f"fixed: {exc}", stage="config") from None

    fmt = output.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}, got {fmt!r}", stage="config")
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path must be a string or null", stage="config")

    return RunConfig(rates, steady_tol, n_max, fixed_params, readout, fmt, path)
