"""Experiment report containers with deterministic JSON/CSV emission.

An :class:`ExperimentReport` bundles a config echo, the RNG seed, named
estimates with confidence intervals, and trend arrays.  The JSON rendering is
canonical (sorted keys, 17-significant-digit floats) so identical runs emit
byte-identical documents; the wall time and timestamp are volatile fields
excluded from the determinism digest.  A flat CSV twin carries the same
numbers for plotting.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .errors import ValidationError
from .serialize import canonical_json_dumps, format_float

__all__ = [
    "Estimate",
    "ExperimentReport",
    "REPORT_SCHEMA",
    "validate_report",
    "wilson_interval",
]


def wilson_interval(hits: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (never collapses at 0)."""
    if n <= 0:
        raise ValidationError(f"sample count must be positive, got {n}")
    if not (0 <= hits <= n):
        raise ValidationError(f"hits must lie in [0, {n}], got {hits}")
    phat = hits / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n))
    # clamp to [0, 1] and guarantee phat inside despite roundoff
    return min(max(0.0, center - half), phat), max(min(1.0, center + half), phat)


@dataclass(frozen=True)
class Estimate:
    """A named scalar estimate with a confidence interval."""

    name: str
    value: float
    ci_low: float
    ci_high: float
    n_samples: int

    def __post_init__(self) -> None:
        if not (self.ci_low <= self.ci_high):
            raise ValidationError(
                f"estimate {self.name!r}: ci_low {self.ci_low} > ci_high {self.ci_high}"
            )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "ci_low": float(self.ci_low),
            "ci_high": float(self.ci_high),
            "n_samples": int(self.n_samples),
        }


@dataclass
class ExperimentReport:
    """Config echo + seed + estimates + trend arrays, rendered deterministically."""

    kind: str
    config: dict
    seed: int
    estimates: list[Estimate] = field(default_factory=list)
    trends: dict = field(default_factory=dict)
    wall_time: float = 0.0
    created_utc: str = ""

    def add(self, name: str, value: float, ci_low: float, ci_high: float,
            n_samples: int) -> None:
        self.estimates.append(Estimate(name, float(value), float(ci_low),
                                       float(ci_high), int(n_samples)))

    def get(self, name: str) -> Estimate:
        for est in self.estimates:
            if est.name == name:
                return est
        raise KeyError(name)

    def as_dict(self, *, include_volatile: bool = True) -> dict:
        doc = {
            "kind": self.kind,
            "config": _plain(self.config),
            "seed": int(self.seed),
            "estimates": [e.as_dict() for e in self.estimates],
            "trends": _plain(self.trends),
        }
        if include_volatile:
            doc["wall_time"] = float(self.wall_time)
            doc["created_utc"] = self.created_utc
        return doc

    def to_json(self, *, include_volatile: bool = True) -> str:
        doc = self.as_dict(include_volatile=include_volatile)
        validate_report(self.as_dict())
        return canonical_json_dumps(doc)

    def determinism_digest(self) -> str:
        """SHA-256 of the canonical JSON without the volatile fields."""
        payload = canonical_json_dumps(self.as_dict(include_volatile=False))
        return hashlib.sha256(payload.encode("ascii")).hexdigest()

    def to_csv(self) -> str:
        """Flat plotting twin: series,index,value,ci_low,ci_high,n_samples."""
        out = io.StringIO()
        out.write("series,index,value,ci_low,ci_high,n_samples\n")
        for est in self.estimates:
            out.write(
                f"{_csv_str(est.name)},0,{format_float(est.value)},"
                f"{format_float(est.ci_low)},{format_float(est.ci_high)},"
                f"{est.n_samples}\n"
            )
        for name in sorted(self.trends):
            for idx, value in enumerate(self.trends[name]):
                out.write(f"{_csv_str(name)},{idx},{_csv_cell(value)},,,\n")
        return out.getvalue()


def _csv_cell(value) -> str:
    """Render one trend entry: blank for missing, JSON-style booleans."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return _csv_str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(float(value))


def _plain(obj):
    """Recursively convert to canonical-JSON-compatible plain types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        return [_plain(v) for v in list(obj)]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int,)) or hasattr(obj, "__index__"):
        return int(obj)
    if isinstance(obj, float) or isinstance(obj, np.floating):
        return float(obj)
    raise ValidationError(f"cannot echo config value of type {type(obj).__name__}")


def _csv_str(s: str) -> str:
    if any(c in s for c in ",\"\n"):
        return '"' + s.replace('"', '""') + '"'
    return s


REPORT_SCHEMA = {
    "type": "object",
    "required": ["kind", "config", "seed", "estimates", "trends"],
    "properties": {
        "kind": {"type": "string", "minLength": 1},
        "config": {"type": "object"},
        "seed": {"type": "integer"},
        "estimates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "value", "ci_low", "ci_high", "n_samples"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "value": {"type": "number"},
                    "ci_low": {"type": "number"},
                    "ci_high": {"type": "number"},
                    "n_samples": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "trends": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": ["number", "string", "boolean", "null"]},
            },
        },
        "wall_time": {"type": "number", "minimum": 0},
        "created_utc": {"type": "string"},
    },
    "additionalProperties": False,
}


def validate_report(doc: dict) -> None:
    """Raise ValidationError if the document violates the report schema."""
    try:
        jsonschema.validate(doc, REPORT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"report schema violation: {exc.message}") from exc
