"""Report records, deterministic seeding, and output writers.

Every experiment emits an :class:`ExperimentReport`: the echoed
configuration, a list of named checks with measured and predicted
values, and a wall-clock duration.  The report body (everything except
the duration) serializes to canonical JSON, so identical configs give
byte-identical bodies; per-check rows stream to JSON lines and
validate against :data:`REPORT_RECORD_SCHEMA`.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import jsonschema

from . import __version__

OUTPUT_ENV_VAR = "DUALLAB_OUT"

__all__ = [
    "OUTPUT_ENV_VAR",
    "REPORT_RECORD_SCHEMA",
    "CheckResult",
    "ExperimentConfig",
    "ExperimentReport",
    "derive_seed",
    "default_output_dir",
    "validate_record",
    "write_jsonl",
    "write_csv",
]


REPORT_RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "duallab check record",
    "type": "object",
    "properties": {
        "experiment": {"type": "string", "minLength": 1},
        "N": {"type": "integer", "minimum": 2},
        "p": {"type": "integer", "minimum": 0},
        "q": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 0},
        "check": {"type": "string", "minLength": 1},
        "measured": {"type": ["number", "string", "boolean"]},
        "predicted": {"type": ["number", "string", "boolean", "null"]},
        "tolerance": {"type": ["number", "null"]},
        "pass": {"type": "boolean"},
    },
    "required": [
        "experiment",
        "N",
        "p",
        "q",
        "seed",
        "samples",
        "check",
        "measured",
        "predicted",
        "tolerance",
        "pass",
    ],
    "additionalProperties": True,
}


def validate_record(record: dict) -> None:
    """Raise jsonschema.ValidationError when a record is malformed."""
    jsonschema.validate(record, REPORT_RECORD_SCHEMA)


def derive_seed(master: int, name: str) -> int:
    """Stable per-experiment seed: adding experiments never shifts others."""
    digest = hashlib.sha256(f"{master}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


def default_output_dir() -> Path:
    env = os.environ.get(OUTPUT_ENV_VAR)
    return Path(env) if env else Path.cwd() / "duallab-out"


def _jsonable(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return float(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return float(value.real)
        return f"{value.real}+{value.imag}j"
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


@dataclass(frozen=True)
class CheckResult:
    """One named verification: measured against predicted at a tolerance.

    ``tolerance`` None means an exact (integer or boolean) comparison.
    """

    name: str
    measured: object
    predicted: object
    tolerance: float | None
    passed: bool

    def to_record(self) -> dict:
        return {
            "check": self.name,
            "measured": _jsonable(self.measured),
            "predicted": _jsonable(self.predicted),
            "tolerance": self.tolerance,
            "pass": bool(self.passed),
        }


def scalar_check(name: str, measured: float, predicted: float, tol: float) -> CheckResult:
    """Convenience: |measured - predicted| <= tol."""
    return CheckResult(
        name=name,
        measured=float(measured),
        predicted=float(predicted),
        tolerance=float(tol),
        passed=bool(abs(float(measured) - float(predicted)) <= tol),
    )


def bound_check(name: str, measured: float, bound: float, tol: float = 0.0) -> CheckResult:
    """Convenience: measured <= bound + tol."""
    return CheckResult(
        name=name,
        measured=float(measured),
        predicted=float(bound),
        tolerance=float(tol) if tol else None,
        passed=bool(float(measured) <= float(bound) + tol),
    )


def exact_check(name: str, measured, predicted) -> CheckResult:
    """Convenience: equality of discrete values."""
    return CheckResult(
        name=name,
        measured=measured,
        predicted=predicted,
        tolerance=None,
        passed=bool(measured == predicted),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Echoable configuration; None fields take experiment defaults."""

    experiment: str
    N: int | None = None
    p: int | None = None
    q: int | None = None
    seed: int = 20240
    samples: int | None = None
    tolerances: dict = field(default_factory=dict)
    out: Path | None = None

    def resolved(self, **defaults) -> "ExperimentConfig":
        """Fill None fields from the experiment's defaults."""
        updates = {}
        for key in ("N", "p", "q", "samples"):
            if getattr(self, key) is None and key in defaults:
                updates[key] = defaults[key]
        if not updates:
            return self
        data = {
            "experiment": self.experiment,
            "N": self.N,
            "p": self.p,
            "q": self.q,
            "seed": self.seed,
            "samples": self.samples,
            "tolerances": self.tolerances,
            "out": self.out,
        }
        data.update(updates)
        return ExperimentConfig(**data)

    def echo(self) -> dict:
        return {
            "experiment": self.experiment,
            "N": self.N,
            "p": self.p,
            "q": self.q,
            "seed": self.seed,
            "samples": self.samples,
            "tolerances": dict(self.tolerances),
        }


@dataclass(eq=False)
class ExperimentReport:
    """Config echo, check list, duration, and artifact version."""

    config: ExperimentConfig
    checks: list[CheckResult]
    duration_s: float
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def body(self) -> dict:
        """Canonical content: everything except the wall-clock duration."""
        return {
            "config": self.config.echo(),
            "checks": [c.to_record() for c in self.checks],
            "version": self.version,
            "passed": self.passed,
        }

    def body_json(self) -> str:
        return json.dumps(self.body(), sort_keys=True, separators=(",", ":"))

    def records(self) -> list[dict]:
        """One schema-valid JSONL record per check."""
        base = {
            "experiment": self.config.experiment,
            "N": int(self.config.N if self.config.N is not None else 2),
            "p": int(self.config.p if self.config.p is not None else 0),
            "q": int(self.config.q if self.config.q is not None else 0),
            "seed": int(self.config.seed),
            "samples": int(self.config.samples or 0),
        }
        out = []
        for c in self.checks:
            rec = dict(base)
            rec.update(c.to_record())
            validate_record(rec)
            out.append(rec)
        return out


def write_jsonl(path: Path, records: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
