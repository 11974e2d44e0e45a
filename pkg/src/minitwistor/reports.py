"""Run configuration and on-disk report bundles.

JSON is written with sorted keys and shortest round-trip floats, so a fixed
config and seed reproduce byte-identical files. Exact rationals are written
as "n/d" strings.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import platform
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__


def plain(obj):
    """Recursively convert numpy / Fraction / complex values into JSON-ready ones."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, Fraction):
        return str(obj.numerator) if obj.denominator == 1 else f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return float(obj.real) if obj.imag == 0 else [float(obj.real), float(obj.imag)]
    return obj


def dumps(obj):
    return json.dumps(plain(obj), sort_keys=True, indent=2) + "\n"


@dataclass
class Tolerances:
    projective: float = 1e-9
    closure: float = 1e-6
    fit_residual: float = 1e-6


@dataclass
class Grid:
    theta: int = 48
    phi: int = 48


@dataclass
class RunConfig:
    alpha: object = 16
    beta: object = 0
    gamma: object = 25
    mode: str = "approx"
    tolerance: Tolerances = field(default_factory=Tolerances)
    seed: int = 7
    out: str = "out"
    grid: Grid = field(default_factory=Grid)

    def __post_init__(self):
        if isinstance(self.tolerance, dict):
            self.tolerance = Tolerances(**self.tolerance)
        if isinstance(self.grid, dict):
            self.grid = Grid(**self.grid)
        self.validate()

    def validate(self):
        if self.mode not in ("exact", "approx"):
            raise ValueError(f"mode must be exact or approx, got {self.mode!r}")
        for k, v in dataclasses.asdict(self.tolerance).items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive, got {v}")
        if self.grid.theta < 4 or self.grid.phi < 4:
            raise ValueError("grid densities must be at least 4")

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k in ("alpha", "beta", "gamma"):
            d[k] = plain(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for k in ("alpha", "beta", "gamma"):
            if isinstance(d.get(k), str):
                d[k] = Fraction(d[k])
        return cls(**d)

    def to_json(self):
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def digest(self):
        """Hash of everything except the output directory."""
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def surface_args(self):
        return self.alpha, self.beta, self.gamma, self.mode


class ReportBundle:
    """Files of one command run plus a manifest; all writes go through one lock."""

    def __init__(self, command, config, golden=False):
        self.command = command
        self.config = config
        self.golden = golden
        self.dir = Path(config.out)
        self.files = {}
        self.timings = {}
        self._lock = threading.Lock()
        self._t0 = time.perf_counter()

    def timestamp(self):
        return None if self.golden else time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())

    def _write(self, name, text):
        with self._lock:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / name).write_text(text)
            self.files[name] = hashlib.sha256(text.encode()).hexdigest()[:16]

    def json(self, name, obj):
        self._write(name, dumps(obj))

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([json.dumps(plain(v)) if isinstance(v, (list, dict)) else plain(v) for v in r])
        self._write(name, buf.getvalue())

    def svg(self, name, text):
        self._write(name, text)

    def time(self, label, seconds):
        self.timings[label] = seconds

    def manifest(self, exit_code=0):
        doc = {
            "command": self.command,
            "configHash": self.config.digest(),
            "config": {k: v for k, v in self.config.to_dict().items() if k != "out"},
            "exitCode": exit_code,
            "files": dict(sorted(self.files.items())),
        }
        if not self.golden:
            doc["versions"] = {"minitwistor": __version__, "python": platform.python_version(),
                               "numpy": np.__version__}
            doc["timings"] = {**self.timings, "total": time.perf_counter() - self._t0}
            doc["timestamp"] = self.timestamp()
        else:
            doc["versions"] = {"minitwistor": __version__}
        self._write("manifest.json", dumps(doc))
        return doc
