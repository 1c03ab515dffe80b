"""Run configuration for the command line front end.

A config is a JSON object; every key is optional and falls back to the
dataclass defaults below. Command-line flags override file values.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass

from .curvature import CurvatureJet, flat_jet, jet_from_json, synthetic_jet
from .errors import PreconditionError

COMMANDS = ("constants", "identity-check", "quotient", "sweep-eps", "sweep-d",
            "correct", "solve", "conformal")
CURVATURE_COMMANDS = ("quotient", "sweep-eps", "sweep-d", "correct")
OUTDIR_ENV = "YAMABE_LAB_OUTDIR"


@dataclass
class JetSource:
    kind: str = "synthetic"  # synthetic | file | flat
    path: str | None = None
    seed: int | None = 0
    scalar0: float = -1.0
    weyl_scale: float = 0.02

    def build(self, n: int) -> CurvatureJet:
        if self.kind == "flat":
            return flat_jet(n)
        if self.kind == "file":
            if not self.path:
                raise PreconditionError("jet file path missing")
            with open(self.path) as fh:
                jet = jet_from_json(fh.read())
            if jet.n != n:
                raise PreconditionError(f"jet file has n = {jet.n}, config asks for n = {n}")
            return jet
        if self.kind == "synthetic":
            if self.seed is None:
                raise PreconditionError("synthetic jets need a seed")
            return synthetic_jet(n, int(self.seed), self.scalar0, self.weyl_scale)
        raise PreconditionError(f"unknown jet source {self.kind!r}")


@dataclass
class NumericConfig:
    intervals: int = 4000
    h: float = 1e-3
    radius: float = 3.0
    newton_tol: float = 5e-9
    max_intervals: int = 2**21
    grid_shape: int = 32
    workers: int = 1


@dataclass
class SweepConfig:
    n_values: list[int] = field(default_factory=lambda: list(range(4, 11)))
    eps: float = 1e-4
    eps_list: list[float] = field(default_factory=lambda: [1e-5, 2e-5, 5e-5, 1e-4, 2e-4, 5e-4])
    d: float = 0.2
    d_list: list[float] = field(default_factory=lambda: [0.02, 0.04, 0.08, 0.2])
    beta: float = 0.1
    gamma: float | None = None
    alpha: float = 2.0
    lam: float = 1.0
    C: float = 2.0
    bump_radius: float = 0.05
    side: float = 1.0
    convention: str = "geometric"


@dataclass
class OutputConfig:
    directory: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])

    def resolved(self) -> str:
        return self.directory or os.environ.get(OUTDIR_ENV) or "results"


@dataclass
class RunConfig:
    command: str
    n: int = 5
    jet: JetSource = field(default_factory=JetSource)
    numeric: NumericConfig = field(default_factory=NumericConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}")
        if self.command in CURVATURE_COMMANDS and self.n < 4:
            raise PreconditionError(f"{self.command} needs n >= 4 (Weyl hypothesis), got n = {self.n}")
        if self.n < 3:
            raise PreconditionError("dimension must be at least 3")
        num = self.numeric
        for name in ("h", "radius", "newton_tol"):
            if not getattr(num, name) > 0:
                raise PreconditionError(f"numeric.{name} must be positive")
        if num.intervals < 2 or num.grid_shape < 4 or num.workers < 1:
            raise PreconditionError("numeric grid sizes and worker count must be positive")
        if self.jet.kind == "synthetic" and self.jet.seed is None:
            raise PreconditionError("synthetic jets need a seed")
        bad = set(self.output.formats) - {"csv", "json"}
        if bad:
            raise PreconditionError(f"unknown output formats {sorted(bad)}")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("output")  # where results go does not change them
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _merge(cls, data: dict):
    known = {f.name: f for f in fields(cls)}
    extra = set(data) - set(known)
    if extra:
        raise PreconditionError(f"unknown keys for {cls.__name__}: {sorted(extra)}")
    kw = {}
    for name, value in data.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else None
        if is_dataclass(default) and isinstance(value, dict):
            kw[name] = _merge(type(default), value)
        else:
            kw[name] = value
    return cls(**kw)


def config_from_dict(d: dict) -> RunConfig:
    if "command" not in d:
        raise PreconditionError("config needs a command")
    return _merge(RunConfig, d).validate()


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from exc
