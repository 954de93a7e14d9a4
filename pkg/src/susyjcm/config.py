"""Strict JSON run configuration."""
from __future__ import annotations

import json
import math
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

MODES = ("rate", "null-field", "evolve-coherence", "susy-check", "evolve-polarization", "sweep")

Mode = Literal["rate", "null-field", "evolve-coherence", "susy-check", "evolve-polarization", "sweep"]
ComplexIn = Union[float, tuple[float, float]]


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration documents."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModeConfig(_Strict):
    omega: float = Field(gt=0)
    g: float


class ReservoirConfig(_Strict):
    modes: list[ModeConfig] = Field(min_length=1)
    temperature: float = Field(default=0.0, ge=0)


class AtomConfig(_Strict):
    omega0: float = Field(gt=0)
    dipole_d: float = Field(gt=0)


class JcmConfig(_Strict):
    g: Optional[ComplexIn] = None
    k: int = Field(ge=0)
    m: Optional[int] = Field(default=None, ge=0)
    omega0: Optional[float] = None
    omega: Optional[float] = None
    delta: Optional[float] = None
    c1_mode: Literal["full", "real"] = "full"
    model: Literal["standard", "exact"] = "standard"

    @model_validator(mode="after")
    def _resolve_detuning(self):
        if self.delta is None:
            if (self.omega0 is None) != (self.omega is None):
                raise ValueError("give both omega0 and omega, or delta")
            return self
        omega = 1.0 if self.omega is None else self.omega
        omega0 = self.k * omega - self.delta
        if self.omega0 is not None:
            if abs(self.omega0 - omega0) > 1e-12 * max(1.0, abs(omega0)):
                raise ValueError("delta must equal k*omega - omega0")
            omega0 = self.omega0
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega0", omega0)
        return self

    def complex_g(self) -> complex:
        if isinstance(self.g, tuple):
            return complex(*self.g)
        return complex(self.g)


class GridConfig(_Strict):
    start: float = 0.0
    stop: float
    step: Optional[float] = Field(default=None, gt=0)


class NumericConfig(_Strict):
    step: float = Field(default=1e-4, gt=0)
    sin_threshold: float = Field(default=1e-6, gt=0)
    fock_dim: int = Field(default=32, ge=2)
    workers: int = Field(default=1, ge=1)


class InitialConfig(_Strict):
    u0: Optional[float] = None
    v0: Optional[float] = None
    rho01: Optional[tuple[float, float]] = None
    rho10: Optional[tuple[float, float]] = None

    @model_validator(mode="after")
    def _one_form(self):
        uv = self.u0 is not None or self.v0 is not None
        rho = self.rho01 is not None or self.rho10 is not None
        if uv and rho:
            raise ValueError("give either u0/v0 or rho01/rho10, not both")
        if not (uv or rho):
            raise ValueError("give u0/v0 or rho01/rho10")
        if self.rho10 is not None and self.rho01 is None:
            raise ValueError("rho10 given without rho01")
        return self

    def offdiag(self) -> tuple[complex, complex]:
        if self.rho01 is not None:
            r01 = complex(*self.rho01)
            r10 = r01.conjugate() if self.rho10 is None else complex(*self.rho10)
            return r01, r10
        u = self.u0 or 0.0
        v = self.v0 or 0.0
        return complex(u, -v) / 2, complex(u, v) / 2


class EnvelopeConfig(_Strict):
    grid: list[float] = Field(min_length=2)
    values: list[float] = Field(min_length=2)


class SweepConfig(_Strict):
    m: Optional[list[int]] = None
    k: Optional[list[int]] = None
    delta: Optional[list[float]] = None


REQUIRED = {
    "rate": ("reservoir", "grid"),
    "null-field": ("reservoir", "atom", "grid"),
    "evolve-coherence": ("reservoir", "atom", "grid", "initial"),
    "susy-check": ("jcm",),
    "evolve-polarization": ("jcm", "grid", "initial"),
    "sweep": ("jcm", "grid", "initial", "sweep"),
}


class RunConfig(_Strict):
    mode: Mode
    reservoir: Optional[ReservoirConfig] = None
    atom: Optional[AtomConfig] = None
    jcm: Optional[JcmConfig] = None
    grid: Optional[GridConfig] = None
    numeric: NumericConfig = NumericConfig()
    initial: Optional[InitialConfig] = None
    envelope: Union[Literal["null", "zero"], EnvelopeConfig] = "null"
    sweep: Optional[SweepConfig] = None

    @model_validator(mode="after")
    def _mode_blocks(self):
        for block in REQUIRED[self.mode]:
            if getattr(self, block) is None:
                raise ValueError(f"mode {self.mode!r} requires the '{block}' block")
        if self.mode in ("evolve-polarization", "sweep"):
            for name in ("g", "m", "omega0"):
                if getattr(self.jcm, name) is None:
                    raise ValueError(f"jcm.{name} is required for mode {self.mode!r}")
            if self.grid.start != 0:
                raise ValueError("grid.start must be 0 for polarization dynamics")
        if self.grid is not None:
            if not self.grid.stop > self.grid.start:
                raise ValueError("grid.stop must be > grid.start")
            if self.output_stride() is None:
                raise ValueError("grid.step must be an integer multiple of numeric.step")
        return self

    def output_stride(self) -> int | None:
        if self.grid is None or self.grid.step is None:
            return 1
        ratio = self.grid.step / self.numeric.step
        n = round(ratio)
        if n < 1 or abs(ratio - n) > 1e-9 * ratio:
            return None
        return int(n)

    def canonical(self) -> str:
        """Config with defaults filled, as compact sorted JSON."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def _describe(err: dict) -> str:
    loc = ".".join(str(x) for x in err["loc"])
    kind = err["type"]
    ctx = err.get("ctx") or {}
    if kind == "extra_forbidden":
        return f"unknown key '{loc}'"
    if kind == "missing":
        return f"{loc} is required"
    if kind == "greater_than":
        return f"{loc} must be > {ctx['gt']:g}"
    if kind == "greater_than_equal":
        return f"{loc} must be >= {ctx['ge']:g}"
    msg = err["msg"]
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    return f"{loc}: {msg}" if loc else msg


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    ``mode`` overrides the document's ``mode`` field.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if mode is not None:
        doc["mode"] = mode
    _reject_nonfinite(doc, "")
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError("; ".join(_describe(e) for e in exc.errors())) from None


def _reject_nonfinite(node, path):
    # json accepts NaN/Infinity literals; the models never want them
    if isinstance(node, float) and not math.isfinite(node):
        raise ConfigError(f"{path or 'value'} must be finite")
    if isinstance(node, dict):
        for key, val in node.items():
            _reject_nonfinite(val, f"{path}.{key}" if path else str(key))
    elif isinstance(node, list):
        for i, val in enumerate(node):
            _reject_nonfinite(val, f"{path}[{i}]")
