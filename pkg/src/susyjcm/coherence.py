"""Coherence of a driven two-level atom coupled to a thermal reservoir.

The off-diagonal density-matrix elements decay with the real rate

    Gamma(t) = 2 * [ sin(w0 t)/w0 * d^2/4 * |E(t)|^2 + R(t) ]

where ``R`` is :func:`susyjcm.reservoir.reservoir_rate`.  Choosing the
driving envelope so that the bracket vanishes freezes the coherence;
:func:`null_field` solves for that envelope and reports where it cannot be
realised.

Atomic labels: ``sigma_z |1> = +|1>``.  The rate is symmetric in the
off-diagonal pair, so the labelling does not change any result here.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import check_grid, cumulative_trapezoid, rk4_integrate
from .reservoir import ReservoirSpec, reservoir_rate, reservoir_rate_derivative

DEFAULT_SIN_THRESHOLD = 1e-6


@dataclass(frozen=True)
class DrivenAtomParams:
    omega0: float
    dipole_d: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError(f"omega0 must be > 0, got {self.omega0!r}")
        if not (math.isfinite(self.dipole_d) and self.dipole_d > 0):
            raise ValueError(f"dipole_d must be > 0, got {self.dipole_d!r}")


class Feasibility(str, enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE_NEGATIVE = "INFEASIBLE_NEGATIVE"
    SINGULAR = "SINGULAR"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class Envelope:
    """Sampled ``|E(t)|^2``, linearly interpolated between samples.

    ``status`` is optional; :func:`null_field` fills it with one
    :class:`Feasibility` per sample.
    """

    grid: np.ndarray
    values: np.ndarray
    status: tuple[Feasibility, ...] | None = None

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = np.asarray(self.values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("envelope values and grid lengths differ")
        if self.status is not None:
            status = tuple(Feasibility(s) for s in self.status)
            if len(status) != grid.size:
                raise ValueError("envelope status and grid lengths differ")
            for s, v in zip(status, values):
                if s is Feasibility.FEASIBLE and not v >= 0:
                    raise ValueError("a FEASIBLE sample must carry |E|^2 >= 0")
            object.__setattr__(self, "status", status)
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid) -> "Envelope":
        g = check_grid(grid)
        return cls(g, np.zeros_like(g))

    def __call__(self, t: float) -> float:
        if t < self.grid[0] or t > self.grid[-1]:
            raise ValueError(f"t={t!r} outside envelope range [{self.grid[0]!r}, {self.grid[-1]!r}]")
        i = int(np.searchsorted(self.grid, t, side="right")) - 1
        if i >= self.grid.size - 1:
            return float(self.values[-1])
        t0, t1 = self.grid[i], self.grid[i + 1]
        if t == t0:
            return float(self.values[i])
        w = (t - t0) / (t1 - t0)
        return float((1.0 - w) * self.values[i] + w * self.values[i + 1])

    def restrict(self, lo: int, hi: int) -> "Envelope":
        """Samples ``lo..hi`` inclusive."""
        status = None if self.status is None else self.status[lo : hi + 1]
        return Envelope(self.grid[lo : hi + 1].copy(), self.values[lo : hi + 1].copy(), status)


@dataclass(frozen=True)
class FeasibilityReport:
    grid: np.ndarray
    status: tuple[Feasibility, ...]

    def counts(self) -> dict[str, int]:
        out = {f.value: 0 for f in Feasibility}
        for s in self.status:
            out[s.value] += 1
        return out

    def windows(self, kind: Feasibility = Feasibility.FEASIBLE) -> list[tuple[int, int]]:
        """Maximal runs of consecutive samples with status ``kind``, as inclusive index pairs."""
        runs = []
        start = None
        for i, s in enumerate(self.status):
            if s is kind and start is None:
                start = i
            elif s is not kind and start is not None:
                runs.append((start, i - 1))
                start = None
        if start is not None:
            runs.append((start, len(self.status) - 1))
        return runs

    def to_dict(self) -> dict:
        return {
            "samples": len(self.status),
            "counts": self.counts(),
            "feasible_windows": [
                {"start_index": a, "stop_index": b, "t_start": float(self.grid[a]), "t_stop": float(self.grid[b])}
                for a, b in self.windows()
            ],
        }


@dataclass(frozen=True)
class OffDiagState:
    rho01: complex
    rho10: complex

    @classmethod
    def hermitian(cls, rho01: complex) -> "OffDiagState":
        return cls(complex(rho01), complex(rho01).conjugate())


@dataclass(frozen=True)
class CoherenceTrajectory:
    """Off-diagonal elements on ``grid``.

    ``rho01``/``rho10`` come from exact exponentiation of the trapezoid
    integral of the rate; ``rk4_rho01``/``rk4_rho10`` are an independent
    RK4 solution kept for cross-checking.
    """

    grid: np.ndarray
    gamma: np.ndarray
    rho01: np.ndarray
    rho10: np.ndarray
    rk4_rho01: np.ndarray = field(repr=False)
    rk4_rho10: np.ndarray = field(repr=False)

    def states(self) -> list[OffDiagState]:
        return [OffDiagState(complex(a), complex(b)) for a, b in zip(self.rho01, self.rho10)]


def field_rate(atom: DrivenAtomParams, envelope_sq: float, t: float) -> float:
    """Driving-field part of the bracket: ``sin(w0 t)/w0 * d^2/4 * |E|^2``."""
    return math.sin(atom.omega0 * t) / atom.omega0 * (atom.dipole_d**2 / 4.0) * envelope_sq


def total_rate(atom: DrivenAtomParams, env: Envelope, bath: ReservoirSpec, t: float) -> float:
    """Decay rate ``Gamma(t)`` of both off-diagonal elements."""
    return 2.0 * (field_rate(atom, env(t), t) + reservoir_rate(bath, t))


def _rate_scale(bath: ReservoirSpec) -> float:
    # largest value |reservoir_rate| can take
    occ = bath.occupations()
    return sum(2.0 * m.g * m.g * (2.0 * n + 1.0) / m.omega for m, n in zip(bath.modes, occ))


def null_field(
    atom: DrivenAtomParams,
    bath: ReservoirSpec,
    grid,
    sin_threshold: float = DEFAULT_SIN_THRESHOLD,
) -> tuple[Envelope, FeasibilityReport]:
    """Envelope ``|E(t)|^2`` that cancels the reservoir rate sample by sample.

    Where ``|sin(w0 t)| >= sin_threshold`` the value is
    ``-(4/d^2) * (w0/sin(w0 t)) * R(t)`` and is stored whatever its sign;
    negative values are flagged INFEASIBLE_NEGATIVE, never clamped.

    Near zeros of ``sin(w0 t)``:

    * SINGULAR when ``R(t)`` is not small (relative to its amplitude);
      the required field is unbounded and the stored value is NaN.
    * INDETERMINATE when both factors are small; the stored value is the
      l'Hopital limit ``-(4/d^2) * R'(t) / cos(w0 t)``.
    """
    if not sin_threshold > 0:
        raise ValueError("sin_threshold must be > 0")
    t = check_grid(grid)
    scale = _rate_scale(bath)
    pref = 4.0 / atom.dipole_d**2
    values = np.empty_like(t)
    status = []
    for i, ti in enumerate(t):
        s = math.sin(atom.omega0 * ti)
        r = reservoir_rate(bath, ti)
        if abs(s) >= sin_threshold:
            v = -pref * (atom.omega0 / s) * r + 0.0
            values[i] = v
            status.append(Feasibility.FEASIBLE if v >= 0 else Feasibility.INFEASIBLE_NEGATIVE)
        elif abs(r) <= sin_threshold * scale:
            values[i] = -pref * reservoir_rate_derivative(bath, ti) / math.cos(atom.omega0 * ti) + 0.0
            status.append(Feasibility.INDETERMINATE)
        else:
            values[i] = np.nan
            status.append(Feasibility.SINGULAR)
    status = tuple(status)
    return Envelope(t, values, status), FeasibilityReport(t, status)


def evolve_offdiag(
    atom: DrivenAtomParams,
    env: Envelope,
    bath: ReservoirSpec,
    rho0: OffDiagState,
    grid,
) -> CoherenceTrajectory:
    """Solve ``d rho/dt = -Gamma(t) rho`` for both off-diagonal elements.

    ``grid`` must start at the envelope's first sample and stay within its
    range.
    """
    t = check_grid(grid)
    if t[0] != env.grid[0]:
        raise ValueError("evolution grid must start at the envelope grid start")
    if t[-1] > env.grid[-1]:
        raise ValueError("evolution grid runs past the envelope grid")
    gamma = np.array([total_rate(atom, env, bath, ti) for ti in t])
    bad = np.flatnonzero(~np.isfinite(gamma))
    if bad.size:
        raise ValueError(f"rate undefined at t={t[bad[0]]!r} (singular envelope sample)")

    decay = np.exp(-cumulative_trapezoid(gamma, t))
    y0 = np.array([rho0.rho01, rho0.rho10], dtype=complex)

    def rhs(ti, y):
        return -total_rate(atom, env, bath, ti) * y

    rk = rk4_integrate(rhs, y0, t)
    return CoherenceTrajectory(
        grid=t,
        gamma=gamma,
        rho01=y0[0] * decay,
        rho10=y0[1] * decay,
        rk4_rho01=rk[:, 0],
        rk4_rho10=rk[:, 1],
    )
