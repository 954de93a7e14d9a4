"""Discrete thermal reservoir: occupations, kernel terms and induced dephasing rate.

Units are hbar = k_B = 1 throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .numerics import phase_integral


@dataclass(frozen=True)
class ReservoirMode:
    omega: float
    g: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"mode frequency must be > 0, got {self.omega!r}")
        if not math.isfinite(self.g):
            raise ValueError(f"mode coupling must be finite, got {self.g!r}")


@dataclass(frozen=True)
class ReservoirSpec:
    modes: tuple[ReservoirMode, ...]
    temperature: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise ValueError(f"temperature must be >= 0, got {self.temperature!r}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], temperature: float = 0.0) -> "ReservoirSpec":
        """Build from ``[(omega, g), ...]``."""
        return cls(tuple(ReservoirMode(w, g) for w, g in pairs), temperature)

    def occupations(self) -> list[float]:
        return [bose_occupation(m.omega, self.temperature) for m in self.modes]


@dataclass(frozen=True)
class KernelTerms:
    a1: complex
    a2: complex
    a3: complex
    a4: complex
    total: complex


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal photon number ``1/(exp(omega/T) - 1)``; exactly 0 at T = 0."""
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega!r}")
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature!r}")
    if temperature == 0:
        return 0.0
    x = omega / temperature
    if x > 700.0:
        # expm1 overflows; exp(-x) is the same number to double precision
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def _check_modes(spec: ReservoirSpec):
    if not spec.modes:
        raise ValueError("reservoir has no modes")


def kernel_terms(spec: ReservoirSpec, t: float) -> KernelTerms:
    """The four complex reservoir correlation integrals at time ``t`` and their sum.

    ``a1`` and ``a4`` carry ``(1 - e^{-iwt})/(iw)``, ``a2`` and ``a3`` its
    conjugate, weighted by ``g^2 (n+1)`` (a1, a3) and ``g^2 n`` (a2, a4).
    """
    _check_modes(spec)
    a1 = a2 = a3 = a4 = 0j
    for mode in spec.modes:
        n = bose_occupation(mode.omega, spec.temperature)
        g2 = mode.g * mode.g
        forward = phase_integral(mode.omega, t)
        backward = forward.conjugate()
        a1 += g2 * (n + 1.0) * forward
        a2 += g2 * n * backward
        a3 += g2 * (n + 1.0) * backward
        a4 += g2 * n * forward
    return KernelTerms(a1, a2, a3, a4, a1 + a2 + a3 + a4)


def reservoir_rate(spec: ReservoirSpec, t: float) -> float:
    """``sum_k 2 g_k^2 (2 n_k + 1) sin(w_k t) / w_k``."""
    _check_modes(spec)
    total = 0.0
    for mode in spec.modes:
        n = bose_occupation(mode.omega, spec.temperature)
        total += 2.0 * mode.g * mode.g * (2.0 * n + 1.0) * math.sin(mode.omega * t) / mode.omega
    return total


def reservoir_rate_derivative(spec: ReservoirSpec, t: float) -> float:
    """Time derivative of :func:`reservoir_rate`."""
    _check_modes(spec)
    total = 0.0
    for mode in spec.modes:
        n = bose_occupation(mode.omega, spec.temperature)
        total += 2.0 * mode.g * mode.g * (2.0 * n + 1.0) * math.cos(mode.omega * t)
    return total
