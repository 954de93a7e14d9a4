"""Off-diagonal (polarization) dynamics of the k-photon Jaynes-Cummings model.

Interaction picture Hamiltonian::

    H_I(t) = g exp(-i delta t) Q + g* exp(i delta t) Q^dag,   delta = k*omega - omega0

with the field held in the Fock state |m>.  Two second-order descriptions of
``d rho01/dt`` live here:

* the standard coefficient model :func:`coefficients`
  ``d rho01/dt = c1 rho01 - c2 rho10`` with real ``c2``; everything in
  :func:`evolve_offdiag`, :func:`evolve_uv` and the zero-detuning closed form
  uses it by default;
* the brute-force reference :func:`oracle_integrand`, which forms the double
  commutator with explicit Fock matrices and traces the field out.

The two disagree in the ``rho10`` coupling.  ``Q rho Q^dag`` and
``Q^dag rho Q`` are diagonal in the atomic basis, so the trace has no
``(0,1)`` element proportional to ``rho10`` for k >= 1; for k = 0 the
``Q rho Q`` product survives (``<m|(a^dag)^0|m> = 1``) and couples to
``rho10`` with phase ``g^2 exp(-i delta (t+t'))``.  :func:`operator_assembly`
and :func:`exact_coefficients` give the version consistent with the
oracle; :func:`closed_form_integrand_01` is the integrand behind
:func:`coefficients`.

Atomic labels: ``sigma_z|1> = +|1>``, ``sigma_z|0> = -|0>``.  In spin-field
matrices the sigma_z = +1 block comes first, so atomic index 1 is block 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import check_grid, phase_integral, rk4_integrate
from .susy_fock import build_generators, falling_moment, rising_moment

# |u| (or any state component) beyond which trajectories are refused
GROWTH_LIMIT = 1e12

C1_MODES = ("full", "real")
MODELS = ("standard", "exact")


@dataclass(frozen=True)
class JcmParams:
    g: complex
    k: int
    m: int
    omega0: float
    omega: float
    delta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "g", complex(self.g))
        if int(self.k) != self.k or self.k < 0:
            raise ValueError(f"k must be a non-negative integer, got {self.k!r}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "m", int(self.m))
        for name in ("omega0", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "delta", self.k * self.omega - self.omega0)

    @classmethod
    def with_detuning(cls, g: complex, k: int, m: int, delta: float, omega: float = 1.0) -> "JcmParams":
        """Pick ``omega0 = k*omega - delta`` so the stored detuning is ``delta``."""
        return cls(g, k, m, k * omega - delta, omega)

    @property
    def g2(self) -> float:
        return (self.g * self.g.conjugate()).real

    @property
    def rising(self) -> float:
        return rising_moment(self.m, self.k)

    @property
    def falling(self) -> float:
        return falling_moment(self.m, self.k)


@dataclass(frozen=True)
class CoefficientPair:
    c1: complex
    c2: float


@dataclass(frozen=True)
class PolarizationState:
    u: float
    v: float

    @classmethod
    def from_offdiag(cls, rho01: complex, rho10: complex) -> "PolarizationState":
        u = rho01 + rho10
        v = 1j * (rho01 - rho10)
        return cls(u.real, v.real)

    def to_offdiag(self) -> tuple[complex, complex]:
        return complex(self.u, -self.v) / 2, complex(self.u, self.v) / 2


@dataclass(frozen=True)
class Exponents:
    lambda_u: float
    lambda_v: float


@dataclass(frozen=True)
class OffDiagTrajectory:
    grid: np.ndarray
    rho01: np.ndarray
    rho10: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.rho01 + self.rho10

    @property
    def v(self) -> np.ndarray:
        return 1j * (self.rho01 - self.rho10)


@dataclass(frozen=True)
class UVTrajectory:
    grid: np.ndarray
    u: np.ndarray
    v: np.ndarray


# -- coefficients ------------------------------------------------------------


def coefficients(p: JcmParams, t: float, c1_mode: str = "full") -> CoefficientPair:
    """``c1(t)`` and ``c2(t)`` of ``d rho01/dt = c1 rho01 - c2 rho10``.

    ``c1 = -|g|^2 [R + F] (1 - e^{-i delta t})/(i delta)`` and
    ``c2 = -|g|^2 R * 2 sin(delta t)/delta`` with ``R = (m+k)!/m!`` and
    ``F = m!/(m-k)!``.  ``c1_mode="real"`` drops the imaginary part of c1.
    """
    if c1_mode not in C1_MODES:
        raise ValueError(f"c1_mode must be one of {C1_MODES}, got {c1_mode!r}")
    phi = phase_integral(p.delta, t)
    c1 = -p.g2 * (p.rising + p.falling) * phi
    if c1_mode == "real":
        c1 = complex(c1.real, 0.0)
    # the two conjugate brackets add up to 2 Re(phi) = 2 sin(delta t)/delta
    c2 = -p.g2 * p.rising * 2.0 * phi.real
    return CoefficientPair(c1, c2)


def exact_coefficients(p: JcmParams, t: float) -> tuple[complex, complex]:
    """``(c1, c2)`` consistent with the brute-force trace; ``c2`` is complex.

    ``c1`` matches :func:`coefficients`.  ``c2`` vanishes for k >= 1 and is
    ``-2 g^2 e^{-i delta t} (1 - e^{-i delta t})/(i delta)`` for k = 0.
    """
    c1 = coefficients(p, t).c1
    if p.k != 0:
        return c1, 0j
    return c1, -2.0 * p.g * p.g * cmath.exp(-1j * p.delta * t) * phase_integral(p.delta, t)


def lambda_exponents(p: JcmParams) -> Exponents:
    """Gaussian growth/decay rates of u and v at zero detuning."""
    r, f = p.rising, p.falling
    return Exponents(lambda_u=-p.g2 * (f - r), lambda_v=-p.g2 * (f + 3.0 * r))


def closed_form_zero_detuning(p: JcmParams, u0: float, v0: float, t: float) -> PolarizationState:
    """``u0 exp(lambda_u t^2/2)``, ``v0 exp(lambda_v t^2/2)``; only valid at delta = 0."""
    if p.delta != 0:
        raise ValueError(f"closed form needs zero detuning, got delta={p.delta!r}")
    lam = lambda_exponents(p)
    return PolarizationState(u0 * math.exp(0.5 * lam.lambda_u * t * t), v0 * math.exp(0.5 * lam.lambda_v * t * t))


# -- brute-force oracle ------------------------------------------------------


def _to_block(rho_q) -> np.ndarray:
    # atomic (0=-, 1=+) -> block order (+, -)
    r = np.asarray(rho_q, dtype=complex)
    if r.shape != (2, 2):
        raise ValueError("atomic density matrix must be 2x2")
    return r[::-1, ::-1]


def _from_block(r: np.ndarray) -> np.ndarray:
    return r[::-1, ::-1].copy()


@lru_cache(maxsize=64)
def _oracle_matrices(dim: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    gen = build_generators(dim, k)
    return gen.q.data, gen.q_dagger.data


def _oracle_setup(p: JcmParams, rho_q, dim: int | None):
    if dim is None:
        dim = p.m + p.k + 4
    if dim < p.m + p.k + 2:
        raise ValueError(f"Fock dimension {dim} too small for m={p.m}, k={p.k} (need >= {p.m + p.k + 2})")
    q, qd = _oracle_matrices(dim, p.k)
    proj = np.zeros((dim, dim), dtype=complex)
    proj[p.m, p.m] = 1.0
    x = np.kron(_to_block(rho_q), proj)
    return dim, q, qd, x


def _trace_field(op: np.ndarray, dim: int) -> np.ndarray:
    return _from_block(np.trace(op.reshape(2, dim, 2, dim), axis1=1, axis2=3))


def _hamiltonian(p: JcmParams, q, qd, t):
    return p.g * cmath.exp(-1j * p.delta * t) * q + p.g.conjugate() * cmath.exp(1j * p.delta * t) * qd


def oracle_integrand(p: JcmParams, rho_q, t: float, t_prime: float, dim: int | None = None) -> np.ndarray:
    """``Tr_field [H_I(t), [H_I(t'), rho_q (x) |m><m|]]`` from explicit matrices.

    Returns the 2x2 atomic matrix in atomic labels.  ``dim`` defaults to
    ``m + k + 4``.
    """
    dim, q, qd, x = _oracle_setup(p, rho_q, dim)
    h = _hamiltonian(p, q, qd, t)
    hp = _hamiltonian(p, q, qd, t_prime)
    inner = hp @ x - x @ hp
    return _trace_field(h @ inner - inner @ h, dim)


def oracle_terms(p: JcmParams, rho_q, t: float, t_prime: float, dim: int | None = None) -> dict[str, np.ndarray]:
    """The double commutator split into ``T1``, ``T2``, ``T3`` with explicit matrices.

    ``T1`` collects ``H H' X + X H' H``; ``T2`` the ``Q X Q`` and
    ``Q^dag X Q^dag`` parts of ``-(H X H' + H' X H)``; ``T3`` the rest.
    """
    dim, q, qd, x = _oracle_setup(p, rho_q, dim)
    h = _hamiltonian(p, q, qd, t)
    hp = _hamiltonian(p, q, qd, t_prime)
    g, gc, d = p.g, p.g.conjugate(), p.delta
    t1 = _trace_field(h @ hp @ x + x @ hp @ h, dim)
    cross = _trace_field(-(h @ x @ hp + hp @ x @ h), dim)
    t2 = _trace_field(
        -2.0 * (g * g * cmath.exp(-1j * d * (t + t_prime)) * (q @ x @ q)
                + gc * gc * cmath.exp(1j * d * (t + t_prime)) * (qd @ x @ qd)),
        dim,
    )
    return {"T1": t1, "T2": t2, "T3": cross - t2}


# -- analytic assemblies -----------------------------------------------------

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1| in atomic labels
_SIGMA_PLUS = _SIGMA_MINUS.T.copy()


def operator_assembly(p: JcmParams, rho_q, t: float, t_prime: float) -> dict[str, np.ndarray]:
    """``T1``, ``T2``, ``T3`` as 2x2 atomic matrices from reservoir moments alone.

    Uses ``<m|a^k (a^dag)^k|m> = R``, ``<m|(a^dag)^k a^k|m> = F`` and
    ``<m|(a^dag)^{2k}|m> = <m|a^{2k}|m> = [k == 0]``; no Fock matrices.
    """
    rho = np.asarray(rho_q, dtype=complex)
    sm, sp = _SIGMA_MINUS, _SIGMA_PLUS
    g, gc, d = p.g, p.g.conjugate(), p.delta
    gg = p.g2
    r, f = p.rising, p.falling
    e_fwd = cmath.exp(1j * d * (t_prime - t))
    e_bwd = cmath.exp(-1j * d * (t_prime - t))
    t1 = gg * (e_fwd * f * sm @ sp + e_bwd * r * sp @ sm) @ rho + gg * rho @ (
        e_bwd * f * sm @ sp + e_fwd * r * sp @ sm
    )
    same = 1.0 if p.k == 0 else 0.0
    t2 = -2.0 * same * (
        g * g * cmath.exp(-1j * d * (t + t_prime)) * sm @ rho @ sm
        + gc * gc * cmath.exp(1j * d * (t + t_prime)) * sp @ rho @ sp
    )
    t3 = -gg * (e_fwd + e_bwd) * (r * sm @ rho @ sp + f * sp @ rho @ sm)
    return {"T1": t1, "T2": t2, "T3": t3}


def closed_form_integrand_01(p: JcmParams, rho_q, t: float, t_prime: float) -> dict[str, complex]:
    """Per-term ``(0,1)`` elements whose ``t'`` integral gives :func:`coefficients`.

    ``T1 = |g|^2 e^{i delta (t'-t)} (R + F) rho01``, ``T2 = 0`` and
    ``T3 = -|g|^2 (e^{i delta (t'-t)} + e^{-i delta (t'-t)}) R rho10``.
    The T3 value and, at k = 0, the T2 value differ from the trace computed
    by :func:`oracle_integrand` when ``rho10 != 0``.
    """
    rho = np.asarray(rho_q, dtype=complex)
    gg, r, f, d = p.g2, p.rising, p.falling, p.delta
    t1 = gg * cmath.exp(1j * d * (t_prime - t)) * (r + f) * rho[0, 1]
    t3 = -gg * 2.0 * math.cos(d * (t_prime - t)) * r * rho[1, 0]
    return {"T1": t1, "T2": 0j, "T3": t3}


# -- evolution ---------------------------------------------------------------


def evolve_offdiag(
    p: JcmParams,
    rho01_0: complex,
    rho10_0: complex,
    grid,
    c1_mode: str = "full",
    model: str = "standard",
    bound: float = GROWTH_LIMIT,
) -> OffDiagTrajectory:
    """RK4 for ``d rho01/dt = c1 rho01 - c2 rho10`` and ``d rho10/dt = c1* rho10 - c2* rho01``.

    ``model="exact"`` takes the coefficients from :func:`exact_coefficients`.
    Raises :class:`~susyjcm.numerics.IntegrationError` once a component
    exceeds ``bound``.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    t = check_grid(grid)
    if model == "exact" and c1_mode != "full":
        raise ValueError("the exact model only supports c1_mode='full'")

    def rhs(ti, y):
        if model == "standard":
            c = coefficients(p, ti, c1_mode)
            c1, c2 = c.c1, complex(c.c2)
        else:
            c1, c2 = exact_coefficients(p, ti)
        return np.array([c1 * y[0] - c2 * y[1], c1.conjugate() * y[1] - c2.conjugate() * y[0]])

    y = rk4_integrate(rhs, [rho01_0, rho10_0], t, bound=bound)
    return OffDiagTrajectory(t, y[:, 0], y[:, 1])


def evolve_uv(
    p: JcmParams,
    u0: float,
    v0: float,
    grid,
    c1_mode: str = "full",
    bound: float = GROWTH_LIMIT,
) -> UVTrajectory:
    """RK4 for the real polarization pair.

    ``du/dt = (Re c1 - c2) u + Im c1 v``,
    ``dv/dt = (Re c1 + c2) v - Im c1 u``.
    """
    t = check_grid(grid)

    def rhs(ti, y):
        c = coefficients(p, ti, c1_mode)
        a, b = c.c1.real, c.c1.imag
        return np.array([(a - c.c2) * y[0] + b * y[1], (a + c.c2) * y[1] - b * y[0]])

    y = rk4_integrate(rhs, [u0, v0], t, bound=bound).real
    return UVTrajectory(t, y[:, 0], y[:, 1])
