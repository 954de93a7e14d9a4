"""Truncated Fock-space matrices and the supersymmetric generators of the k-photon JC model.

Spin-field operators are 2D x 2D and spin-major: the upper-left D x D block
is the sigma_z = +1 sector, the lower-right block sigma_z = -1.

With the truncation at D Fock levels, products of k ladder operators are only
exact on columns whose Fock index n satisfies n <= D-1-k (the "safe
subspace").  Relations are certified there; full-space residuals are reported
so the truncation error stays visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# (m+k)!/m! overflows double precision beyond this
MAX_MOMENT_ORDER = 170


class MomentOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class FockOperator:
    """Dense complex matrix on the field (D x D) or spin-field (2D x 2D) space."""

    dim: int
    data: np.ndarray
    space: str = "field"

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        size = {"field": self.dim, "spin-field": 2 * self.dim}.get(self.space)
        if size is None:
            raise ValueError(f"unknown space {self.space!r}")
        if data.shape != (size, size):
            raise ValueError(f"{self.space} operator with dim={self.dim} needs shape {(size, size)}, got {data.shape}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.dim, self.data.conj().T, self.space)


@dataclass(frozen=True)
class SusyGenerators:
    dim: int
    multiplicity_k: int
    n_op: FockOperator
    n_prime: FockOperator
    q: FockOperator
    q_dagger: FockOperator
    sigma_z: FockOperator

    def safe_indices(self) -> np.ndarray:
        """Spin-field basis indices with Fock index n <= D-1-k, in both spin sectors."""
        n_safe = self.dim - self.multiplicity_k
        fock = np.arange(n_safe)
        return np.concatenate([fock, fock + self.dim])


@dataclass(frozen=True)
class RelationResidual:
    safe_residual: float
    full_residual: float
    scale: float

    @property
    def safe_relative(self) -> float:
        return self.safe_residual / self.scale

    @property
    def full_relative(self) -> float:
        return self.full_residual / self.scale


@dataclass(frozen=True)
class AlgebraReport:
    dim: int
    multiplicity_k: int
    relations: dict[str, RelationResidual]

    def max_safe_relative(self) -> float:
        return max(r.safe_relative for r in self.relations.values())

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k": self.multiplicity_k,
            "relations": {
                name: {
                    "safe_residual": r.safe_residual,
                    "full_residual": r.full_residual,
                    "scale": r.scale,
                }
                for name, r in self.relations.items()
            },
        }


def ladder_ops(dim: int) -> tuple[FockOperator, FockOperator]:
    """Truncated annihilation and creation operators, ``<n-1|a|n> = sqrt(n)``."""
    if dim < 2:
        raise ValueError(f"Fock dimension must be >= 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    return FockOperator(dim, a), FockOperator(dim, a.T)


def rising_moment(m: int, k: int) -> float:
    """``<m| a^k (a^dag)^k |m> = (m+k)!/m!``."""
    _check_moment_args(m, k)
    return float(math.prod(range(m + 1, m + k + 1)))


def falling_moment(m: int, k: int) -> float:
    """``<m| (a^dag)^k a^k |m> = m!/(m-k)!``, zero when k > m."""
    _check_moment_args(m, k)
    if k > m:
        return 0.0
    return float(math.prod(range(m - k + 1, m + 1)))


def _check_moment_args(m: int, k: int):
    if m < 0 or k < 0:
        raise ValueError(f"moments need m, k >= 0, got m={m}, k={k}")
    if m + k > MAX_MOMENT_ORDER:
        raise MomentOverflowError(f"m+k={m + k} exceeds {MAX_MOMENT_ORDER}; factorial ratio overflows")


def spin_ops(dim: int) -> dict[str, np.ndarray]:
    """sigma_z, sigma_+ and sigma_- embedded as 2D x 2D block matrices."""
    eye = np.eye(dim, dtype=complex)
    zero = np.zeros((dim, dim), dtype=complex)
    return {
        "sigma_z": np.block([[eye, zero], [zero, -eye]]),
        "sigma_plus": np.block([[zero, eye], [zero, zero]]),
        "sigma_minus": np.block([[zero, zero], [eye, zero]]),
    }


def build_generators(dim: int, k: int) -> SusyGenerators:
    """N, N', Q and Q^dag for the k-photon model on D Fock levels.

    N' is filled from the exact moments, so it is not the truncated product
    of ladder matrices; this is what makes boundary errors of {Q^dag, Q}
    show up in the full-space residual.
    """
    if k < 0:
        raise ValueError(f"multiplicity k must be >= 0, got {k}")
    if dim < k + 2:
        raise ValueError(f"Fock dimension {dim} too small for k={k} (need >= {k + 2})")
    _, ad = ladder_ops(dim)
    adk = np.linalg.matrix_power(ad.data, k)
    zero = np.zeros((dim, dim), dtype=complex)
    spins = spin_ops(dim)
    sz = spins["sigma_z"]

    number = np.diag(np.arange(dim, dtype=float)).astype(complex)
    n_op = np.kron(np.eye(2), number) + 0.5 * (k - 1) * sz + 0.5 * np.eye(2 * dim)
    n_prime = np.diag(
        [rising_moment(n, k) for n in range(dim)] + [falling_moment(n, k) for n in range(dim)]
    ).astype(complex)
    q = np.block([[zero, zero], [adk, zero]])
    # adjoint taken exactly rather than from a separately rounded a^k
    q_dag = q.conj().T

    def op(x):
        return FockOperator(dim, x, "spin-field")

    return SusyGenerators(dim, k, op(n_op), op(n_prime), op(q), op(q_dag), op(sz))


def _comm(x, y):
    return x @ y - y @ x


def _anti(x, y):
    return x @ y + y @ x


def algebra_relations(gen: SusyGenerators) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Left- and right-hand sides of the eleven graded-algebra relations."""
    n, npr, q, qd, sz = (x.data for x in (gen.n_op, gen.n_prime, gen.q, gen.q_dagger, gen.sigma_z))
    zero = np.zeros_like(q)
    diff = qd - q
    return {
        "Q^2 = 0": (q @ q, zero),
        "(Q^dag)^2 = 0": (qd @ qd, zero),
        "[Q^dag, Q] = N' sigma_z": (_comm(qd, q), npr @ sz),
        "[N, N'] = 0": (_comm(n, npr), zero),
        "[N, Q] = Q": (_comm(n, q), q),
        "[N, Q^dag] = -Q^dag": (_comm(n, qd), -qd),
        "{Q^dag, Q} = N'": (_anti(qd, q), npr),
        # both anticommutators with sigma_z stacked side by side
        "{Q, sigma_z} = {Q^dag, sigma_z} = 0": (
            np.hstack([_anti(q, sz), _anti(qd, sz)]),
            np.hstack([zero, zero]),
        ),
        "[Q, sigma_z] = 2Q": (_comm(q, sz), 2 * q),
        "[Q^dag, sigma_z] = -2Q^dag": (_comm(qd, sz), -2 * qd),
        "(Q^dag - Q)^2 = -N'": (diff @ diff, -npr),
    }


def verify_algebra(gen: SusyGenerators) -> AlgebraReport:
    """Max-abs residual of every relation, on the safe columns and on the whole space.

    ``scale`` is the larger max-abs entry of the two sides (at least 1) and
    turns residuals into relative ones.
    """
    safe = gen.safe_indices()
    size = 2 * gen.dim
    relations = {}
    for name, (lhs, rhs) in algebra_relations(gen).items():
        res = lhs - rhs
        cols = np.concatenate([safe + j * size for j in range(res.shape[1] // size)])
        scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
        relations[name] = RelationResidual(
            safe_residual=float(np.max(np.abs(res[:, cols]))),
            full_residual=float(np.max(np.abs(res))),
            scale=scale,
        )
    return AlgebraReport(gen.dim, gen.multiplicity_k, relations)
