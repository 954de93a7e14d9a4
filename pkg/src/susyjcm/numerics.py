"""Deterministic numerical kernels shared by the simulation modules.

Everything here is fixed-step and loop-ordered so identical inputs give
bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# |x| below which (1 - exp(-ix))/(ix) is replaced by its Taylor series
SERIES_THRESHOLD = 1e-6


class IntegrationError(ArithmeticError):
    """Raised when an integration leaves the representable/allowed range."""

    def __init__(self, message: str, t: float, index: int):
        super().__init__(f"{message} at t={t!r} (step {index})")
        self.t = t
        self.index = index


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``start, start+step, ...`` with the last point clamped to ``stop``."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("grid.step must be > 0")
        if not self.stop > self.start:
            raise ValueError("grid.stop must be > grid.start")

    @property
    def n_steps(self) -> int:
        ratio = (self.stop - self.start) / self.step
        nearest = round(ratio)
        if nearest >= 1 and abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
            return int(nearest)
        return int(math.ceil(ratio))

    def points(self) -> np.ndarray:
        n = self.n_steps
        t = self.start + self.step * np.arange(n + 1, dtype=float)
        t[-1] = self.stop
        return t


def check_grid(grid) -> np.ndarray:
    """Return ``grid`` as a float array, insisting on >= 2 strictly increasing samples."""
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid needs at least 2 samples")
    if not np.all(np.isfinite(t)):
        raise ValueError("time grid contains non-finite values")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def phase_integral(freq: float, t: float) -> complex:
    """``(1 - exp(-i*freq*t)) / (i*freq)``, i.e. the integral of ``exp(-i*freq*s)`` over [0, t].

    Equals ``t`` at ``freq == 0``; a series is used when ``|freq*t|`` is tiny.
    """
    x = freq * t
    if abs(x) < SERIES_THRESHOLD:
        return complex(t * (1.0 - x * x / 6.0), -t * x / 2.0)
    # 1 - cos x = 2 sin^2(x/2) avoids cancellation for moderate x
    return complex(math.sin(x) / freq, -2.0 * math.sin(0.5 * x) ** 2 / freq)


def rk4_integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0,
    grid,
    bound: float | None = None,
) -> np.ndarray:
    """Classic fourth-order Runge-Kutta on the supplied grid.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, y) -> dy/dt`` for a length-n complex state.
    y0 : array_like
        Initial state at ``grid[0]``.
    grid : array_like
        Strictly increasing sample times; each interval is one RK4 step.
    bound : float, optional
        Abort once any component exceeds this magnitude.

    Returns
    -------
    np.ndarray
        Complex array of shape ``(len(grid), n)``.

    Raises
    ------
    IntegrationError
        If the state becomes non-finite or exceeds ``bound``.
    """
    t = check_grid(grid)
    y = np.atleast_1d(np.asarray(y0, dtype=complex)).copy()
    if y.ndim != 1 or y.size < 1:
        raise ValueError("state must be a non-empty 1-d vector")
    out = np.empty((t.size, y.size), dtype=complex)
    out[0] = y
    for i in range(t.size - 1):
        h = t[i + 1] - t[i]
        ti = t[i]
        k1 = f(ti, y)
        k2 = f(ti + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(ti + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(ti + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", float(t[i + 1]), i + 1)
        if bound is not None and np.max(np.abs(y)) > bound:
            raise IntegrationError(f"state magnitude exceeded {bound:g}", float(t[i + 1]), i + 1)
        out[i + 1] = y
    return out


def trapezoid(values, grid):
    """Composite trapezoid rule; exact for affine integrands."""
    y = np.asarray(values)
    t = check_grid(grid)
    if y.shape[0] != t.size:
        raise ValueError("values and grid lengths differ")
    return np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t), axis=0)


def cumulative_trapezoid(values, grid) -> np.ndarray:
    """Running trapezoid integral, starting at 0 on ``grid[0]``."""
    y = np.asarray(values)
    t = check_grid(grid)
    if y.shape[0] != t.size:
        raise ValueError("values and grid lengths differ")
    pieces = 0.5 * (y[1:] + y[:-1]) * np.diff(t)
    return np.concatenate([np.zeros(1, dtype=pieces.dtype), np.cumsum(pieces)])


def finite_diff_check(grid, trajectory, f) -> float:
    """Max |central difference - f(t, y)| over interior samples.

    Second-order accurate, so the residual of a good trajectory scales as h**2.
    """
    t = check_grid(grid)
    y = np.asarray(trajectory, dtype=complex)
    if y.ndim == 1:
        y = y[:, None]
    if t.size < 3:
        raise ValueError("need at least 3 samples for central differences")
    worst = 0.0
    for i in range(1, t.size - 1):
        deriv = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1])
        worst = max(worst, float(np.max(np.abs(deriv - f(t[i], y[i])))))
    return worst
