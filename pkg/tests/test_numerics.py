import math

import numpy as np
import pytest

from susyjcm.numerics import (
    IntegrationError,
    TimeGrid,
    cumulative_trapezoid,
    finite_diff_check,
    phase_integral,
    rk4_integrate,
    trapezoid,
)


class TestTimeGrid:
    def test_points_land_on_stop(self):
        t = TimeGrid(0.0, 0.5, 1e-4).points()
        assert t.size == 5001
        assert t[-1] == 0.5

    def test_last_point_clamped(self):
        t = TimeGrid(0.0, 1.0, 0.3).points()
        np.testing.assert_allclose(t, [0.0, 0.3, 0.6, 0.9, 1.0])

    @pytest.mark.parametrize("step", [0.0, -1e-3])
    def test_bad_step(self, step):
        with pytest.raises(ValueError, match="grid.step must be > 0"):
            TimeGrid(0.0, 1.0, step)

    def test_bad_span(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 1.0, 0.1)


class TestRK4:
    def test_constant(self):
        t = np.linspace(0, 1, 11)
        y = rk4_integrate(lambda t, y: np.zeros_like(y), [1 + 2j, -3], t)
        np.testing.assert_array_equal(y, np.tile([1 + 2j, -3], (11, 1)))

    def test_decay(self):
        t = TimeGrid(0, 1, 1e-3).points()
        y = rk4_integrate(lambda t, y: -y, [1.0], t)
        assert abs(y[-1, 0] - math.exp(-1)) < 1e-10

    def test_gaussian_growth(self):
        t = TimeGrid(0, 1, 1e-3).points()
        y = rk4_integrate(lambda t, y: 2 * t * y, [1.0], t)
        assert abs(y[-1, 0] - math.e) < 1e-8

    def test_order(self):
        errs = []
        for h in (1e-2, 5e-3):
            t = TimeGrid(0, 1, h).points()
            errs.append(abs(rk4_integrate(lambda t, y: -y, [1.0], t)[-1, 0] - math.exp(-1)))
        assert 12 <= errs[0] / errs[1] <= 20

    def test_deterministic(self):
        t = TimeGrid(0, 2, 1e-3).points()
        f = lambda t, y: np.array([1j * t * y[0] - y[1], y[0] * math.sin(t)])
        a = rk4_integrate(f, [1, 0.5j], t)
        b = rk4_integrate(f, [1, 0.5j], t)
        assert a.tobytes() == b.tobytes()

    def test_bound_abort_reports_position(self):
        t = TimeGrid(0, 10, 1e-2).points()
        with pytest.raises(IntegrationError) as info:
            rk4_integrate(lambda t, y: y, [1.0], t, bound=1e3)
        # e^t crosses 1e3 at t = ln(1000) = 6.9078
        assert info.value.t == pytest.approx(6.91, abs=0.011)
        assert t[info.value.index] == info.value.t

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_abort(self):
        t = np.array([0.0, 1.0, 2.0])
        with pytest.raises(IntegrationError, match="non-finite"):
            rk4_integrate(lambda t, y: y * np.inf, [1.0], t)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            rk4_integrate(lambda t, y: y, [1.0], [0.0, 0.2, 0.1])


class TestTrapezoid:
    def test_constant(self):
        t = np.linspace(0, 1, 7)
        assert trapezoid(np.full(7, 3.5), t) == pytest.approx(3.5, abs=1e-15)

    def test_affine_exact_on_irregular_grid(self):
        t = np.array([0.0, 0.1, 0.35, 0.36, 0.8, 1.0])
        assert trapezoid(t, t) == 0.5

    def test_sine(self):
        t = TimeGrid(0, math.pi, 1e-3).points()
        assert abs(trapezoid(np.sin(t), t) - 2.0) < 1e-6

    def test_cumulative_matches_total(self):
        t = np.linspace(0, 2, 50)
        y = np.cos(t) + 1j * t
        c = cumulative_trapezoid(y, t)
        assert c[0] == 0
        assert c[-1] == pytest.approx(trapezoid(y, t))

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            trapezoid([1.0], [0.0])


class TestFiniteDiff:
    @pytest.mark.parametrize(
        "f, y0",
        [
            (lambda t, y: np.zeros_like(y), 1.0),
            (lambda t, y: -y, 1.0),
            (lambda t, y: 2 * t * y, 1.0),
        ],
    )
    def test_residual_is_second_order(self, f, y0):
        h = 1e-3
        t = TimeGrid(0, 1, h).points()
        y = rk4_integrate(f, [y0], t)
        assert finite_diff_check(t, y, f) < 10 * h * h


class TestPhaseIntegral:
    @pytest.mark.parametrize("freq", [0.0, 1e-9, 1e-3, 0.5, 2.0, -1.3])
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 7.0])
    def test_matches_quadrature(self, freq, t):
        # independent route: midpoint rule on exp(-i freq s)
        n = 4000
        s = (np.arange(n) + 0.5) * t / n
        ref = np.sum(np.exp(-1j * freq * s)) * t / n
        assert abs(phase_integral(freq, t) - ref) <= 1e-7 * max(1.0, t)

    def test_zero_frequency_is_t(self):
        assert phase_integral(0.0, 2.5) == 2.5

    def test_series_switch_is_continuous(self):
        t = 1.0
        below = phase_integral(0.99e-6, t)
        above = phase_integral(1.01e-6, t)
        assert abs(below - above) < 1e-8
