import math

import mpmath as mp
import numpy as np
import pytest

from logvolterra.mesh import build_partition, collocation_fractions
from logvolterra.problems import get_problem
from logvolterra.quadweights import initial_i_values
from logvolterra.reference import (
    exact_i_value,
    log_convolution_power,
    log_moment,
    manufactured_problem,
    omega_value,
    residual_norm,
)
from logvolterra.solver import error_report, solve


class TestLogMoment:
    @pytest.mark.parametrize("m, a, c, expected", [
        (0, 1.0, 1.0, -1.0),
        (1, 1.0, 1.0, -0.25),
        (0, 2.0, 0.5, -2.0),
    ])
    def test_values(self, m, a, c, expected):
        assert log_moment(m, a, c) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("m, a, c", [(0, 0.7, 3.0), (3, 1.3, 0.2), (7, 0.4, 5.0)])
    def test_against_quadrature(self, m, a, c):
        ref = mp.quad(lambda t: t ** m * mp.log(c * t), [0, a])
        assert log_moment(m, a, c) == pytest.approx(float(ref), rel=1e-13)

    @pytest.mark.parametrize("a, c", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_domain(self, a, c):
        with pytest.raises(ValueError):
            log_moment(0, a, c)


class TestExactI:
    def test_initial_value_example(self):
        # beta = 0.25 means eta = 0.5
        assert exact_i_value(0, 0.5, 0.1) == pytest.approx(0.5 * (math.log(0.025) - 1),
                                                           rel=1e-14)

    @pytest.mark.parametrize("r", range(6))
    def test_empty_range(self, r):
        assert exact_i_value(r, 1.0, 0.3) == 0.0

    def test_full_range(self):
        assert exact_i_value(1, -1.0, 2.0) == pytest.approx(2 * math.log(2), rel=1e-15)

    @pytest.mark.parametrize("r, eta, h", [
        (2, 0.3, 0.7), (5, -0.8, 0.01), (8, -1.0, 2.0 ** -10), (12, 0.1, 1.0),
    ])
    def test_against_high_precision_quadrature(self, r, eta, h):
        ref = mp.quad(lambda t: mp.log(mp.mpf(h) * t / 2) * _w(r, t + eta),
                      [0, 1 - mp.mpf(eta)])
        assert exact_i_value(r, eta, h) == pytest.approx(float(ref), abs=1e-13)

    def test_closed_forms_for_low_orders(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(200):
            eta = rng.uniform(-1.0, 0.95)
            h = 2.0 ** rng.uniform(-10, 0)
            closed = initial_i_values(eta, h)
            for r in range(4):
                exact = exact_i_value(r, eta, h)
                worst = max(worst, abs(closed[r] - exact) / max(abs(exact), 1e-300))
        assert worst <= 1e-12

    def test_limits(self):
        with pytest.raises(OverflowError):
            exact_i_value(41, 0.0, 1.0)
        with pytest.raises(ValueError):
            exact_i_value(2, 1.5, 1.0)
        with pytest.raises(ValueError):
            exact_i_value(2, 0.0, 0.0)


def _w(r, x):
    prev, cur = mp.mpf(1), 2 * x + 1
    if r == 0:
        return prev
    for _ in range(r - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


class TestOmega:
    def test_values(self):
        assert omega_value(0, 1.0, 1.0) == pytest.approx(-1.0, abs=1e-15)
        for form in ("sum", "closed"):
            assert omega_value(1, 1.0, math.e, form) == pytest.approx(-0.25, abs=1e-15)

    def test_matches_log_moment(self):
        for beta, h in [(0.3, 0.5), (1.0, 0.01), (0.05, 1.0)]:
            assert omega_value(0, beta, h) == pytest.approx(log_moment(0, beta, h), rel=1e-14)

    def test_forms_agree(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            beta, h = rng.uniform(0.01, 1.0), 2.0 ** rng.uniform(-10, 0)
            for n in range(9):
                assert omega_value(n, beta, h, "sum") == pytest.approx(
                    omega_value(n, beta, h, "closed"), rel=1e-13)

    @pytest.mark.parametrize("n", [0, 2, 5])
    def test_against_quadrature(self, n):
        beta, h = 0.6, 0.3
        ref = mp.quad(lambda p: mp.log(h * p) * (beta - p) ** n, [0, beta])
        assert omega_value(n, beta, h) == pytest.approx(float(ref), rel=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            omega_value(1, 0.0, 1.0)


@pytest.mark.parametrize("m", [0, 1, 2, 5])
def test_log_convolution_power(m):
    x = 0.8
    ref = mp.quad(lambda s: mp.log(x - s) * s ** m, [0, x])
    assert log_convolution_power(m, x) == pytest.approx(float(ref), rel=1e-13)


class TestManufactured:
    def test_forcing_closed_forms(self):
        # y = 1 gives f = 1 - x ln x + x; y = x gives f = x - x^2 ln x / 2 + 3 x^2 / 4
        x = np.linspace(0.05, 1.0, 7)
        np.testing.assert_allclose(manufactured_problem([1.0]).f(x),
                                   1 - x * np.log(x) + x, rtol=1e-14)
        np.testing.assert_allclose(manufactured_problem([0.0, 1.0]).f(x),
                                   x - 0.5 * x ** 2 * np.log(x) + 0.75 * x ** 2, rtol=1e-14)

    def test_initial_value(self):
        assert manufactured_problem([2.5, 1.0]).initial_value() == 2.5


class TestResidual:
    def test_zero_kernel(self):
        p = get_problem("zero-kernel")
        sol = solve(p, build_partition(1.0, 5), collocation_fractions(3))
        assert residual_norm(sol, p) <= 1e-13

    def test_example_42(self):
        p = get_problem("example-4.2")
        sol = solve(p, build_partition(1.0, 64), collocation_fractions(4))
        assert residual_norm(sol, p) <= 10 * error_report(sol, p.exact).maerr

    @pytest.mark.parametrize("nu", [2, 3, 4, 6])
    def test_manufactured_single_step(self, nu):
        coeffs = [1.0, -0.5, 2.0, 0.3][: nu - 1]
        p = manufactured_problem(coeffs)
        sol = solve(p, build_partition(1.0, 1), collocation_fractions(nu))
        assert residual_norm(sol, p) <= 1e-10

    def test_sample_count(self):
        p = get_problem("example-4.2")
        sol = solve(p, build_partition(1.0, 16), collocation_fractions(4))
        assert residual_norm(sol, p, sample_count=4) <= residual_norm(sol, p)
