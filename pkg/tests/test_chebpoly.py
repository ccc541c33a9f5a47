import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logvolterra.chebpoly import (
    ChebSeries3,
    discrete_transform,
    eval_expansion,
    eval_fourth_kind,
    eval_third_kind,
    fourth_kind_monomials,
)
from logvolterra.mesh import collocation_fractions


@pytest.mark.parametrize("r, x, expected", [
    (0, 0.3, 1.0),
    (1, 0.5, 0.0),
    (2, 1.0, 1.0),
    (3, -1.0, -7.0),
])
def test_third_kind_values(r, x, expected):
    assert eval_third_kind(r, x) == expected


@pytest.mark.parametrize("r, x, expected", [
    (2, 1.0, 5.0),
    (1, 0.0, 1.0),
    (3, -1.0, -1.0),
])
def test_fourth_kind_values(r, x, expected):
    assert eval_fourth_kind(r, x) == expected


@pytest.mark.parametrize("r", range(13))
def test_endpoint_values_exact(r):
    assert eval_third_kind(r, 1.0) == 1.0
    assert eval_third_kind(r, -1.0) == (-1) ** r * (2 * r + 1)
    assert eval_fourth_kind(r, 1.0) == 2 * r + 1
    assert eval_fourth_kind(r, -1.0) == (-1) ** r


def test_reflection():
    x = np.random.default_rng(7).uniform(-1, 1, 100)
    for r in range(13):
        w = eval_fourth_kind(r, x)
        v = (-1) ** r * eval_third_kind(r, -x)
        np.testing.assert_allclose(w, v, rtol=1e-13, atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 12), st.floats(-1, 1))
def test_trigonometric_form(r, x):
    # V_r(cos t) = cos((r + 1/2) t) / cos(t/2)
    t = np.arccos(x)
    if np.cos(t / 2) < 1e-3:
        return
    assert eval_third_kind(r, x) == pytest.approx(
        np.cos((r + 0.5) * t) / np.cos(t / 2), rel=1e-9, abs=1e-9)


def test_array_input_keeps_shape():
    x = np.linspace(-1, 1, 6).reshape(2, 3)
    assert eval_third_kind(4, x).shape == (2, 3)
    assert eval_fourth_kind(0, x).shape == (2, 3)


class TestMonomials:
    @pytest.mark.parametrize("r, expected", [
        (0, (1,)),
        (1, (1, 2)),
        (2, (-1, 2, 4)),
        (3, (-1, -4, 4, 8)),
    ])
    def test_small_degrees(self, r, expected):
        assert fourth_kind_monomials(r).coefficients == expected

    @pytest.mark.parametrize("r", [1, 5, 17, 40])
    def test_leading_coefficient(self, r):
        poly = fourth_kind_monomials(r)
        assert poly.degree == r
        assert poly.coefficients[-1] == 2 ** r
        assert all(isinstance(c, int) for c in poly.coefficients)

    def test_matches_recurrence(self):
        x = np.linspace(-1, 1, 11)
        for r in range(13):
            poly = fourth_kind_monomials(r)
            np.testing.assert_allclose(poly(x), eval_fourth_kind(r, x), atol=1e-11)

    def test_degree_limit(self):
        with pytest.raises(OverflowError):
            fourth_kind_monomials(41)


def _double_prime_sum(nu, power, r):
    k = np.arange(nu + 1)
    beta = collocation_fractions(nu).fractions
    terms = beta ** power * eval_third_kind(r, -np.cos(k * np.pi / nu))
    terms[[0, -1]] *= 0.5
    return terms.sum()


@pytest.mark.parametrize("nu, power, r, expected", [
    (3, 1, 2, 0.0),
    (3, 1, 0, 1.5),
    (4, 1, 2, 0.0),
    (5, 2, 3, 0.0),
])
def test_double_prime_identity_spot_checks(nu, power, r, expected):
    assert _double_prime_sum(nu, power, r) == pytest.approx(expected, abs=1e-14)


class TestTransform:
    def test_constant(self):
        np.testing.assert_allclose(discrete_transform(np.ones(4), 3), [1, 0, 0, 0],
                                   atol=1e-15)

    @pytest.mark.parametrize("nu", [2, 5, 9])
    def test_zero(self, nu):
        assert not np.any(discrete_transform(np.zeros(nu + 1), nu))

    def test_linear_data_nu2(self):
        np.testing.assert_allclose(discrete_transform([0, 0.5, 1], 2),
                                   [0.75, 0.25, 0.25], atol=1e-15)

    @pytest.mark.parametrize("nu", [2, 3, 4])
    def test_reproduces_low_coefficients(self, nu):
        # on [0, 1]: V_1(2t - 1) = 4t - 3, hence t = 3/4 + V_1/4
        beta = collocation_fractions(nu).fractions
        for c0, c1 in [(1.0, 0.0), (-0.5, 0.0), (0.0, 1.0), (2.0, -3.0)]:
            a = discrete_transform(c0 + c1 * beta, nu)
            expected = np.zeros(nu)
            expected[0] = c0 + 0.75 * c1
            expected[1] = 0.25 * c1
            np.testing.assert_allclose(a[:nu], expected, atol=1e-14)

    def test_linearity(self):
        rng = np.random.default_rng(3)
        u, v = rng.normal(size=6), rng.normal(size=6)
        np.testing.assert_allclose(discrete_transform(2 * u - v, 5),
                                   2 * discrete_transform(u, 5) - discrete_transform(v, 5),
                                   atol=1e-13)

    def test_batched_rows(self):
        rows = np.arange(12.0).reshape(3, 4)
        out = discrete_transform(rows, 3)
        np.testing.assert_allclose(out[1], discrete_transform(rows[1], 3))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            discrete_transform(np.ones(3), 3)


class TestExpansion:
    def test_constant_series(self):
        assert eval_expansion(ChebSeries3((1, 0, 0, 0), 0.0, 1.0), 0.37) == 1.0

    def test_first_degree(self):
        assert eval_expansion(ChebSeries3((0, 1, 0), 0.0, 1.0), 1.0) == 1.0

    def test_quasi_interpolation_defect(self):
        # the sample at t = 1 was 1, the series gives 1.25
        assert eval_expansion(ChebSeries3((0.75, 0.25, 0.25), 0.0, 1.0), 1.0) == \
            pytest.approx(1.25, abs=1e-15)

    def test_outside_interval(self):
        with pytest.raises(ValueError):
            eval_expansion(ChebSeries3((1, 0, 0), 0.0, 1.0), 1.5)

    def test_invalid_series(self):
        with pytest.raises(ValueError):
            ChebSeries3((1, 0), 0.0, 1.0)
        with pytest.raises(ValueError):
            ChebSeries3((1, 0, 0), 1.0, 1.0)
