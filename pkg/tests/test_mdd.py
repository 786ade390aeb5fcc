import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mddest import (FunctionModel, IndexModel, LinearModel, NonFiniteResidualError, Sample,
                    char_process, distance_matrix, icm_objective, mdd_gradient, mdd_objective,
                    mdd_statistic, mdd_value_and_gradient, mdd_via_quadrature, weight_constant)
from mddest.mdd import _mdd_from_residuals

from oracles import central_difference, icm_loops, mdd_loops


def identity_model(l=1):
    """h_t = z_t, independent of theta (one dummy parameter)."""
    return FunctionModel(lambda z, th: z[:l] + 0.0 * th[0], 1, l, lambda z, th: np.zeros((l, 1)))


class TestDistanceMatrix:
    def test_scalar_example(self):
        np.testing.assert_array_equal(distance_matrix(np.array([0.0, 2.0])), [[0, 2], [2, 0]])

    def test_pythagorean_example(self):
        d = distance_matrix(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert d[0, 1] == d[1, 0] == 5.0

    def test_matches_pairwise_loop(self, rng):
        x = rng.standard_normal((10, 3))
        d = distance_matrix(x)
        for t in range(10):
            for s in range(10):
                assert d[t, s] == pytest.approx(math.dist(x[t], x[s]), rel=1e-15, abs=1e-15)
        assert np.all(np.diag(d) == 0) and np.array_equal(d, d.T)

    def test_triangle_inequality(self, rng):
        d = distance_matrix(rng.standard_normal((30, 2)))
        for a, b, c in rng.integers(0, 30, size=(200, 3)):
            assert d[a, c] <= d[a, b] + d[b, c] + 1e-12

    def test_accepts_sample(self, rng):
        s = Sample(rng.standard_normal((5, 2)), rng.standard_normal((5, 2)))
        np.testing.assert_array_equal(distance_matrix(s), distance_matrix(s.x))


def test_weight_constant():
    assert weight_constant(1) == pytest.approx(math.pi, rel=1e-14)
    assert weight_constant(2) == pytest.approx(math.pi ** 1.5 / math.gamma(1.5), rel=1e-14)
    assert weight_constant(3) == pytest.approx(math.pi ** 2, rel=1e-14)


class TestMddObjective:
    def test_two_point_example(self):
        s = Sample(np.array([1.0, 3.0]), np.array([0.0, 2.0]))
        assert mdd_objective(identity_model(), s, distance_matrix(s), [0.0]) == pytest.approx(1.0)

    def test_constant_residuals_give_exact_zero(self, rng):
        s = Sample(np.full(9, 2.5), rng.standard_normal(9))
        assert mdd_objective(identity_model(), s, distance_matrix(s), [0.0]) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_double_sum(self, seed):
        rng = np.random.default_rng(seed)
        h = rng.standard_normal((15, 2))
        x = rng.standard_normal((15, 2))
        value = mdd_statistic(h, distance_matrix(x))
        assert value == pytest.approx(mdd_loops(h, x), rel=1e-12)

    def test_centred_residuals_sum_to_zero(self, rng):
        h = 5.0 + rng.standard_normal((40, 3))
        _, a, _ = _mdd_from_residuals(h, distance_matrix(rng.standard_normal(40)))
        assert np.abs(a.sum(axis=0)).max() < 1e-10

    def test_non_finite_residual_names_row(self):
        model = FunctionModel(lambda z, th: np.array([np.log(z[0]) - th[0]]), 1)
        s = Sample(np.array([1.0, 2.0, -1.0, 3.0]), np.arange(4.0))
        with np.errstate(invalid="ignore"):
            with pytest.raises(NonFiniteResidualError) as info:
                mdd_objective(model, s, distance_matrix(s), [0.0])
        assert info.value.row == 2

    def test_shift_invariance_versus_icm(self, rng):
        h = rng.standard_normal((20, 1))
        x = rng.standard_normal(20)
        d = distance_matrix(x)
        c = 1.7
        assert mdd_statistic(h + c, d) == pytest.approx(mdd_statistic(h, d), rel=1e-12)
        s0 = Sample(h, x)
        s1 = Sample(h + c, x)
        assert icm_objective(identity_model(), s0, d, [0.0]) != pytest.approx(
            icm_objective(identity_model(), s1, d, [0.0]), rel=1e-3)

    def test_argmin_invariant_to_x_scale(self, rng):
        x = rng.standard_normal(50)
        z = np.column_stack([x + 0.3 * rng.standard_normal(50), x])
        model = LinearModel(1, 1)
        grid = np.linspace(0.5, 1.5, 101)
        best = []
        for scale in (1.0, 37.0):
            s = Sample(z, scale * x)
            d = distance_matrix(s)
            best.append(np.argmin([mdd_objective(model, s, d, [g]) for g in grid]))
        assert best[0] == best[1]


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (12, 2), elements=st.floats(-1e3, 1e3)),
       arrays(np.float64, (12,), elements=st.floats(-1e3, 1e3)),
       arrays(np.float64, (2,), elements=st.floats(-1e3, 1e3)))
def test_property_nonnegative_and_shift_invariant(h, x, c):
    d = distance_matrix(x)
    value = mdd_statistic(h, d)
    scale = max(1.0, float(np.sum(np.abs(h - h.mean(0))) ** 2 * d.max() / 144))
    assert value >= -1e-12 * scale
    assert abs(mdd_statistic(h + c, d) - value) <= 1e-12 * scale


class TestIcm:
    def test_zero_residuals(self, rng):
        s = Sample(np.zeros(8), rng.standard_normal(8))
        assert icm_objective(identity_model(), s, distance_matrix(s), [0.0]) == 0.0

    def test_matches_double_sum(self, rng):
        h = rng.standard_normal((15, 2))
        x = rng.standard_normal((15, 1))
        s = Sample(h, x)
        value = icm_objective(identity_model(2), s, distance_matrix(s), [0.0])
        assert value == pytest.approx(icm_loops(h, x), rel=1e-12)


class TestGradient:
    def test_theta_free_model_has_zero_gradient(self, rng):
        s = Sample(rng.standard_normal(10), rng.standard_normal(10))
        np.testing.assert_array_equal(mdd_gradient(identity_model(), s, distance_matrix(s), [0.3]), [0.0])

    def test_two_point_hand_derivative(self):
        # h(theta) = (1, 3 - theta): MDD = (h1 - h2)^2 * 2 / 8 = (theta - 2)^2 / 4
        model = LinearModel(1, 1)
        s = Sample(np.array([[1.0, 0.0], [3.0, 1.0]]), np.array([0.0, 2.0]))
        d = distance_matrix(s)
        for theta in (0.0, 0.5, 3.0):
            f, g = mdd_value_and_gradient(model, s, d, [theta])
            assert f == pytest.approx((theta - 2) ** 2 / 4)
            assert g[0] == pytest.approx((theta - 2) / 2)

    def test_dgp1_gradient_matches_finite_differences(self, rng):
        from mddest import DgpSpec, generate
        data = generate(DgpSpec(1, 30, seed=5))
        d = distance_matrix(data.sample)
        theta = rng.standard_normal(1)
        g = mdd_gradient(data.model, data.sample, d, theta)
        fd = central_difference(lambda t: mdd_objective(data.model, data.sample, d, t), theta)
        np.testing.assert_allclose(g, fd, rtol=1e-6)


def test_char_process_modulus_bound(rng):
    h = rng.standard_normal((25, 2))
    x = rng.standard_normal((25, 1))
    g = char_process(h, x, rng.standard_normal((40, 1)) * 5)
    bound = 2.0 / 25 * np.linalg.norm(h - h.mean(0), axis=1).sum()
    assert np.all(np.linalg.norm(g, axis=1) <= bound)


class TestQuadratureOracle:
    def test_two_point_example(self):
        s = Sample(np.array([1.0, 3.0]), np.array([0.0, 2.0]))
        assert mdd_via_quadrature(identity_model(), s, [0.0]) == pytest.approx(1.0, abs=1e-4)

    def test_constant_residuals(self, rng):
        s = Sample(np.full(10, -4.0), rng.standard_normal(10))
        assert abs(mdd_via_quadrature(identity_model(), s, [0.0])) < 1e-10

    def test_random_instance(self, rng):
        x = rng.standard_normal(20)
        z = np.column_stack([np.sin(x) + rng.standard_normal(20), x])
        s = Sample(z, x)
        model = IndexModel("sin")
        exact = mdd_objective(model, s, distance_matrix(s), [0.4])
        assert abs(mdd_via_quadrature(model, s, [0.4]) - exact) / max(1.0, exact) < 1e-4

    def test_rejects_vector_x(self, rng):
        s = Sample(rng.standard_normal(5), rng.standard_normal((5, 2)))
        with pytest.raises(ValueError):
            mdd_via_quadrature(identity_model(), s, [0.0])
