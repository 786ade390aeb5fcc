import numpy as np
import pytest

from mddest import (IndexModel, LinearModel, Sample, TarModel, ar_model, builtin_model,
                    check_jacobian, embed, var_model)
from mddest.models import BUILTIN_TAGS


def test_linear_no_intercept_example():
    model = builtin_model("linear-no-intercept")
    z = np.array([[3.0, 2.0]])
    assert model.residuals(z, [1.0])[0, 0] == 1.0
    assert model.jacobian(z, [1.0])[0, 0, 0] == -2.0


def test_sigmoid_index_example():
    model = builtin_model("sigmoid-index")
    z = np.array([[1.7, 5.0]])
    assert model.residuals(z, [0.0])[0, 0] == pytest.approx(1.7 - 0.5)
    assert model.jacobian(z, [0.0])[0, 0, 0] == pytest.approx(-1.25)


def test_quadratic_index_residual():
    model = IndexModel("quadratic")
    z = np.array([[10.0, 2.0]])
    th = 1.25
    assert model.residuals(z, [th])[0, 0] == pytest.approx(10 - th ** 2 * 2 - th * 4)


def test_unknown_tag_rejected():
    with pytest.raises(ValueError, match="unknown model tag"):
        builtin_model("probit")


def _jacobian_sample(model, rng, n=60):
    k = {IndexModel: 2}.get(type(model))
    if isinstance(model, TarModel):
        k = model.max_lag + 1
    elif isinstance(model, LinearModel):
        k = model.n_outputs + model.n_regressors
    return Sample(rng.standard_normal((n, k)), rng.standard_normal(n))


@pytest.mark.parametrize("tag,kw", [
    ("linear-no-intercept", {}), ("linear-with-intercept", {"n_regressors": 2}),
    ("multivariate-linear", {"n_outputs": 2, "n_regressors": 3}),
    ("sin-index", {}), ("sigmoid-index", {}), ("quadratic-index", {}),
    ("ar", {"p": 2}), ("var", {"dim": 2, "p": 2}), ("tar", {"p": 2, "delay": 1}),
])
def test_builtin_jacobians_match_finite_differences(tag, kw, rng):
    model = builtin_model(tag, **kw)
    assert check_jacobian(model, _jacobian_sample(model, rng), n_points=50) < 1e-6


def test_all_tags_constructible():
    kws = {"multivariate-linear": dict(n_outputs=1, n_regressors=1), "ar": dict(p=1),
           "var": dict(dim=2, p=1), "tar": dict(p=1),
           "user-supplied": dict(residual_fn=lambda z, th: z[:1] - th, n_params=1)}
    for tag in BUILTIN_TAGS:
        assert builtin_model(tag, **kws.get(tag, {})).n_params >= 1


@pytest.mark.parametrize("model", [LinearModel(2, 2, intercept=True), var_model(2, 1), ar_model(3),
                                   TarModel(2, 1)])
def test_intercept_shift_structure(model, rng):
    s = _jacobian_sample(model, rng, 25)
    theta = rng.standard_normal(model.n_params)
    diff = model.residuals(s.z, theta) - model.m(s.z, theta[model.n_intercepts:])
    np.testing.assert_allclose(diff, np.broadcast_to(diff[0], diff.shape), atol=1e-12)
    # builtin intercepts enter with the natural sign y - c - ...
    np.testing.assert_allclose(diff[0, :model.n_intercepts], -theta[:model.n_intercepts])


def test_multivariate_linear_parameter_layout():
    model = LinearModel(2, 2)
    gamma = np.array([[1.0, -1.0], [1.0, 2.0]])
    x = np.array([[0.5, -2.0]])
    y = x @ gamma.T
    np.testing.assert_allclose(model.residuals(np.hstack([y, x]), gamma.reshape(-1)), 0.0, atol=1e-15)
    vec_model = LinearModel(2, 2, order="F")
    np.testing.assert_allclose(vec_model.residuals(np.hstack([y, x]), gamma.reshape(-1, order="F")), 0.0,
                               atol=1e-15)
    np.testing.assert_array_equal(vec_model.gamma(gamma.reshape(-1, order="F")), gamma)
    assert vec_model.param_names == ("G11", "G21", "G12", "G22")


def test_linear_model_rejects_unknown_order():
    with pytest.raises(ValueError):
        LinearModel(2, 2, order="K")


def test_var_names_and_embedding():
    series = np.arange(12.0).reshape(6, 2)
    rows = embed(series, 2)
    assert rows.shape == (4, 6)
    np.testing.assert_array_equal(rows[0], [4, 5, 2, 3, 0, 1])
    model = var_model(2, 2)
    assert model.param_names[:3] == ("A0[1]", "A0[2]", "A1[1,1]")
    assert model.n_params == 2 + 8


def test_tar_hand_built_sample():
    # rows (y_t, y_{t-1}, y_{t-2}); lower regime when y_{t-1} <= 0
    z = np.array([[1.0, -1.0, 2.0],
                  [0.5, 0.0, -1.0],
                  [2.0, 3.0, 0.5],
                  [-1.0, 1.0, -2.0],
                  [0.2, -0.5, 0.3]])
    model = TarModel(p=2, delay=1, threshold=0.0)
    a_low, a_up = 0.1, -0.2
    low = np.array([0.5, -0.3])
    up = np.array([0.4, 0.2])
    theta = np.concatenate([[a_up, a_low - a_up], low, up])
    expected = []
    for y, y1, y2 in z:
        if y1 <= 0:
            expected.append(y - a_low - low[0] * y1 - low[1] * y2)
        else:
            expected.append(y - a_up - up[0] * y1 - up[1] * y2)
    np.testing.assert_allclose(model.residuals(z, theta)[:, 0], expected, atol=1e-15)


def test_tar_regime_coefficients():
    model = TarModel(p=1)
    theta = np.array([0.3, 0.5, -0.4, 0.6])
    vcov = np.diag([0.01, 0.04, 0.09, 0.16])
    reg = model.regime_coefficients(theta, vcov)
    np.testing.assert_allclose(reg["lower"][0], [0.8, -0.4])
    np.testing.assert_allclose(reg["upper"][0], [0.3, 0.6])
    np.testing.assert_allclose(reg["lower"][1], [np.sqrt(0.05), 0.3])


def test_ols_warm_start_is_least_squares(rng):
    x = rng.standard_normal(40)
    y = 2.0 * x + 0.1 * rng.standard_normal(40)
    start = LinearModel(1, 1).start(Sample(np.column_stack([y, x]), x))
    assert start[0] == pytest.approx(np.dot(x, y) / np.dot(x, x))
