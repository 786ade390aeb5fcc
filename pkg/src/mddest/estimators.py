"""Point estimators: generic MDD minimiser, closed-form linear solution, two-step
procedure for intercept models, and the indicator-weighted (DL) baseline."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import EstimateResult, IdentificationError, ResidualModel, Sample
from .dl import dl_indicator, dl_objective, dl_value_and_gradient
from .inference import (COND_LIMIT, intercepts_from_m, vcov_dl, vcov_theorem2,
                        vcov_theorem3)
from .mdd import distance_matrix, mdd_objective, mdd_value_and_gradient
from .models import LinearInParams, LinearModel
from .optimize import OptimResult, minimize_bfgs, minimize_nelder_mead

METHODS = ("bfgs", "nelder-mead")


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimiser settings shared by all estimators.

    ``grad_tol`` applies to the objective divided by its magnitude at the
    first start, which makes convergence independent of the data scale.
    Starts beyond the first are the warm start plus ``perturbation`` times
    standard normal noise drawn from ``seed``.
    """

    method: str = "bfgs"
    grad_tol: float = 1e-8
    max_iter: int = 500
    multistart: int = 5
    perturbation: float = 0.5
    bounds: Optional[Sequence] = None
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.multistart < 1:
            raise ValueError("multistart must be >= 1")


def _starts(x0, config: OptimizerConfig):
    rng = np.random.default_rng(config.seed)
    starts = [np.asarray(x0, float)]
    for _ in range(config.multistart - 1):
        starts.append(starts[0] + config.perturbation * rng.standard_normal(starts[0].size))
    return starts


def _minimize(value_and_grad, x0, config: OptimizerConfig):
    """Multistart minimisation; returns (best OptimResult, list of all results)."""
    starts = _starts(x0, config)
    scale = max(abs(value_and_grad(starts[0])[0]), 1e-12)

    def fg(x):
        f, g = value_and_grad(x)
        return f / scale, g / scale

    def f_only(x):
        try:
            f = fg(x)[0]
        except FloatingPointError:
            return np.inf
        return f if np.isfinite(f) else np.inf

    runs = []
    for x in starts:
        if config.method == "bfgs":
            res = minimize_bfgs(fg, x, config.grad_tol, config.max_iter, config.bounds)
            if not res.converged:
                nm = minimize_nelder_mead(f_only, res.x, config.max_iter, config.bounds)
                polish = minimize_bfgs(fg, nm.x, config.grad_tol, config.max_iter, config.bounds)
                polish.iterations += res.iterations + nm.iterations
                polish.method = "bfgs+nelder-mead"
                res = polish if polish.fun <= res.fun else res
        else:
            res = minimize_nelder_mead(f_only, x, config.max_iter, config.bounds)
            _, g = fg(res.x)
            res.grad = g
        runs.append(res)

    for r in runs:
        r.fun *= scale
        r.grad = r.grad * scale
        r.history = [h * scale for h in r.history]
    pool = [i for i, r in enumerate(runs) if r.converged] or list(range(len(runs)))
    best = min(pool, key=lambda i: (runs[i].fun, i))
    return runs[best], runs


def _result(opt: OptimResult, runs, method, model, theta=None, **kw) -> EstimateResult:
    theta = opt.x if theta is None else theta
    return EstimateResult(
        theta=theta, vcov=None, objective=opt.fun, converged=opt.converged,
        iterations=opt.iterations, method=method, param_names=tuple(model.param_names),
        n_intercepts=model.n_intercepts, grad_norm=opt.grad_norm,
        details={"starts": [(r.fun, r.converged, r.method) for r in runs],
                 "n_converged": sum(r.converged for r in runs), **kw},
    )


def _attach_vcov(result: EstimateResult, fn, *args):
    try:
        parts = fn(*args)
    except (IdentificationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        result.messages.append(f"covariance unavailable: {exc}")
        return result
    result.vcov = parts.vcov
    result.details["sandwich"] = parts
    return result


def estimate_mdd(model: ResidualModel, sample: Sample, config: Optional[OptimizerConfig] = None,
                 dist: Optional[np.ndarray] = None, compute_vcov: bool = True) -> EstimateResult:
    """Minimise MDD_n(theta) over theta for a model without intercepts.

    Args:
        model: residual model; intercept-partitioned models are rejected.
        sample: data.
        config: optimiser settings.
        dist: precomputed distance matrix of ``sample.x``.
        compute_vcov: attach the analytic sandwich covariance.

    Raises:
        ValueError: for models with intercepts (use :func:`estimate_two_step`).
    """
    if model.has_intercepts:
        raise ValueError("MDD cannot identify intercepts; use estimate_two_step for this model")
    config = config or OptimizerConfig()
    dist = distance_matrix(sample) if dist is None else dist
    opt, runs = _minimize(lambda t: mdd_value_and_gradient(model, sample, dist, t),
                          model.start(sample), config)
    res = _result(opt, runs, "mdd", model)
    if compute_vcov:
        _attach_vcov(res, vcov_theorem2, model, sample, dist, res.theta)
    return res


def linear_mdd_solution(model: LinearInParams, sample: Sample, dist: np.ndarray) -> np.ndarray:
    """Exact MDD minimiser Xi_1^{-1} Xi_2 for a model linear in its parameters.

    Xi_1 = sum_t sum_s (W_t - Wbar)'(W_s - Wbar) d[t, s] and
    Xi_2 = sum_t sum_s (W_t - Wbar)'(y_s - ybar) d[t, s].
    """
    W = model.design(sample.z)
    y = model.response(sample.z)
    n, l, d = W.shape
    Wc = W - W.mean(axis=0)
    yc = y - y.mean(axis=0)
    DW = (dist @ Wc.reshape(n, l * d)).reshape(n, l, d)
    xi1 = np.einsum("tld,tle->de", Wc, DW)
    xi1 = 0.5 * (xi1 + xi1.T)
    xi2 = np.einsum("tld,tl->d", DW, yc)
    if np.linalg.cond(xi1) > COND_LIMIT:
        raise IdentificationError("unidentified: degenerate regressor/conditioning geometry")
    return np.linalg.solve(xi1, xi2)


def closed_form_linear(sample: Sample, n_outputs: int = 1, use_z2_distance: bool = False,
                       compute_vcov: bool = True, order: str = "C") -> EstimateResult:
    """Closed-form MDD estimate of Gamma in Z_1t = Gamma Z_2t + e_t.

    The first ``n_outputs`` columns of ``sample.z`` are Z_1, the rest Z_2.
    Distances are taken on X by default; ``use_z2_distance`` uses Z_2 instead.
    Parameters are Gamma flattened row by row, or column by column with
    ``order="F"``.
    """
    model = LinearModel(n_outputs, sample.k - n_outputs, order=order)
    dist = distance_matrix(model.regressors(sample.z) if use_z2_distance else sample.x)
    theta = linear_mdd_solution(model, sample, dist)
    res = EstimateResult(theta=theta, vcov=None, objective=mdd_objective(model, sample, dist, theta),
                         converged=True, iterations=0, method="mdd-closed-form",
                         param_names=tuple(model.param_names))
    if compute_vcov:
        _attach_vcov(res, vcov_theorem2, model, sample, dist, theta)
    return res


def estimate_two_step(model: ResidualModel, sample: Sample, config: Optional[OptimizerConfig] = None,
                      dist: Optional[np.ndarray] = None, compute_vcov: bool = True) -> EstimateResult:
    """Two-step estimator for h(z, theta) = (theta_1, 0)' + m(z, theta_2).

    Step one minimises MDD_n with h replaced by m over theta_2; step two sets
    theta_1 = -(1/n) sum_t m_1(Z_t, theta_2_hat) (with the model's intercept
    sign convention applied). The joint covariance is the J_t-based sandwich.
    """
    if not model.has_intercepts:
        raise ValueError("estimate_two_step needs a model with an intercept partition")
    config = config or OptimizerConfig()
    dist = distance_matrix(sample) if dist is None else dist
    reduced = model.reduced()
    if reduced.n_params:
        opt, runs = _minimize(lambda t: mdd_value_and_gradient(reduced, sample, dist, t),
                              reduced.start(sample), config)
    else:
        opt = OptimResult(np.zeros(0), mdd_objective(reduced, sample, dist, np.zeros(0)),
                          np.zeros(0), 0, True, "no free parameters", "none")
        runs = [opt]
    theta2 = opt.x
    theta1 = intercepts_from_m(model, sample, theta2)
    res = _result(opt, runs, "mdd-two-step", model, theta=np.concatenate([theta1, theta2]))
    if compute_vcov:
        _attach_vcov(res, vcov_theorem3, model, sample, dist, theta2)
    return res


def estimate_dl(model: ResidualModel, sample: Sample, config: Optional[OptimizerConfig] = None,
                indicator: Optional[np.ndarray] = None, compute_vcov: bool = True) -> EstimateResult:
    """Minimise the indicator-weighted objective DL_n; identifies intercepts directly."""
    config = config or OptimizerConfig()
    ind = dl_indicator(sample.x) if indicator is None else indicator
    opt, runs = _minimize(lambda t: dl_value_and_gradient(model, sample, ind, t),
                          model.start(sample), config)
    res = _result(opt, runs, "dl", model)
    if compute_vcov:
        _attach_vcov(res, vcov_dl, model, sample, res.theta, ind)
    return res


def estimate(model: ResidualModel, sample: Sample, estimator: str = "mdd",
             config: Optional[OptimizerConfig] = None, **kw) -> EstimateResult:
    """Dispatch: ``mdd`` routes intercept models to the two-step procedure."""
    if estimator == "mdd":
        fn = estimate_two_step if model.has_intercepts else estimate_mdd
        return fn(model, sample, config, **kw)
    if estimator == "dl":
        return estimate_dl(model, sample, config, **kw)
    raise ValueError(f"unknown estimator {estimator!r}")


__all__ = [
    "OptimizerConfig", "estimate_mdd", "closed_form_linear", "linear_mdd_solution",
    "estimate_two_step", "estimate_dl", "estimate", "dl_objective",
]
