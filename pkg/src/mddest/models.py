"""Builtin residual models used by the simulations and the empirical workflows."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.special import expit

from .core import FunctionModel, ResidualModel, Sample


class LinearInParams(ResidualModel):
    """Residuals of the form h_t = y_t - W_t theta.

    Subclasses provide ``response(z)`` (n x l) and ``design(z)`` (n x l x d).
    The Jacobian is ``-W_t`` and does not depend on theta.
    """

    def response(self, z):
        raise NotImplementedError

    def design(self, z):
        raise NotImplementedError

    def residuals(self, z, theta):
        return self.response(z) - self.design(z) @ np.asarray(theta, float)

    def jacobian(self, z, theta):
        return -self.design(z)

    def start(self, sample: Sample) -> np.ndarray:
        # least-squares warm start on the stacked equations
        W = self.design(sample.z).reshape(-1, self.n_params)
        y = self.response(sample.z).reshape(-1)
        return np.linalg.lstsq(W, y, rcond=None)[0]


class LinearModel(LinearInParams):
    """Multivariate linear model y_t = c + Gamma x_t + e_t.

    ``z`` holds the l responses followed by the p regressors. Parameters are
    the intercepts c (if any) followed by Gamma flattened row by row
    (``order="C"``, design block ``kron(I_l, x_t')``) or column by column
    (``order="F"``, i.e. vec(Gamma), design block ``kron(x_t', I_l)``).
    """

    def __init__(self, n_outputs: int = 1, n_regressors: int = 1, intercept: bool = False,
                 param_names: Sequence[str] = (), order: str = "C"):
        if order not in ("C", "F"):
            raise ValueError("order must be 'C' (row-major) or 'F' (column-major)")
        self.n_outputs = n_outputs
        self.n_regressors = n_regressors
        self.intercept = intercept
        self.order = order
        self.n_intercepts = n_outputs if intercept else 0
        self.intercept_signs = -np.ones(n_outputs) if intercept else None
        self.n_params = self.n_intercepts + n_outputs * n_regressors
        if not param_names:
            names = [f"c{i + 1}" for i in range(self.n_intercepts)]
            if n_outputs == 1:
                names += [f"b{j + 1}" for j in range(n_regressors)]
            else:
                names += [f"G{i + 1}{j + 1}" for i, j in self._cells()]
            param_names = names
        self.param_names = tuple(param_names)
        self._check_partition()

    def response(self, z):
        return np.asarray(z, float)[:, : self.n_outputs]

    def regressors(self, z):
        return np.asarray(z, float)[:, self.n_outputs: self.n_outputs + self.n_regressors]

    def _cells(self):
        """(row, column) of Gamma for each slope parameter, in parameter order."""
        l, p = self.n_outputs, self.n_regressors
        if self.order == "C":
            return [(i, j) for i in range(l) for j in range(p)]
        return [(i, j) for j in range(p) for i in range(l)]

    def gamma(self, theta) -> np.ndarray:
        """Slope matrix Gamma (l x p) from a full parameter vector."""
        slopes = np.asarray(theta, float)[self.n_intercepts:]
        return slopes.reshape(self.n_outputs, self.n_regressors, order=self.order)

    def design(self, z):
        x = self.regressors(z)
        n, l = len(x), self.n_outputs
        W = np.zeros((n, l, self.n_params))
        off = self.n_intercepts
        if self.intercept:
            W[:, np.arange(l), np.arange(l)] = 1.0
        for k, (i, j) in enumerate(self._cells()):
            W[:, i, off + k] = x[:, j]
        return W


def var_model(dim: int, p: int, intercept: bool = True) -> LinearModel:
    """VAR(p): Y_t = A0 + A1 Y_{t-1} + ... + Ap Y_{t-p} + e_t.

    Expects ``z`` rows (Y_t, Y_{t-1}, ..., Y_{t-p}) as built by :func:`embed`.
    Slope parameters are the rows of [A1 ... Ap].
    """
    names = [f"A0[{i + 1}]" for i in range(dim)] if intercept else []
    for i in range(dim):
        for lag in range(1, p + 1):
            names += [f"A{lag}[{i + 1},{j + 1}]" for j in range(dim)]
    return LinearModel(dim, dim * p, intercept=intercept, param_names=names)


def ar_model(p: int, intercept: bool = True) -> LinearModel:
    names = (["c"] if intercept else []) + [f"phi{i + 1}" for i in range(p)]
    return LinearModel(1, p, intercept=intercept, param_names=names)


class IndexModel(ResidualModel):
    """Scalar single-index models h = Z1 - f(theta, Z2), d = l = 1."""

    kinds = ("sin", "sigmoid", "quadratic")

    def __init__(self, kind: str):
        if kind not in self.kinds:
            raise ValueError(f"unknown index model {kind!r}")
        self.kind = kind
        self.n_params = 1
        self.n_outputs = 1
        self.param_names = ("theta",)
        self._check_partition()

    def residuals(self, z, theta):
        z = np.asarray(z, float)
        th = float(np.asarray(theta).reshape(-1)[0])
        y, x = z[:, 0], z[:, 1]
        if self.kind == "sin":
            fit = np.sin(th * x)
        elif self.kind == "sigmoid":
            fit = expit(th * x)
        else:
            fit = th ** 2 * x + th * x ** 2
        return (y - fit)[:, None]

    def jacobian(self, z, theta):
        z = np.asarray(z, float)
        th = float(np.asarray(theta).reshape(-1)[0])
        x = z[:, 1]
        if self.kind == "sin":
            d = x * np.cos(th * x)
        elif self.kind == "sigmoid":
            s = expit(th * x)
            d = x * s * (1.0 - s)
        else:
            d = 2 * th * x + x ** 2
        return -d[:, None, None]


class TarModel(LinearInParams):
    """Two-regime threshold AR(p) with threshold variable y_{t-delay}.

    The lower regime is ``y_{t-delay} <= threshold``, the upper regime is
    ``> threshold``. ``z`` rows are (y_t, y_{t-1}, ..., y_{t-L}) with
    L = max(p, delay).

    With intercepts the regime intercepts are parameterised as a common
    level ``c`` (the upper-regime intercept, the only shift-type intercept)
    and ``delta = a_lower - a_upper``; ``delta`` multiplies the regime
    indicator, which is a function of the conditioning lags, so it is
    identified by the MDD stage. :meth:`regime_coefficients` maps back to
    per-regime intercepts.
    """

    def __init__(self, p: int, delay: int = 1, threshold: float = 0.0, intercept: bool = True):
        if p < 1 or delay < 1:
            raise ValueError("p and delay must be >= 1")
        self.p = p
        self.delay = delay
        self.threshold = float(threshold)
        self.intercept = intercept
        self.max_lag = max(p, delay)
        self.n_outputs = 1
        self.n_intercepts = 1 if intercept else 0
        self.intercept_signs = -np.ones(1) if intercept else None
        names = ["c", "delta"] if intercept else []
        names += [f"phi_low{i + 1}" for i in range(p)] + [f"phi_up{i + 1}" for i in range(p)]
        self.param_names = tuple(names)
        self.n_params = len(names)
        self._check_partition()

    def lower(self, z):
        return np.asarray(z, float)[:, self.delay] <= self.threshold

    def response(self, z):
        return np.asarray(z, float)[:, :1]

    def design(self, z):
        z = np.asarray(z, float)
        low = self.lower(z).astype(float)[:, None]
        lags = z[:, 1: self.p + 1]
        cols = []
        if self.intercept:
            cols += [np.ones((len(z), 1)), low]
        cols += [low * lags, (1.0 - low) * lags]
        return np.hstack(cols)[:, None, :]

    def regime_coefficients(self, theta, vcov):
        """Per-regime coefficients (intercept, phi_1..phi_p) with standard errors.

        Returns:
            dict mapping "lower"/"upper" to (estimates, std_errors) arrays.
        """
        theta = np.asarray(theta, float)
        p, d = self.p, self.n_params
        off = 2 if self.intercept else 0
        out = {}
        for regime, start in (("lower", off), ("upper", off + p)):
            rows = []
            if self.intercept:
                r = np.zeros(d)
                r[0] = 1.0
                if regime == "lower":
                    r[1] = 1.0
                rows.append(r)
            for i in range(p):
                r = np.zeros(d)
                r[start + i] = 1.0
                rows.append(r)
            T = np.array(rows)
            out[regime] = (T @ theta, np.sqrt(np.diag(T @ vcov @ T.T)))
        return out


def embed(series, max_lag: int) -> np.ndarray:
    """Rows (Y_t, Y_{t-1}, ..., Y_{t-max_lag}) for t = max_lag, ..., T-1."""
    y = np.asarray(series, float)
    if y.ndim == 1:
        y = y[:, None]
    T = len(y)
    if T <= max_lag:
        raise ValueError(f"series of length {T} too short for {max_lag} lags")
    return np.hstack([y[max_lag - j: T - j] for j in range(max_lag + 1)])


BUILTIN_TAGS = (
    "linear-no-intercept", "linear-with-intercept", "multivariate-linear",
    "sin-index", "sigmoid-index", "quadratic-index", "ar", "var", "tar", "user-supplied",
)


def builtin_model(tag: str, **kw) -> ResidualModel:
    """Construct a builtin residual model from a tag and its dimensions.

    Tags and keyword arguments:
        linear-no-intercept / linear-with-intercept: ``n_regressors`` (1)
        multivariate-linear: ``n_outputs``, ``n_regressors``, ``intercept`` (False)
        sin-index, sigmoid-index, quadratic-index: none
        ar: ``p``, ``intercept`` (True)
        var: ``dim``, ``p``, ``intercept`` (True)
        tar: ``p``, ``delay`` (1), ``threshold`` (0.0), ``intercept`` (True)
        user-supplied: forwarded to :class:`~mddest.core.FunctionModel`
    """
    if tag == "linear-no-intercept":
        return LinearModel(1, kw.get("n_regressors", 1), intercept=False)
    if tag == "linear-with-intercept":
        return LinearModel(1, kw.get("n_regressors", 1), intercept=True)
    if tag == "multivariate-linear":
        return LinearModel(kw["n_outputs"], kw["n_regressors"], intercept=kw.get("intercept", False))
    if tag in ("sin-index", "sigmoid-index", "quadratic-index"):
        return IndexModel(tag.split("-")[0])
    if tag == "ar":
        return ar_model(kw["p"], kw.get("intercept", True))
    if tag == "var":
        return var_model(kw["dim"], kw["p"], kw.get("intercept", True))
    if tag == "tar":
        return TarModel(kw["p"], kw.get("delay", 1), kw.get("threshold", 0.0), kw.get("intercept", True))
    if tag == "user-supplied":
        return FunctionModel(**kw)
    raise ValueError(f"unknown model tag {tag!r}; expected one of {BUILTIN_TAGS}")
