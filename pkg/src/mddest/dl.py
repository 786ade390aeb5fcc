"""Indicator-weighted integrated moment objective (Dominguez-Lobato baseline).

The empirical distribution of X is the weight, so the sample objective is

    DL_n(theta) = (1/n) sum_j || (1/n) sum_t h_t(theta) 1{X_t <= X_j} ||^2

with ``<=`` taken componentwise for vector X.
"""
from __future__ import annotations

import numpy as np

from .mdd import _residuals


def dl_indicator(x) -> np.ndarray:
    """I[t, j] = 1{X_t <= X_j componentwise}, as a float n x n matrix."""
    x = np.asarray(x, float)
    if x.ndim == 1:
        x = x[:, None]
    ind = np.ones((len(x), len(x)), dtype=bool)
    for c in range(x.shape[1]):
        ind &= x[:, c][:, None] <= x[:, c][None, :]
    return ind.astype(float)


def dl_objective(model, sample, indicator, theta) -> float:
    h = _residuals(model, sample, theta)
    g = indicator.T @ h / sample.n
    return float(np.sum(g * g)) / sample.n


def dl_value_and_gradient(model, sample, indicator, theta):
    """DL_n and its gradient (2/n) sum_j H_j' g_j in one pass."""
    n = sample.n
    h = _residuals(model, sample, theta)
    g = indicator.T @ h / n
    value = float(np.sum(g * g)) / n
    J = model.jacobian(sample.z, np.asarray(theta, float))
    back = indicator @ g  # sum_j I[t, j] g_j
    grad = 2.0 / n ** 2 * np.einsum("tld,tl->d", J, back)
    return value, grad
