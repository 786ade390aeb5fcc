"""Small quasi-Newton minimiser with backtracking line search, plus a Nelder-Mead fallback."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize as sopt

ARMIJO_C = 1e-4
SHRINK = 0.5


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    message: str
    method: str
    history: list = field(default_factory=list)

    @property
    def grad_norm(self) -> float:
        return float(np.max(np.abs(self.grad))) if self.grad.size else 0.0


def _projector(bounds):
    if bounds is None:
        return lambda x: x
    lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], float)
    hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], float)
    return lambda x: np.clip(x, lo, hi)


def _projected_grad(x, g, project):
    # component of -g that stays feasible
    return x - project(x - g)


def minimize_bfgs(fun_grad: Callable, x0, grad_tol: float = 1e-8, max_iter: int = 500,
                  bounds=None, max_step: float = 10.0) -> OptimResult:
    """BFGS on the inverse Hessian with Armijo backtracking.

    Args:
        fun_grad: callable returning ``(f(x), grad f(x))``.
        x0: starting point.
        grad_tol: stop when the (projected) gradient sup-norm falls below it.
        max_iter: iteration cap.
        bounds: optional sequence of (lo, hi) pairs; iterates are projected.
        max_step: trial steps longer than ``max_step * max(1, |x|)`` are rescaled.

    Returns:
        OptimResult; ``history`` holds the objective after every accepted step
        and is non-increasing by construction.
    """
    project = _projector(bounds)
    x = project(np.asarray(x0, float).copy())
    f, g = fun_grad(x)
    d = x.size
    H = np.eye(d)
    history = [f]
    message = "iteration limit reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(_projected_grad(x, g, project)), initial=0.0) < grad_tol:
            converged, message = True, "gradient below tolerance"
            it -= 1
            break
        p = -H @ g
        fresh = it == 1
        if g @ p >= 0:
            H = np.eye(d)
            p = -g
            fresh = True
        plen = np.linalg.norm(p)
        if fresh and plen > 1.0:
            # without curvature information, try a unit-length step first
            p /= plen
            plen = 1.0
        cap = max_step * max(1.0, np.linalg.norm(x))
        if plen > cap:
            p *= cap / plen
        step = 1.0
        while True:
            x_new = project(x + step * p)
            try:
                f_new, g_new = fun_grad(x_new)
                ok = np.isfinite(f_new)
            except FloatingPointError:
                ok = False
            if ok and f_new <= f + ARMIJO_C * (g @ (x_new - x)):
                break
            step *= SHRINK
            if step < 1e-16:
                x_new = None
                break
        if x_new is None:
            message = "line search failed"
            break
        s = x_new - x
        y = g_new - g
        sy = s @ y
        if it == 1 and sy > 0:
            H = np.eye(d) * (sy / (y @ y))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            V = np.eye(d) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
        history.append(f)
        if not np.any(s):
            message = "step vanished"
            break
    else:
        if np.max(np.abs(_projected_grad(x, g, project)), initial=0.0) < grad_tol:
            converged, message = True, "gradient below tolerance"
    return OptimResult(x, float(f), np.asarray(g, float), it, converged, message, "bfgs", history)


def minimize_nelder_mead(fun: Callable, x0, max_iter: int = 500, bounds=None,
                         xatol: float = 1e-10, fatol: float = 1e-14) -> OptimResult:
    """Derivative-free fallback via :func:`scipy.optimize.minimize`."""
    res = sopt.minimize(fun, np.asarray(x0, float), method="Nelder-Mead", bounds=bounds,
                        options=dict(maxiter=200 * max_iter, xatol=xatol, fatol=fatol,
                                     adaptive=np.size(x0) > 2))
    return OptimResult(np.asarray(res.x, float), float(res.fun), np.full(np.size(x0), np.nan),
                       int(res.nit), bool(res.success), str(res.message), "nelder-mead")
