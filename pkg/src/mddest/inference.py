"""Analytic sandwich covariance estimators.

All returned covariances are finite-sample ones (asymptotic variance of the
root-n scaled estimator divided by n), symmetrised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import IdentificationError, ResidualModel, Sample
from .dl import dl_indicator
from .mdd import _residuals

COND_LIMIT = 1e12


def guarded_inverse(a: np.ndarray, what: str = "Omega") -> np.ndarray:
    """Inverse of a square matrix, refusing when its condition number exceeds 1e12."""
    a = np.atleast_2d(a)
    s = np.linalg.svd(a, compute_uv=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IdentificationError(
            f"near-singular {what} (condition number {cond:.3g}); identification suspect"
        )
    return np.linalg.inv(a)


def _sym(a):
    return 0.5 * (a + a.T)


@dataclass
class SandwichParts:
    """Pieces of a sandwich covariance; two-step fields are None otherwise."""

    u: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray
    vcov: np.ndarray
    u2: Optional[np.ndarray] = None
    omega1: Optional[np.ndarray] = None
    sigma1: Optional[np.ndarray] = None
    j_t: Optional[np.ndarray] = None
    upsilon: Optional[np.ndarray] = None
    mean_m1_jacobian: Optional[np.ndarray] = None
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    v_joint: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.vcov))

    @property
    def block_gap(self) -> float:
        """Largest gap between the V1/V2 closed forms and the blocks of V."""
        if self.v_joint is None:
            return 0.0
        d1 = self.v1.shape[0]
        gap1 = np.max(np.abs(self.v_joint[:d1, :d1] - self.v1), initial=0.0)
        gap2 = np.max(np.abs(self.v_joint[d1:, d1:] - self.v2), initial=0.0)
        return float(max(gap1, gap2))


def u_from_jacobian(jac: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """u_hat(X_s) = (1/n) sum_t (hdot_t - hdot_bar) d[t, s], shape (n, l, d)."""
    n, l, d = jac.shape
    jc = (jac - jac.mean(axis=0)).reshape(n, l * d)
    return (dist.T @ jc).reshape(n, l, d) / n


def u_hat(model: ResidualModel, sample: Sample, dist: np.ndarray, theta) -> np.ndarray:
    return u_from_jacobian(model.jacobian(sample.z, np.asarray(theta, float)), dist)


def _omega_sigma(jac, h, dist):
    n = len(h)
    u = u_from_jacobian(jac, dist)
    jc = jac - jac.mean(axis=0)
    omega = _sym(np.einsum("tld,tle->de", jc, u) / n)
    uc = u - u.mean(axis=0)
    score = np.einsum("tld,tl->td", uc, h)
    sigma = _sym(score.T @ score / n)
    return u, uc, omega, sigma


def vcov_theorem2(model: ResidualModel, sample: Sample, dist: np.ndarray, theta) -> SandwichParts:
    """Omega^{-1} Sigma Omega^{-1} / n for the MDD estimator without intercepts.

    Omega_hat = (1/n) sum_t (hdot_t - hdot_bar)' u_hat(X_t) and
    Sigma_hat = (1/n) sum_t [u_hat(X_t) - u_bar]' h_t h_t' [u_hat(X_t) - u_bar],
    with the raw residuals h_t(theta_hat).

    Raises:
        IdentificationError: if Omega_hat is near-singular.
    """
    theta = np.asarray(theta, float)
    h = _residuals(model, sample, theta)
    jac = model.jacobian(sample.z, theta)
    u, _, omega, sigma = _omega_sigma(jac, h, dist)
    inv = guarded_inverse(omega, "Omega")
    vcov = _sym(inv @ sigma @ inv) / sample.n
    return SandwichParts(u=u, omega=omega, sigma=sigma, vcov=vcov)


def intercepts_from_m(model: ResidualModel, sample: Sample, theta2) -> np.ndarray:
    """theta_1 = -(1/n) sum_t m_1(Z_t, theta_2), mapped through the model's intercept signs."""
    d1 = model.n_intercepts
    m = model.m(sample.z, theta2)
    return -m[:, :d1].mean(axis=0) * model.intercept_signs


def vcov_theorem3(model: ResidualModel, sample: Sample, dist: np.ndarray, theta2) -> SandwichParts:
    """Joint covariance of the two-step estimator (theta_1, theta_2).

    Builds J_t from E(dm_1/dtheta_2), Omega_2^{-1}, u_2(X_t) - mean u_2 and
    Upsilon = (I_{d1}, 0), then V = (1/n) sum_t J_t h_t h_t' J_t'. The V1 and
    V2 closed forms are computed as well and kept for cross-checking.
    """
    if not model.has_intercepts:
        raise ValueError("vcov_theorem3 needs a model with an intercept partition")
    n = sample.n
    d1, l = model.n_intercepts, model.n_outputs
    theta2 = np.asarray(theta2, float)
    m = model.m(sample.z, theta2)
    signs = model.intercept_signs
    # intercepts in the (theta_1, 0)' + m form, before the sign convention
    t1 = -m[:, :d1].mean(axis=0)
    h = m.copy()
    h[:, :d1] += t1
    ups = np.eye(d1, l)
    sigma1 = _sym(h.T @ h / n)
    D = np.concatenate([signs, np.ones(len(theta2))])

    if theta2.size == 0:
        v1 = ups @ sigma1 @ ups.T
        vcov = _sym(np.outer(D, D) * v1) / n
        z = np.zeros((n, l, 0))
        return SandwichParts(u=z, omega=np.zeros((0, 0)), sigma=np.zeros((0, 0)), vcov=vcov,
                             u2=z, sigma1=sigma1, upsilon=ups, v1=v1, v2=np.zeros((0, 0)),
                             v_joint=v1)

    jm = model.m_jacobian(sample.z, theta2)
    u2, u2c, omega2, sigma2 = _omega_sigma(jm, h, dist)
    inv2 = guarded_inverse(omega2, "Omega_2")
    omega1 = np.einsum("tl,tk,tke->le", h, h, u2c) / n
    em1 = jm[:, :d1, :].mean(axis=0)

    k = np.einsum("de,tle->tdl", inv2, u2c)
    top = np.einsum("ae,tel->tal", em1, k) - ups
    j_t = np.concatenate([top, -k], axis=1)
    r = np.einsum("tdl,tl->td", j_t, h)
    v = _sym(r.T @ r / n)

    v2 = _sym(inv2 @ sigma2 @ inv2)
    cross = ups @ omega1 @ inv2 @ em1.T
    v1 = _sym(em1 @ v2 @ em1.T - cross - cross.T + ups @ sigma1 @ ups.T)

    vcov = _sym(np.outer(D, D) * v) / n
    return SandwichParts(u=u2, omega=omega2, sigma=sigma2, vcov=vcov, u2=u2, omega1=omega1,
                         sigma1=sigma1, j_t=j_t, upsilon=ups, mean_m1_jacobian=em1,
                         v1=v1, v2=v2, v_joint=v)


def vcov_dl(model: ResidualModel, sample: Sample, theta, indicator=None) -> SandwichParts:
    """Sample-analogue sandwich A^{-1} B A^{-1} / n for the indicator-weighted estimator.

    H(X_j) = (1/n) sum_t hdot_t 1{X_t <= X_j}, v(X_t) = (1/n) sum_j H(X_j) 1{X_t <= X_j},
    A = (1/n) sum_j H_j'H_j and B = (1/n) sum_t v_t' h_t h_t' v_t.
    """
    theta = np.asarray(theta, float)
    n = sample.n
    ind = dl_indicator(sample.x) if indicator is None else indicator
    h = _residuals(model, sample, theta)
    jac = model.jacobian(sample.z, theta)
    _, l, d = jac.shape
    H = (ind.T @ jac.reshape(n, l * d)).reshape(n, l, d) / n
    v = (ind @ H.reshape(n, l * d)).reshape(n, l, d) / n
    A = _sym(np.einsum("jld,jle->de", H, H) / n)
    score = np.einsum("tld,tl->td", v, h)
    B = _sym(score.T @ score / n)
    inv = guarded_inverse(A, "A (DL curvature)")
    vcov = _sym(inv @ B @ inv) / n
    return SandwichParts(u=v, omega=A, sigma=B, vcov=vcov, extra={"H": H})
