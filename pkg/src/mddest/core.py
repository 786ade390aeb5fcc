"""Shared domain types: samples, residual models and estimation results."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class SampleError(ValueError):
    """Raised for malformed samples (shape mismatch, non-finite entries)."""


class IdentificationError(np.linalg.LinAlgError):
    """Raised when a curvature matrix is (near-)singular."""


class NonFiniteResidualError(FloatingPointError):
    """Raised when a model produces NaN/Inf residuals at some row."""

    def __init__(self, row: int, theta: np.ndarray):
        self.row = row
        self.theta = np.asarray(theta)
        super().__init__(
            f"non-finite residual at row {row} for theta={np.array2string(self.theta)}"
        )


def _as_2d(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise SampleError(f"{name} must be 1- or 2-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Sample:
    """Aligned model variables ``z`` (n x k) and conditioning variables ``x`` (n x q).

    One-dimensional inputs are promoted to single columns. Construction fails
    on row-count mismatch, fewer than two rows, or non-finite entries.
    """

    z: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        z = _as_2d(self.z, "z")
        x = _as_2d(self.x, "x")
        if z.shape[0] != x.shape[0]:
            raise SampleError(
                f"row-count mismatch: z has {z.shape[0]} rows, x has {x.shape[0]}"
            )
        if z.shape[0] < 2:
            raise SampleError("a sample needs at least 2 rows")
        for name, arr in (("z", z), ("x", x)):
            bad = ~np.isfinite(arr)
            if bad.any():
                r, c = np.argwhere(bad)[0]
                raise SampleError(f"non-finite entry in {name} at row {r}, column {c}")
        z.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def k(self) -> int:
        return self.z.shape[1]

    @property
    def q(self) -> int:
        return self.x.shape[1]


def validate_sample(sample: Sample, n_params: Optional[int] = None) -> list[str]:
    """Heuristic diagnostics for a sample.

    Stationarity and ergodicity cannot be checked from data; this only flags
    situations that make estimation degenerate. Fatal problems (shape
    mismatch, NaN/Inf) are already rejected by :class:`Sample`.

    Args:
        sample: the sample to inspect.
        n_params: number of parameters to be estimated, if known.

    Returns:
        list of warning strings, empty for a clean sample.
    """
    warnings = []
    const = np.ptp(sample.x, axis=0) == 0
    for j in np.flatnonzero(const):
        warnings.append(f"degenerate conditioning variable: x column {j} is constant")
    if n_params is not None and sample.n < n_params + 2:
        warnings.append(
            f"sample size n={sample.n} is below n_params + 2 = {n_params + 2}"
        )
    return warnings


class ResidualModel:
    """A conditional moment model E[h(Z_t, theta) | X_t] = 0.

    Subclasses implement the vectorised :meth:`residuals` (n x l) and
    :meth:`jacobian` (n x l x d). Models with intercepts set ``n_intercepts``
    (d1) and ``intercept_signs``; the parameter vector is then ordered as
    (theta_1, theta_2) and the residual must have the shift structure

        h(z, theta) = P @ (signs * theta_1) + m(z, theta_2),

    with P the first d1 columns of the l x l identity. ``m`` is obtained by
    evaluating ``h`` with theta_1 = 0, so subclasses do not implement it.
    """

    n_params: int
    n_outputs: int
    n_intercepts: int = 0
    intercept_signs: Optional[np.ndarray] = None
    param_names: Sequence[str] = ()

    def residuals(self, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, z: np.ndarray, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def start(self, sample: Sample) -> np.ndarray:
        """Default starting point for optimisation."""
        return np.zeros(self.n_params)

    def _check_partition(self):
        d1 = self.n_intercepts
        if not 0 <= d1 <= self.n_params:
            raise ValueError(f"n_intercepts={d1} outside [0, {self.n_params}]")
        if d1 > self.n_outputs:
            raise ValueError(f"n_intercepts={d1} exceeds output dimension {self.n_outputs}")
        if d1 and self.intercept_signs is None:
            self.intercept_signs = np.ones(d1)
        if not self.param_names:
            self.param_names = tuple(f"theta{i + 1}" for i in range(self.n_params))

    # row-at-a-time interface
    def evaluate_row(self, z_row, theta) -> np.ndarray:
        return self.residuals(np.atleast_2d(np.asarray(z_row, float)), np.asarray(theta, float))[0]

    def jacobian_row(self, z_row, theta) -> np.ndarray:
        return self.jacobian(np.atleast_2d(np.asarray(z_row, float)), np.asarray(theta, float))[0]

    # intercept partition
    @property
    def has_intercepts(self) -> bool:
        return self.n_intercepts > 0

    def split(self, theta):
        theta = np.asarray(theta, float)
        return theta[: self.n_intercepts], theta[self.n_intercepts:]

    def m(self, z: np.ndarray, theta2: np.ndarray) -> np.ndarray:
        """Non-intercept part m(z, theta_2), i.e. h with theta_1 = 0."""
        full = np.concatenate([np.zeros(self.n_intercepts), np.asarray(theta2, float)])
        return self.residuals(z, full)

    def m_jacobian(self, z: np.ndarray, theta2: np.ndarray) -> np.ndarray:
        full = np.concatenate([np.zeros(self.n_intercepts), np.asarray(theta2, float)])
        return self.jacobian(z, full)[:, :, self.n_intercepts:]

    def reduced(self) -> "ResidualModel":
        """The model h -> m with the intercepts removed (parameters theta_2)."""
        if not self.has_intercepts:
            return self
        return _ReducedModel(self)


class _ReducedModel(ResidualModel):
    def __init__(self, parent: ResidualModel):
        self.parent = parent
        self.n_params = parent.n_params - parent.n_intercepts
        self.n_outputs = parent.n_outputs
        self.param_names = tuple(parent.param_names[parent.n_intercepts:])
        self._check_partition()

    def residuals(self, z, theta):
        return self.parent.m(z, theta)

    def jacobian(self, z, theta):
        return self.parent.m_jacobian(z, theta)

    def start(self, sample):
        return self.parent.start(sample)[self.parent.n_intercepts:]


class FunctionModel(ResidualModel):
    """User-supplied model built from row-wise callables.

    ``residual_fn(z_row, theta)`` returns a length-l vector; ``jacobian_fn``
    returns an l x d matrix. When ``jacobian_fn`` is omitted a central
    finite-difference Jacobian is used.
    """

    def __init__(self, residual_fn, n_params: int, n_outputs: int = 1,
                 jacobian_fn=None, n_intercepts: int = 0, intercept_signs=None,
                 param_names: Sequence[str] = ()):
        self.residual_fn = residual_fn
        self.jacobian_fn = jacobian_fn
        self.n_params = n_params
        self.n_outputs = n_outputs
        self.n_intercepts = n_intercepts
        self.intercept_signs = None if intercept_signs is None else np.asarray(intercept_signs, float)
        self.param_names = tuple(param_names)
        self._check_partition()

    def residuals(self, z, theta):
        theta = np.asarray(theta, float)
        return np.array([np.atleast_1d(self.residual_fn(row, theta)) for row in z], dtype=float)

    def jacobian(self, z, theta):
        theta = np.asarray(theta, float)
        if self.jacobian_fn is not None:
            out = np.array([self.jacobian_fn(row, theta) for row in z], dtype=float)
            return out.reshape(len(z), self.n_outputs, self.n_params)
        return finite_difference_jacobian(self, z, theta)


def finite_difference_jacobian(model: ResidualModel, z, theta, rel_step: float = 1e-6):
    """Central finite differences of ``model.residuals``, shape (n, l, d)."""
    theta = np.asarray(theta, float)
    out = np.empty((len(z), model.n_outputs, theta.size))
    for j in range(theta.size):
        h = rel_step * max(1.0, abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        out[:, :, j] = (model.residuals(z, up) - model.residuals(z, dn)) / (2 * h)
    return out


def check_jacobian(model: ResidualModel, sample: Sample, n_points: int = 50,
                   scale: float = 1.0, seed=0, center=None) -> float:
    """Largest relative gap between ``model.jacobian`` and finite differences.

    Evaluates at ``n_points`` random (row, theta) pairs, theta drawn as
    ``center + scale * N(0, I)``.
    """
    rng = np.random.default_rng(seed)
    center = np.zeros(model.n_params) if center is None else np.asarray(center, float)
    worst = 0.0
    for _ in range(n_points):
        t = rng.integers(sample.n)
        theta = center + scale * rng.standard_normal(model.n_params)
        row = sample.z[t:t + 1]
        analytic = model.jacobian(row, theta)
        numeric = finite_difference_jacobian(model, row, theta)
        gap = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1.0)
        worst = max(worst, gap)
    return worst


@dataclass
class EstimateResult:
    """Point estimate plus finite-sample covariance and optimiser diagnostics."""

    theta: np.ndarray
    vcov: np.ndarray
    objective: float
    converged: bool
    iterations: int
    method: str
    param_names: Sequence[str] = ()
    n_intercepts: int = 0
    grad_norm: float = float("nan")
    messages: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, float)
        if self.vcov is None:
            self.vcov = np.full((self.theta.size, self.theta.size), np.nan)
        self.vcov = np.asarray(self.vcov, float)
        if not self.param_names:
            self.param_names = tuple(f"theta{i + 1}" for i in range(self.theta.size))

    @property
    def std_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.vcov))

    @property
    def t_stats(self) -> np.ndarray:
        return self.theta / self.std_errors

    def summary(self) -> str:
        lines = [f"method: {self.method}  objective: {self.objective:.6g}  "
                 f"converged: {self.converged}  iterations: {self.iterations}"]
        lines.append(f"{'parameter':<14}{'estimate':>12}{'std.err':>12}{'t':>9}")
        for name, est, se, t in zip(self.param_names, self.theta, self.std_errors, self.t_stats):
            lines.append(f"{name:<14}{est:>12.5f}{se:>12.5f}{t:>9.2f}")
        return "\n".join(lines)
