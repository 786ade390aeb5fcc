"""Replication driver and bias / ASD / ESD tables."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .dgp import DgpSpec, generate, replication_seed
from .estimators import OptimizerConfig, estimate
from .mdd import distance_matrix

COLUMNS = ("estimator", "parameter", "n", "bias", "asd", "esd", "dgp", "requested", "converged")


@dataclass
class McSummary:
    """Aggregates over the converged replications of one (design, n, estimator) cell.

    ``estimates`` and ``std_errors`` keep the per-replication values
    (converged replications only, in replication order).
    """

    dgp: int
    n: int
    estimator: str
    param_names: tuple
    theta0: np.ndarray
    bias: np.ndarray
    asd: np.ndarray
    esd: np.ndarray
    requested: int
    converged: int
    runtime: float = 0.0
    estimates: Optional[np.ndarray] = field(default=None, repr=False)
    std_errors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def failed(self) -> int:
        return self.requested - self.converged

    def coverage(self, level_z: float = 1.959963984540054) -> np.ndarray:
        """Share of replications whose normal interval covers theta0, per parameter."""
        lo = self.estimates - level_z * self.std_errors
        hi = self.estimates + level_z * self.std_errors
        return np.mean((lo <= self.theta0) & (self.theta0 <= hi), axis=0)

    def rows(self) -> list:
        return [
            dict(estimator=self.estimator, parameter=name, n=self.n, bias=float(self.bias[j]),
                 asd=float(self.asd[j]), esd=float(self.esd[j]), dgp=self.dgp,
                 requested=self.requested, converged=self.converged)
            for j, name in enumerate(self.param_names)
        ]


def _one_replication(dgp_id, n, r, seed, burn_in, estimators, config):
    rep_seed = replication_seed(seed, r)
    data = generate(DgpSpec(dgp_id, n, rep_seed, burn_in))
    cfg = replace(config, seed=rep_seed)
    dist = distance_matrix(data.sample)
    out = {}
    for name in estimators:
        t0 = time.perf_counter()
        try:
            kw = {"dist": dist} if name == "mdd" else {}
            res = estimate(data.model, data.sample, name, cfg, **kw)
            se = res.std_errors
            ok = bool(res.converged and np.all(np.isfinite(se)) and np.all(np.isfinite(res.theta)))
            out[name] = (ok, res.theta, se, time.perf_counter() - t0)
        except (ArithmeticError, ValueError, np.linalg.LinAlgError):
            d = data.model.n_params
            out[name] = (False, np.full(d, np.nan), np.full(d, np.nan), time.perf_counter() - t0)
    return data.theta0, tuple(data.model.param_names), out


def summarize(dgp_id, n, estimator, param_names, theta0, thetas, ses, ok, runtime=0.0) -> McSummary:
    """Build a summary from per-replication estimates; non-converged ones are dropped."""
    thetas = np.atleast_2d(np.asarray(thetas, float))
    ses = np.atleast_2d(np.asarray(ses, float))
    ok = np.asarray(ok, bool)
    est, se = thetas[ok], ses[ok]
    theta0 = np.asarray(theta0, float)
    k = len(est)
    d = theta0.size
    bias = est.mean(axis=0) - theta0 if k else np.full(d, np.nan)
    esd = est.std(axis=0, ddof=1) if k > 1 else np.full(d, np.nan)
    asd = se.mean(axis=0) if k else np.full(d, np.nan)
    return McSummary(dgp_id, n, estimator, tuple(param_names), theta0, bias, asd, esd,
                     requested=len(ok), converged=k, runtime=runtime, estimates=est, std_errors=se)


def run_experiment(dgp_id: int, n: int, replications: int, estimators: Sequence[str] = ("mdd", "dl"),
                   seed: int = 0, n_jobs: int = 1, burn_in: int = 200,
                   config: Optional[OptimizerConfig] = None) -> dict:
    """Run ``replications`` draws of one design and summarise each estimator.

    Replication ``r`` uses the stream ``replication_seed(seed, r)`` for both
    data and multistart perturbations, so the result does not depend on
    ``n_jobs``. Per-replication failures are counted, never raised.

    Returns:
        dict mapping estimator name to :class:`McSummary`.
    """
    if replications < 2:
        raise ValueError("replications must be >= 2")
    for name in estimators:
        if name not in ("mdd", "dl"):
            raise ValueError(f"unknown estimator {name!r}")
    config = config or OptimizerConfig()
    jobs = (delayed(_one_replication)(dgp_id, n, r, seed, burn_in, tuple(estimators), config)
            for r in range(replications))
    if n_jobs == 1:
        results = [fn(*a, **kw) for fn, a, kw in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(jobs)
    theta0, names = results[0][0], results[0][1]
    out = {}
    for name in estimators:
        oks = [r[2][name][0] for r in results]
        thetas = [r[2][name][1] for r in results]
        ses = [r[2][name][2] for r in results]
        runtime = sum(r[2][name][3] for r in results)
        out[name] = summarize(dgp_id, n, name, names, theta0, thetas, ses, oks, runtime)
    return out


def _flatten(summaries) -> list:
    if isinstance(summaries, (McSummary, dict)):
        summaries = [summaries]
    flat = []
    for s in summaries:
        if isinstance(s, dict):
            flat.extend(s.values())
        else:
            flat.append(s)
    return flat


def _text_grid(rows) -> str:
    ns = sorted({r["n"] for r in rows})
    keys = []
    cells = {}
    for r in rows:
        key = (r["dgp"], r["estimator"], r["parameter"])
        if key not in cells:
            keys.append(key)
            cells[key] = {}
        cells[key][r["n"]] = r
    head1 = f"{'':<8}{'':<5}{'':<10}" + "".join(f"{'n=' + str(n):^27}" for n in ns)
    head2 = f"{'':<8}{'':<5}{'':<10}" + "".join(f"{'Bias':>9}{'ASD':>9}{'ESD':>9}" for _ in ns)
    lines = [head1, head2]
    last = None
    for key in keys:
        dgp, est, par = key
        label = f"DGP {dgp}" if dgp != last else ""
        if dgp != last and last is not None:
            lines.append("")
        last = dgp
        line = f"{label:<8}{est.upper():<5}{par:<10}"
        for n in ns:
            r = cells[key].get(n)
            line += (f"{r['bias']:>9.3f}{r['asd']:>9.3f}{r['esd']:>9.3f}" if r else " " * 27)
        lines.append(line)
    return "\n".join(lines) + "\n"


def emit_table(summaries, fmt: str = "csv") -> str:
    """Render summaries as ``csv``, ``json`` or ``text-grid``.

    Column order is fixed: estimator, parameter, n, bias, asd, esd, dgp,
    requested, converged. Floats are written with 17 significant digits.
    """
    rows = [row for s in _flatten(summaries) for row in s.rows()]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([format(r[c], ".17g") if isinstance(r[c], float) else r[c] for c in COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        # statistics of a cell with no converged replications are NaN; JSON has no NaN
        doc = [{c: (None if isinstance(r[c], float) and not np.isfinite(r[c]) else r[c]) for c in COLUMNS}
               for r in rows]
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if fmt == "text-grid":
        return _text_grid(rows)
    raise ValueError(f"unknown table format {fmt!r}")


def parse_table_csv(text: str) -> list:
    """Inverse of ``emit_table(..., 'csv')``: list of row dicts with typed values."""
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for r in reader:
        out.append(dict(estimator=r["estimator"], parameter=r["parameter"], n=int(r["n"]),
                        bias=float(r["bias"]), asd=float(r["asd"]), esd=float(r["esd"]),
                        dgp=int(r["dgp"]), requested=int(r["requested"]),
                        converged=int(r["converged"])))
    return out


def rows_to_summaries(rows: Iterable[dict]) -> list:
    """Group parsed rows back into :class:`McSummary` objects (without raw draws)."""
    groups = {}
    for r in rows:
        groups.setdefault((r["dgp"], r["n"], r["estimator"]), []).append(r)
    out = []
    for (dgp, n, est), rs in groups.items():
        out.append(McSummary(dgp, n, est, tuple(r["parameter"] for r in rs), np.full(len(rs), np.nan),
                             np.array([r["bias"] for r in rs]), np.array([r["asd"] for r in rs]),
                             np.array([r["esd"] for r in rs]), rs[0]["requested"], rs[0]["converged"]))
    return out
