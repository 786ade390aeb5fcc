"""Command-line front end: ``mddest fit`` and ``mddest simulate``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 estimation
did not converge.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from .core import Sample, SampleError
from .estimators import OptimizerConfig, estimate
from .models import LinearModel, TarModel, ar_model, embed, var_model
from .montecarlo import emit_table, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NOCONV = 0, 2, 3, 4

SIMULATE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "mddest simulate config",
    "type": "object",
    "required": ["dgp", "n", "R"],
    "additionalProperties": False,
    "properties": {
        "dgp": {"oneOf": [
            {"type": "integer", "minimum": 1, "maximum": 16},
            {"type": "array", "minItems": 1,
             "items": {"type": "integer", "minimum": 1, "maximum": 16}},
        ]},
        "n": {"oneOf": [
            {"type": "integer", "minimum": 10},
            {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 10}},
        ]},
        "R": {"type": "integer", "minimum": 2},
        "estimators": {"type": "array", "minItems": 1, "uniqueItems": True,
                       "items": {"enum": ["mdd", "dl"]}},
        "seed": {"type": "integer", "minimum": 0},
        "burn_in": {"type": "integer", "minimum": 0},
        "grad_tol": {"type": "number", "exclusiveMinimum": 0},
        "multistart": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class FitConfig:
    data: Path
    model: str
    response: list = field(default_factory=list)
    regressors: list = field(default_factory=list)
    conditioning: Optional[str] = None
    lags: int = 1
    threshold_lag: int = 1
    threshold: float = 0.0
    intercept: Optional[bool] = None
    estimator: str = "mdd"
    fmt: str = "text"
    seed: int = 0
    log_returns_pct: bool = False
    optimizer: dict = field(default_factory=dict)


def read_csv(path) -> tuple[list, np.ndarray]:
    """Read a header + numeric-body CSV.

    Rows and columns in error messages are 1-based and count data rows only
    (the header is not row 1).
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open data file: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError("data file is empty") from None
        rows = []
        for i, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"row {i}: expected {len(header)} fields, found {len(rec)}")
            vals = []
            for j, cell in enumerate(rec, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(f"non-numeric value {cell!r} at row {i}, column {j}") from None
            rows.append(vals)
    if not rows:
        raise DataError("data file has no data rows")
    return header, np.array(rows)


def _columns(header, names, what):
    idx = []
    for name in names:
        if name in header:
            idx.append(header.index(name))
        else:
            raise ConfigError(f"{what} column {name!r} not found in data (columns: {header})")
    return idx


def build_problem(cfg: FitConfig):
    """Turn a fit configuration into (model, sample, description)."""
    header, data = read_csv(cfg.data)
    if cfg.log_returns_pct:
        if np.any(data <= 0):
            raise DataError("--log-returns-pct needs strictly positive prices")
        data = 100.0 * np.diff(np.log(data), axis=0)

    kind = cfg.model
    if kind in ("ar", "var", "tar"):
        names = cfg.response or (header if kind == "var" else header[:1])
        series = data[:, _columns(header, names, "response")]
        dim = series.shape[1]
        if kind in ("ar", "tar") and dim != 1:
            raise ConfigError(f"{kind} needs exactly one response column")
        intercept = True if cfg.intercept is None else cfg.intercept
        p = cfg.lags
        if p < 1:
            raise ConfigError("--lags must be >= 1")
        if kind == "tar":
            model = TarModel(p, cfg.threshold_lag, cfg.threshold, intercept)
            own = model.max_lag
            default_k = max(4, own)
        else:
            model = var_model(dim, p, intercept) if kind == "var" else ar_model(p, intercept)
            own = p
            default_k = p
        spec = cfg.conditioning or f"lags:{default_k}"
        if not spec.startswith("lags:"):
            raise ConfigError("time-series models take --conditioning lags:K")
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad conditioning spec {spec!r}") from None
        if k < 1:
            raise ConfigError("conditioning set must be nonempty")
        max_lag = max(own, k)
        if len(series) <= max_lag:
            raise DataError(f"{len(series)} rows are too few for {max_lag} lags")
        emb = embed(series, max_lag)
        z = emb[:, : dim * (own + 1)]
        x = emb[:, dim: dim * (k + 1)]
        desc = f"{kind}(p={p}) conditioning on lags 1..{k}, {max_lag} initial rows dropped"
    elif kind == "linear":
        if not cfg.response or not cfg.regressors:
            raise ConfigError("linear model needs --response and --regressors")
        yi = _columns(header, cfg.response, "response")
        xi = _columns(header, cfg.regressors, "regressor")
        cond = cfg.conditioning.split(",") if cfg.conditioning else cfg.regressors
        ci = _columns(header, [c.strip() for c in cond if c.strip()], "conditioning")
        if not ci:
            raise ConfigError("conditioning set must be nonempty")
        model = LinearModel(len(yi), len(xi), intercept=bool(cfg.intercept))
        z = data[:, yi + xi]
        x = data[:, ci]
        desc = f"linear model, conditioning on {', '.join(header[c] for c in ci)}"
    else:
        raise ConfigError(f"unknown model {kind!r}")

    if len(z) < model.n_params + 2:
        raise DataError(f"only {len(z)} usable rows for {model.n_params} parameters")
    try:
        sample = Sample(z, x)
    except SampleError as exc:
        raise DataError(str(exc)) from exc
    return model, sample, desc


def _json_number(x):
    """Finite floats pass through; NaN and inf become null so the output stays valid JSON."""
    x = float(x)
    return x if np.isfinite(x) else None


def fit_report(cfg: FitConfig) -> tuple[str, bool]:
    model, sample, desc = build_problem(cfg)
    ocfg = OptimizerConfig(seed=cfg.seed, **cfg.optimizer)
    res = estimate(model, sample, cfg.estimator, ocfg)
    se = res.std_errors
    t = res.theta / se
    sig = np.abs(t) > 1.96
    regimes = model.regime_coefficients(res.theta, res.vcov) if isinstance(model, TarModel) else None

    if cfg.fmt == "json":
        doc = {
            "model": cfg.model, "estimator": cfg.estimator, "method": res.method,
            "n": sample.n, "description": desc, "converged": res.converged,
            "objective": _json_number(res.objective), "iterations": res.iterations,
            "parameters": [
                {"name": nm, "estimate": _json_number(e), "std_error": _json_number(s),
                 "t_stat": _json_number(tt),
                 "significant_5pct": bool(g)}
                for nm, e, s, tt, g in zip(res.param_names, res.theta, se, t, sig)
            ],
            "messages": res.messages,
        }
        if regimes:
            doc["regimes"] = {k: {"estimates": [_json_number(e) for e in v[0]],
                                  "std_errors": [_json_number(e) for e in v[1]]}
                              for k, v in regimes.items()}
        out = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    elif cfg.fmt == "csv":
        lines = ["parameter,estimate,std_error,t_stat,significant_5pct"]
        for nm, e, s, tt, g in zip(res.param_names, res.theta, se, t, sig):
            lines.append(f"{nm},{e:.17g},{s:.17g},{tt:.17g},{int(g)}")
        out = "\n".join(lines) + "\n"
    else:
        body = res.summary().splitlines()
        lines = [f"{desc}; n = {sample.n}", body[0], body[1] + "  sig"]
        for line, g in zip(body[2:], sig):
            lines.append(line + ("    *" if g else ""))
        if regimes:
            lines.append("")
            for name, (est, err) in regimes.items():
                cols = "  ".join(f"{e:8.3f} ({s:.3f})" for e, s in zip(est, err))
                lines.append(f"{name:<6} regime: {cols}")
        for msg in res.messages:
            lines.append(f"note: {msg}")
        lines.append("* |t| > 1.96 (5% level)")
        out = "\n".join(lines) + "\n"
    return out, res.converged


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML/JSON: {exc}") from exc
    if cfg is None:
        cfg = {}
    try:
        jsonschema.validate(cfg, SIMULATE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config schema error at {where}: {exc.message}") from None
    return cfg


def simulate(cfg: dict, out_dir=None, n_jobs: int = 1):
    dgps = cfg["dgp"] if isinstance(cfg["dgp"], list) else [cfg["dgp"]]
    ns = cfg["n"] if isinstance(cfg["n"], list) else [cfg["n"]]
    ests = cfg.get("estimators", ["mdd", "dl"])
    opt = {k: cfg[k] for k in ("grad_tol", "multistart") if k in cfg}
    summaries = []
    for dgp in dgps:
        for n in ns:
            res = run_experiment(dgp, n, cfg["R"], ests, seed=cfg.get("seed", 0), n_jobs=n_jobs,
                                 burn_in=cfg.get("burn_in", 200), config=OptimizerConfig(**opt))
            summaries.extend(res[e] for e in ests)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fmt, ext in (("csv", "csv"), ("json", "json"), ("text-grid", "txt")):
            (out / f"summary.{ext}").write_text(emit_table(summaries, fmt), encoding="utf-8")
    return summaries


def _parser():
    p = argparse.ArgumentParser(prog="mddest", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a model to CSV data")
    f.add_argument("--data", required=True, help="CSV file with a header row")
    f.add_argument("--model", required=True, choices=["ar", "var", "tar", "linear"])
    f.add_argument("--response", default="", help="comma-separated response column(s)")
    f.add_argument("--regressors", default="", help="comma-separated regressors (linear)")
    f.add_argument("--lags", type=int, default=1)
    f.add_argument("--threshold-lag", type=int, default=1)
    f.add_argument("--threshold", type=float, default=0.0)
    f.add_argument("--conditioning", default=None,
                   help="'lags:K' for time-series models, column list for linear")
    g = f.add_mutually_exclusive_group()
    g.add_argument("--intercept", dest="intercept", action="store_true", default=None)
    g.add_argument("--no-intercept", dest="intercept", action="store_false")
    f.add_argument("--estimator", choices=["mdd", "dl"], default="mdd")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--format", dest="fmt", choices=["text", "csv", "json"], default="text")
    f.add_argument("--log-returns-pct", action="store_true",
                   help="replace every column by 100 * diff(log(column))")
    f.add_argument("--grad-tol", type=float)
    f.add_argument("--multistart", type=int)
    f.add_argument("--max-iter", type=int)

    s = sub.add_parser("simulate", help="run a Monte-Carlo experiment from a config file")
    s.add_argument("--config", required=True, help="YAML or JSON experiment config")
    s.add_argument("--out-dir", default=None)
    s.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--format", dest="fmt", choices=["text-grid", "csv", "json"], default="text-grid")
    return p


def _split(s):
    return [c.strip() for c in s.split(",") if c.strip()]


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "fit":
            opt = {k: v for k, v in (("grad_tol", args.grad_tol), ("multistart", args.multistart),
                                      ("max_iter", args.max_iter)) if v is not None}
            cfg = FitConfig(data=Path(args.data), model=args.model, response=_split(args.response),
                            regressors=_split(args.regressors), conditioning=args.conditioning,
                            lags=args.lags, threshold_lag=args.threshold_lag,
                            threshold=args.threshold, intercept=args.intercept,
                            estimator=args.estimator, fmt=args.fmt, seed=args.seed,
                            log_returns_pct=args.log_returns_pct, optimizer=opt)
            try:
                text, converged = fit_report(cfg)
            except ValueError as exc:
                if isinstance(exc, (ConfigError, DataError)):
                    raise
                raise ConfigError(str(exc)) from exc
            sys.stdout.write(text)
            if not converged:
                print("estimation did not converge", file=sys.stderr)
                return EXIT_NOCONV
            return EXIT_OK
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        summaries = simulate(cfg, args.out_dir, args.jobs)
        sys.stdout.write(emit_table(summaries, args.fmt))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
