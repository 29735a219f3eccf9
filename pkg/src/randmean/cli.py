"""Batch front door: parse a run configuration, dispatch, write results.

Every run writes, into --out-dir: results.csv (sigma,value,err rows with
17-significant-digit floats), metadata.json (resolved config echo plus
library versions), and plot.py (a self-contained script that replots the
results).  Reruns of an identical configuration reproduce the output files
byte for byte; wall-clock timing goes to stderr only.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .measures import BaseMeasure, build_atomic_measure, measure_from_json
from .models import (
    DirichletGamma,
    ExtendedGamma,
    GeneralizedGamma,
    NrmiModel,
    SampleSummary,
    Stable,
    StepFunction,
)
from .numerics import DistributionGrid, QuadratureConfig, QuadratureError
from .prior import prior_cdf_grid, prior_density_grid
from .posterior import PosteriorMeanQuery, posterior_cdf, posterior_density
from .mixtures import GaussianKernel, MixtureData, mixture_posterior_cdf, mixture_posterior_density
from .pdprocess import PdModel, pd_fdd_density, pd_mean_cdf, stable_predictive
from .simulate import RngSpec, run_oracle_suite, sample_posterior_mean, sample_prior_mean
from ._parallel import default_threads

COMMANDS = (
    "prior-cdf",
    "prior-density",
    "posterior-density",
    "posterior-cdf",
    "mixture-density",
    "mixture-cdf",
    "pd-cdf",
    "pd-fdd",
    "predictive",
    "simulate",
    "validate",
)


class ConfigError(ValueError):
    """Bad flags, unreadable files, or schema violations (exit code 2)."""


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------

def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def model_from_spec(spec: dict) -> NrmiModel:
    if not isinstance(spec, dict) or "variant" not in spec:
        raise ConfigError("model spec must be an object with a 'variant' field")
    variant = spec["variant"]
    try:
        if variant == "dirichlet_gamma":
            return DirichletGamma(measure_from_json(spec["base"]))
        if variant == "extended_gamma":
            beta = spec["beta"]
            if isinstance(beta, dict):
                beta = StepFunction(tuple(beta["breaks"]), tuple(beta["values"]))
            else:
                beta = float(beta)
            return ExtendedGamma(measure_from_json(spec["base"]), beta)
        if variant == "generalized_gamma":
            if "tau" in spec:
                return GeneralizedGamma.from_raw(
                    float(spec["gamma"]), float(spec["tau"]), measure_from_json(spec["alpha"])
                )
            return GeneralizedGamma(
                float(spec["gamma"]), float(spec["beta"]), measure_from_json(spec["p0"])
            )
        if variant == "stable":
            return Stable(float(spec["gamma"]), measure_from_json(spec["p0"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model spec: {exc}") from exc
    raise ConfigError(f"unknown model variant {variant!r}")


def g_from_spec(spec) -> Any:
    """Mean functions: 'identity', 'constant:c', 'indicator:lo:hi', or a
    table {'type': 'table', 'values': [[x, g(x)], ...]}."""
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "identity":
            return lambda x: np.asarray(x, dtype=float)
        if kind == "constant":
            c = float(spec["value"])
            return lambda x: np.full(np.shape(x), c)
        if kind == "indicator":
            lo, hi = float(spec["lo"]), float(spec["hi"])
            return lambda x: ((np.asarray(x) >= lo) & (np.asarray(x) < hi)).astype(float)
        if kind == "table":
            pairs = spec["values"]
            xs = np.array([p[0] for p in pairs], dtype=float)
            vs = np.array([p[1] for p in pairs], dtype=float)
            order = np.argsort(xs)
            xs, vs = xs[order], vs[order]

            def table_g(x):
                x_arr = np.atleast_1d(np.asarray(x, dtype=float))
                idx = np.clip(np.searchsorted(xs, x_arr), 0, xs.size - 1)
                near = np.abs(xs[idx] - x_arr) <= np.abs(xs[np.maximum(idx - 1, 0)] - x_arr)
                idx = np.where(near, idx, np.maximum(idx - 1, 0))
                if not np.allclose(xs[idx], x_arr, rtol=0.0, atol=1e-9):
                    raise ConfigError("table g is not defined at a required location")
                out = vs[idx]
                return out if np.ndim(x) else float(out[0])

            return table_g
        raise ConfigError(f"unknown g type {kind!r}")
    text = str(spec)
    if os.path.exists(text):
        return g_from_spec(_load_json(text))
    parts = text.split(":")
    if parts[0] == "identity":
        return lambda x: np.asarray(x, dtype=float)
    if parts[0] == "constant" and len(parts) == 2:
        c = float(parts[1])
        return lambda x: np.full(np.shape(x), c)
    if parts[0] == "indicator" and len(parts) == 3:
        lo, hi = float(parts[1]), float(parts[2])
        return lambda x: ((np.asarray(x) >= lo) & (np.asarray(x) < hi)).astype(float)
    raise ConfigError(f"cannot parse g spec {text!r}")


def sample_from_spec(spec: dict) -> SampleSummary:
    if not isinstance(spec, dict) or "distinct" not in spec:
        raise ConfigError("sample spec must be an object with a 'distinct' field")
    try:
        pairs = [(float(x), int(m)) for x, m in spec["distinct"]]
        return SampleSummary(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad sample spec: {exc}") from exc


def kernel_from_spec(text: str) -> GaussianKernel:
    parts = str(text).split(":")
    if parts[0] == "gaussian" and len(parts) == 2:
        try:
            return GaussianKernel(float(parts[1]))
        except ValueError as exc:
            raise ConfigError(f"bad kernel scale: {exc}") from exc
    raise ConfigError(f"unknown kernel {text!r} (expected gaussian:scale)")


def grid_from_spec(text: str) -> np.ndarray:
    try:
        lo_s, hi_s, n_s = str(text).split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {text!r} (expected lo:hi:n): {exc}") from exc
    if not (hi > lo and n >= 2):
        raise ConfigError("grid needs lo < hi and n >= 2")
    return np.linspace(lo, hi, n)


@dataclass
class RunConfig:
    """Resolved run description; serializes into metadata.json and back."""

    command: str
    model: dict | None = None
    g: Any = None
    sample: dict | None = None
    data: dict | None = None
    kernel: str | None = None
    grid: str | None = None
    gamma: float | None = None
    theta: float | None = None
    p0: dict | None = None
    p: list | None = None
    eval_point: list | None = None
    n: int | None = None
    seed: int = 0
    eps: float = 1e-6
    suite: str | None = None
    quadrature: dict = field(default_factory=dict)
    threads: int = 1
    out_dir: str = "."

    def quad_config(self) -> QuadratureConfig:
        defaults = QuadratureConfig()
        q = self.quadrature
        return QuadratureConfig(
            abs_tol=float(q.get("abs_tol", defaults.abs_tol)),
            rel_tol=float(q.get("rel_tol", defaults.rel_tol)),
            max_subdivisions=int(q.get("max_subdivisions", defaults.max_subdivisions)),
            tail_threshold=float(q.get("tail_threshold", defaults.tail_threshold)),
            t_min=float(q.get("t_min", defaults.t_min)),
        )

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if v is not None}
        out.pop("out_dir", None)
        return out

    @staticmethod
    def from_json(obj: dict) -> "RunConfig":
        known = set(RunConfig.__dataclass_fields__)
        bad = set(obj) - known
        if bad:
            raise ConfigError(f"unknown config fields: {sorted(bad)}")
        return RunConfig(**obj)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randmean",
        description="Exact distributions of means of normalized random measures.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file holding the full run configuration")
    parser.add_argument("--model", help="model JSON file")
    parser.add_argument("--g", help="mean function: identity | constant:c | indicator:lo:hi | file")
    parser.add_argument("--sample", help="sample JSON file ({'distinct': [[x, n], ...]})")
    parser.add_argument("--data", help="mixture data JSON file ({'y': [...]})")
    parser.add_argument("--kernel", help="mixture kernel, e.g. gaussian:0.5")
    parser.add_argument("--grid", help="evaluation grid lo:hi:n")
    parser.add_argument("--gamma", type=float, help="stability index in (0,1)")
    parser.add_argument("--theta", type=float, help="PD second parameter")
    parser.add_argument("--p0", help="prior-guess measure JSON file")
    parser.add_argument("--p", help="comma-separated cell probabilities (pd-fdd)")
    parser.add_argument("--eval", dest="eval_point", help="comma-separated simplex point (pd-fdd)")
    parser.add_argument("--n", type=int, help="number of replicates")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--eps", type=float, default=1e-6, help="simulator truncation eps_rel")
    parser.add_argument("--suite", help="validation suite name")
    parser.add_argument("--abs-tol", type=float)
    parser.add_argument("--rel-tol", type=float)
    parser.add_argument("--t-min", type=float)
    parser.add_argument("--tail-threshold", type=float)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out-dir", default=".")
    return parser


def config_from_args(argv: list[str]) -> RunConfig:
    args = _build_parser().parse_args(argv)
    if args.config:
        obj = _load_json(args.config)
        cfg = RunConfig.from_json(obj)
        cfg.out_dir = args.out_dir
        return cfg
    quadrature = {}
    for key, val in (
        ("abs_tol", args.abs_tol),
        ("rel_tol", args.rel_tol),
        ("t_min", args.t_min),
        ("tail_threshold", args.tail_threshold),
    ):
        if val is not None:
            quadrature[key] = val
    return RunConfig(
        command=args.command,
        model=_load_json(args.model) if args.model else None,
        g=args.g,
        sample=_load_json(args.sample) if args.sample else None,
        data=_load_json(args.data) if args.data else None,
        kernel=args.kernel,
        grid=args.grid,
        gamma=args.gamma,
        theta=args.theta,
        p0=_load_json(args.p0) if args.p0 else None,
        p=[float(v) for v in args.p.split(",")] if args.p else None,
        eval_point=[float(v) for v in args.eval_point.split(",")] if args.eval_point else None,
        n=args.n,
        seed=args.seed,
        eps=args.eps,
        suite=args.suite,
        quadrature=quadrature,
        threads=args.threads if args.threads is not None else default_threads(),
        out_dir=args.out_dir,
    )


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _require(cfg: RunConfig, *fields: str):
    missing = [f for f in fields if getattr(cfg, f) is None]
    if missing:
        raise ConfigError(f"{cfg.command} requires --{', --'.join(m.replace('_', '-') for m in missing)}")


def _grid_result(cfg: RunConfig) -> DistributionGrid:
    qc = cfg.quad_config()
    cmd = cfg.command
    if cmd in ("prior-cdf", "prior-density", "posterior-density", "posterior-cdf"):
        _require(cfg, "model", "g", "grid")
        model = model_from_spec(cfg.model)
        g = g_from_spec(cfg.g)
        grid = grid_from_spec(cfg.grid)
        if cmd == "prior-cdf":
            return prior_cdf_grid(model, g, grid, qc, threads=cfg.threads)
        if cmd == "prior-density":
            return prior_density_grid(model, g, grid, qc, threads=cfg.threads)
        sample = sample_from_spec(cfg.sample) if cfg.sample else SampleSummary.empty()
        query = PosteriorMeanQuery(model, g, sample, grid, qc)
        if cmd == "posterior-density":
            return posterior_density(query, threads=cfg.threads)
        return posterior_cdf(query, threads=cfg.threads)
    if cmd in ("mixture-density", "mixture-cdf"):
        _require(cfg, "model", "data", "kernel", "grid")
        model = model_from_spec(cfg.model)
        kernel = kernel_from_spec(cfg.kernel)
        if not isinstance(cfg.data, dict) or "y" not in cfg.data:
            raise ConfigError("data spec must be an object with a 'y' field")
        g_spec = cfg.g if cfg.g else "identity"
        g = "identity" if g_spec == "identity" else g_from_spec(g_spec)
        data = MixtureData(tuple(float(v) for v in cfg.data["y"]), kernel, g)
        grid = grid_from_spec(cfg.grid)
        fn = mixture_posterior_density if cmd == "mixture-density" else mixture_posterior_cdf
        return fn(model, data, grid, qc, threads=cfg.threads)
    if cmd == "pd-cdf":
        _require(cfg, "gamma", "theta", "p0", "g", "grid")
        pd = PdModel(cfg.gamma, cfg.theta, measure_from_json(cfg.p0))
        g = g_from_spec(cfg.g)
        grid = grid_from_spec(cfg.grid)
        vals = [pd_mean_cdf(pd, g, float(s), qc) for s in grid]
        return DistributionGrid(grid, vals, np.zeros(grid.size))
    raise ConfigError(f"unhandled command {cfg.command}")


def _format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _csv_text(grid: DistributionGrid) -> str:
    lines = ["sigma,value,err"]
    for s, v, e in zip(grid.sigma, grid.values, grid.errors):
        lines.append(f"{_format_float(s)},{_format_float(v)},{_format_float(e)}")
    return "\n".join(lines) + "\n"


_PLOT_TEMPLATE = """#!/usr/bin/env python3
# Replot of a randmean {command} run; self-contained data below.
import matplotlib.pyplot as plt

sigma = {sigma}
value = {value}

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(sigma, value, marker="o", markersize=2.5, lw=1.0)
ax.set_xlabel("sigma")
ax.set_ylabel({ylabel!r})
ax.set_title({title!r})
ax.grid(alpha=0.3)
fig.tight_layout()
plt.show()
"""


def _plot_text(cfg: RunConfig, grid: DistributionGrid) -> str:
    ylabel = "CDF" if cfg.command.endswith("cdf") else "density"
    return _PLOT_TEMPLATE.format(
        command=cfg.command,
        sigma=[float(s) for s in grid.sigma],
        value=[float(v) for v in grid.values],
        ylabel=ylabel,
        title=f"randmean {cfg.command}",
    )


def _metadata(cfg: RunConfig) -> dict:
    import scipy

    return {
        "config": cfg.to_json(),
        "versions": {
            "randmean": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
    }


def _write_outputs(cfg: RunConfig, files: dict[str, str]) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(cfg.out_dir, name), "w") as fh:
            fh.write(text)


def run(argv: list[str]) -> int:
    """Execute one command; returns the process exit code."""
    t_start = time.perf_counter()
    try:
        cfg = config_from_args(argv)
        files: dict[str, str] = {}
        if cfg.command in (
            "prior-cdf", "prior-density", "posterior-density", "posterior-cdf",
            "mixture-density", "mixture-cdf", "pd-cdf",
        ):
            grid = _grid_result(cfg)
            files["results.csv"] = _csv_text(grid)
            files["plot.py"] = _plot_text(cfg, grid)
        elif cfg.command == "pd-fdd":
            _require(cfg, "theta", "p", "eval_point")
            val = pd_fdd_density(cfg.theta, cfg.p, cfg.eval_point)
            files["results.json"] = json.dumps(
                {"theta": cfg.theta, "p": cfg.p, "eval": cfg.eval_point, "density": val},
                indent=2, sort_keys=True,
            ) + "\n"
        elif cfg.command == "predictive":
            _require(cfg, "gamma", "sample")
            sample = sample_from_spec(cfg.sample)
            p0 = measure_from_json(cfg.p0) if cfg.p0 else build_atomic_measure([(0.0, 1.0)])
            new_mass, atom_masses = stable_predictive(cfg.gamma, p0, sample)
            files["weights.json"] = json.dumps(
                {
                    "new_value_mass": new_mass,
                    "atoms": [
                        {"location": x, "mass": m}
                        for x, m in zip(sample.locations, atom_masses)
                    ],
                },
                indent=2, sort_keys=True,
            ) + "\n"
        elif cfg.command == "simulate":
            _require(cfg, "model", "g", "n")
            model = model_from_spec(cfg.model)
            g = g_from_spec(cfg.g)
            rng = RngSpec(cfg.seed, 0)
            if cfg.sample:
                sample = sample_from_spec(cfg.sample)
                draws = sample_posterior_mean(model, sample, g, cfg.n, rng, cfg.eps)
            else:
                draws = sample_prior_mean(model, g, cfg.n, rng, cfg.eps)
            files["samples.csv"] = "sample\n" + "\n".join(_format_float(v) for v in draws) + "\n"
        elif cfg.command == "validate":
            _require(cfg, "suite")
            report = run_oracle_suite(cfg.suite, n_samples=cfg.n or 20000, seed=cfg.seed or 20240809, eps_rel=cfg.eps)
            files["report.json"] = json.dumps(report, indent=2, sort_keys=True) + "\n"
        else:
            raise ConfigError(f"unknown command {cfg.command!r}")
        files["metadata.json"] = json.dumps(_metadata(cfg), indent=2, sort_keys=True) + "\n"
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _write_outputs(cfg, files)
    print(f"wrote {', '.join(sorted(files))} to {cfg.out_dir} "
          f"in {time.perf_counter() - t_start:.2f}s", file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
