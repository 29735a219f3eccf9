"""Monte Carlo oracle: decreasing-jump simulation of the random measures.

Jumps are generated in decreasing order by inverting the Levy tail
N(x) = (expected number of jumps above x) at the arrival times of a unit
Poisson process; generation stops once the expected mass below the smallest
retained jump drops under eps_rel times the realized mass.  The tail inverse
is solved by bisection onto a dense log-log table once per (family, index)
and then evaluated by interpolation, so the per-jump cost is O(1) and exact
rate/mass scalings handle tilting and remixing without new tables:

    gamma  jumps:  N(x) = mass * E1(rate x)
    tilted stable: N(x) = mass * g/Gamma(1-g) * rate^g * T(rate x),
                   T(y) = (y^-g e^-y - Gamma(1-g, y)) / g
    stable jumps:  N(x) = mass / Gamma(1-g) * x^-g      (closed-form inverse)

Posterior sampling draws the latent tilt variable from a tabulated inverse
CDF, adds the fixed gamma-distributed jumps of the distinct observations,
and reuses the same tail machinery with the shifted rates.  All samplers are
deterministic functions of (seed, stream).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as sps

from .measures import BaseMeasure, g_values
from .models import (
    DirichletGamma,
    ExtendedGamma,
    GeneralizedGamma,
    NrmiModel,
    SampleSummary,
    Stable,
    _log_unnormalized_u,
    alpha_measure,
    beta_at,
)

__all__ = [
    "RngSpec",
    "JumpField",
    "sample_crm_jumps",
    "sample_prior_mean",
    "sample_posterior_mean",
    "ks_distance",
    "run_oracle_suite",
    "ORACLE_SUITES",
]

_MAX_BLOCKS = 4096


@dataclass(frozen=True)
class RngSpec:
    """Reproducibility handle: same (seed, stream) gives identical output."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), int(self.stream)])


@dataclass
class JumpField:
    """One realization: strictly decreasing jumps, their atom locations, and
    the expected mass carried by the discarded sub-threshold jumps."""

    jumps: np.ndarray
    locations: np.ndarray
    truncation_error_bound: float

    def __post_init__(self):
        if np.any(np.diff(self.jumps) >= 0):
            raise ValueError("jumps must be strictly decreasing")
        if self.truncation_error_bound < 0 or not np.isfinite(self.truncation_error_bound):
            raise ValueError("truncation bound must be finite and nonnegative")


# ---------------------------------------------------------------------------
# tail inverses
# ---------------------------------------------------------------------------

def _bisect_log(fn, targets_log: np.ndarray, lo: float, hi: float, iters: int = 90) -> np.ndarray:
    """Vector bisection of log fn(e^x) = target on the monotone-decreasing tail."""
    lo_v = np.full(targets_log.shape, lo)
    hi_v = np.full(targets_log.shape, hi)
    for _ in range(iters):
        mid = 0.5 * (lo_v + hi_v)
        val = fn(np.exp(mid))
        with np.errstate(divide="ignore"):
            too_high = np.log(val) > targets_log
        lo_v = np.where(too_high, mid, lo_v)
        hi_v = np.where(too_high, hi_v, mid)
    return 0.5 * (lo_v + hi_v)


class _TailTable:
    """log-log interpolation table for the inverse of a monotone Levy tail."""

    def __init__(self, fn, q_lo: float, q_hi: float, x_lo: float, x_hi: float, nodes: int = 4096):
        self.fn = fn
        self.x_bounds = (math.log(x_lo), math.log(x_hi))
        self.logq = np.linspace(math.log(q_lo), math.log(q_hi), nodes)
        self.logx = _bisect_log(fn, self.logq, self.x_bounds[0], self.x_bounds[1])

    def inverse(self, q: np.ndarray) -> np.ndarray:
        logq = np.log(q)
        if logq.size and (logq.min() < self.logq[0] or logq.max() > self.logq[-1]):
            out_mask = (logq < self.logq[0]) | (logq > self.logq[-1])
            inside = np.interp(logq, self.logq, self.logx)
            stragglers = _bisect_log(self.fn, logq[out_mask], *self.x_bounds)
            inside[out_mask] = stragglers
            return np.exp(inside)
        return np.exp(np.interp(logq, self.logq, self.logx))


_E1_TABLE: _TailTable | None = None
_GG_TABLES: dict[float, _TailTable] = {}
_REGGAMMA_TABLES: dict[float, tuple[np.ndarray, np.ndarray]] = {}


def _e1_table() -> _TailTable:
    global _E1_TABLE
    if _E1_TABLE is None:
        _E1_TABLE = _TailTable(sps.exp1, 1e-16, 1e4, 1e-290, 60.0)
    return _E1_TABLE


def _gg_base_tail(gamma: float):
    c = sps.gamma(1.0 - gamma)

    def tail(y):
        y = np.asarray(y, dtype=float)
        return (np.exp(-y - gamma * np.log(y)) - c * sps.gammaincc(1.0 - gamma, y)) / gamma

    return tail


def _gg_table(gamma: float) -> _TailTable:
    key = round(float(gamma), 12)
    if key not in _GG_TABLES:
        _GG_TABLES[key] = _TailTable(_gg_base_tail(gamma), 1e-16, 1e12, 1e-290, 60.0)
    return _GG_TABLES[key]


def _reg_lower_gamma(a: float, y: np.ndarray) -> np.ndarray:
    """Regularized lower incomplete gamma through a cached log-log table.

    Called on large jump matrices inside the stopping rule, where scipy's
    elementwise evaluation would dominate the runtime.
    """
    key = round(float(a), 12)
    if key not in _REGGAMMA_TABLES:
        grid = np.linspace(math.log(1e-300), math.log(80.0), 4096)
        vals = np.log(sps.gammainc(a, np.exp(grid)))
        _REGGAMMA_TABLES[key] = (grid, vals)
    grid, vals = _REGGAMMA_TABLES[key]
    with np.errstate(divide="ignore"):
        out = np.exp(np.interp(np.log(y), grid, vals))
    return np.where(y >= 80.0, 1.0, out)


@dataclass(frozen=True)
class _Piece:
    """One homogeneous component of a model's intensity."""

    family: str  # "gamma" | "ggamma" | "stable"
    mass: float
    rate: float
    index: float  # tail index for ggamma/stable
    locations: np.ndarray
    probs: np.ndarray

    def invert(self, arrivals: np.ndarray, rate) -> np.ndarray:
        """Jump sizes at the given Poisson arrival levels; ``rate`` may be a
        per-row column vector for tilted sampling."""
        if self.family == "gamma":
            q = arrivals / self.mass
            return _e1_table().inverse(q) / rate
        if self.family == "ggamma":
            g = self.index
            scale = sps.gamma(1.0 - g) / (g * self.mass)
            q = arrivals * scale / np.power(rate, g)
            return _gg_table(g).inverse(q) / rate
        g = self.index
        q = arrivals * sps.gamma(1.0 - g) / self.mass
        return np.power(q, -1.0 / g)

    def residual_bound(self, x: np.ndarray, rate) -> np.ndarray:
        """Expected total mass of jumps below x."""
        if self.family == "gamma":
            return self.mass * -np.expm1(-rate * x) / rate
        if self.family == "ggamma":
            g = self.index
            return self.mass * g * np.power(rate, g - 1.0) * _reg_lower_gamma(1.0 - g, rate * x)
        g = self.index
        return self.mass * g / (sps.gamma(1.0 - g) * (1.0 - g)) * np.power(x, 1.0 - g)

    def initial_columns(self, eps_rel: float, rate_typical: float) -> int:
        """Deterministic estimate of how many jumps a replicate needs."""
        if self.family == "gamma":
            eps_x = max(eps_rel, 1e-300)
            est = self.mass * float(sps.exp1(min(eps_x, 30.0)))
        elif self.family == "ggamma":
            g = self.index
            y = float(sps.gammaincinv(1.0 - g, min(eps_rel, 0.5)))
            est = self.mass * g / sps.gamma(1.0 - g) * rate_typical**g * float(_gg_base_tail(g)(y))
        else:
            est = 256.0
        return int(min(5e7, est * 1.5 + 32))


def _pieces(model: NrmiModel) -> list[_Piece]:
    if isinstance(model, (DirichletGamma, ExtendedGamma)):
        base = model.base
        b = beta_at(model, base.locations)
        out = []
        for level in np.unique(b):
            sel = b == level
            w = base.weights[sel]
            out.append(_Piece("gamma", float(w.sum()), float(level), 0.0,
                              base.locations[sel], w / w.sum()))
        return out
    if isinstance(model, GeneralizedGamma):
        return [_Piece("ggamma", model.beta_total, 1.0, model.gamma,
                       model.p0.locations, model.p0.weights / model.p0.total_mass)]
    if isinstance(model, Stable):
        p0 = model.p0
        return [_Piece("stable", p0.total_mass, 0.0, model.gamma,
                       p0.locations, p0.weights / p0.total_mass)]
    raise TypeError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def sample_crm_jumps(model: NrmiModel, rng: RngSpec, eps_rel: float) -> JumpField:
    """One realization of the model's jump field in decreasing order.

    Jumps are drawn piece by piece (one homogeneous piece per rate level) and
    merged; generation stops when the summed expected residual mass is below
    eps_rel times the realized mass.
    """
    if eps_rel <= 0:
        raise ValueError("eps_rel must be positive")
    gen = rng.generator()
    all_jumps, all_locs = [], []
    bound_total = 0.0
    for piece in _pieces(model):
        width = min(piece.initial_columns(eps_rel, piece.rate), 1 << 16)
        arrivals_carry = 0.0
        realized = 0.0
        jumps = []
        for _ in range(_MAX_BLOCKS):
            arr = arrivals_carry + np.cumsum(gen.standard_exponential(width))
            j = piece.invert(arr, piece.rate if piece.family != "stable" else 1.0)
            s = realized + np.cumsum(j)
            bound = piece.residual_bound(j, piece.rate if piece.family != "stable" else 1.0)
            ok = bound <= eps_rel * s
            if np.any(ok):
                stop = int(np.argmax(ok))
                jumps.append(j[: stop + 1])
                realized = float(s[stop])
                bound_total += float(bound[stop])
                break
            jumps.append(j)
            realized = float(s[-1])
            arrivals_carry = float(arr[-1])
        else:
            raise RuntimeError("jump generation did not reach its residual-mass target")
        jv = np.concatenate(jumps)
        idx = np.searchsorted(np.cumsum(piece.probs), gen.random(jv.size), side="right")
        all_jumps.append(jv)
        all_locs.append(piece.locations[np.clip(idx, 0, piece.locations.size - 1)])
    jumps = np.concatenate(all_jumps)
    locs = np.concatenate(all_locs)
    order = np.argsort(-jumps, kind="stable")
    return JumpField(jumps[order], locs[order], bound_total)


def _piece_mean_parts(
    piece: _Piece,
    gvals: np.ndarray,
    n_rows: int,
    gen: np.random.Generator,
    eps_rel: float,
    rate_rows: np.ndarray | float,
):
    """Accumulated (sum J, sum J*g) for n_rows independent replicates.

    ``rate_rows`` is the (possibly per-row) exponential tilt rate.  Each row
    stops at the first jump where the expected residual mass falls below
    eps_rel times the row's realized mass so far.
    """
    rate_typ = float(np.median(rate_rows)) if np.ndim(rate_rows) else float(rate_rows)
    width = piece.initial_columns(eps_rel, max(rate_typ, 1e-12))
    rate_col = np.asarray(rate_rows)[:, None] if np.ndim(rate_rows) else rate_rows
    sum_j = np.zeros(n_rows)
    sum_jg = np.zeros(n_rows)
    carry_arrival = np.zeros(n_rows)
    carry_mass = np.zeros(n_rows)
    active = np.ones(n_rows, dtype=bool)
    cumprobs = np.cumsum(piece.probs)
    for _ in range(_MAX_BLOCKS):
        e = gen.standard_exponential((n_rows, width))
        u = gen.random((n_rows, width))
        arr = carry_arrival[:, None] + np.cumsum(e, axis=1)
        j = piece.invert(arr, rate_col)
        s = carry_mass[:, None] + np.cumsum(j, axis=1)
        bound = piece.residual_bound(j, rate_col)
        ok = bound <= eps_rel * s
        stop = np.where(ok.any(axis=1), ok.argmax(axis=1), width)  # first passing column
        cols = np.arange(width)
        keep = cols[None, :] <= np.minimum(stop, width - 1)[:, None]
        keep &= active[:, None]
        gdraw = gvals[np.clip(np.searchsorted(cumprobs, u, side="right"), 0, gvals.size - 1)]
        sum_j += np.where(keep, j, 0.0).sum(axis=1)
        sum_jg += np.where(keep, j * gdraw, 0.0).sum(axis=1)
        finished = ok.any(axis=1)
        carry_arrival = arr[:, -1]
        carry_mass = s[:, -1]
        active &= ~finished
        if not active.any():
            return sum_j, sum_jg
        width = max(64, width // 2)
    raise RuntimeError("jump generation did not reach its residual-mass target")


def _batch_sizes(total: int, width_estimate: int) -> list[int]:
    per = max(64, min(8192, int(4e6 / max(width_estimate, 1))))
    out = []
    left = total
    while left > 0:
        take = min(per, left)
        out.append(take)
        left -= take
    return out


def sample_prior_mean(
    model: NrmiModel,
    g,
    n_samples: int,
    rng: RngSpec,
    eps_rel: float,
) -> np.ndarray:
    """Independent replicates of the normalized mean sum_k J_k g(x_k) / sum_k J_k."""
    if eps_rel <= 0:
        raise ValueError("eps_rel must be positive")
    gen = rng.generator()
    pieces = _pieces(model)
    gvals = [g_values(g, p.locations) for p in pieces]
    width_est = max(p.initial_columns(eps_rel, max(p.rate, 1e-12)) for p in pieces)
    out = np.empty(n_samples)
    pos = 0
    for b in _batch_sizes(n_samples, width_est):
        num = np.zeros(b)
        den = np.zeros(b)
        for piece, gv in zip(pieces, gvals):
            rate = piece.rate if piece.family != "stable" else 1.0
            sj, sjg = _piece_mean_parts(piece, gv, b, gen, eps_rel, rate)
            num += sjg
            den += sj
        out[pos : pos + b] = num / den
        pos += b
    return out


def _latent_u_table(model: NrmiModel, sample: SampleSummary, nodes: int = 4096):
    """Inverse-CDF table of the latent tilt variable (log-spaced in 1+u)."""
    probe_v = np.linspace(0.0, 60.0, 2048)
    log_f = _log_unnormalized_u(model, sample, np.expm1(probe_v))
    top = float(np.max(log_f))
    above = np.nonzero(log_f > top - 46.0)[0]
    v_max = float(probe_v[min(above.max() + 1, probe_v.size - 1)])
    v = np.linspace(0.0, v_max, nodes)
    u = np.expm1(v)
    dens_v = np.exp(_log_unnormalized_u(model, sample, u) - top) * np.exp(v)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens_v[1:] + dens_v[:-1]) * np.diff(v))])
    cdf /= cdf[-1]
    return cdf, u


def sample_posterior_mean(
    model: NrmiModel,
    sample: SampleSummary,
    g,
    n_samples: int,
    rng: RngSpec,
    eps_rel: float,
) -> np.ndarray:
    """Replicates of the posterior mean: latent tilt u, tilted jump field,
    plus the fixed gamma jumps sitting at the distinct observations."""
    if isinstance(model, Stable):
        raise ValueError("posterior sampling is not available for the stable model")
    if sample.is_empty:
        return sample_prior_mean(model, g, n_samples, rng, eps_rel)
    if eps_rel <= 0:
        raise ValueError("eps_rel must be positive")
    gen = rng.generator()
    pieces = _pieces(model)
    gvals = [g_values(g, p.locations) for p in pieces]
    g_obs = g_values(g, np.asarray(sample.locations))
    obs_beta = beta_at(model, np.asarray(sample.locations))
    is_gg = isinstance(model, GeneralizedGamma)
    cdf_tab, u_tab = _latent_u_table(model, sample)
    width_est = max(p.initial_columns(eps_rel, max(p.rate, 1e-12)) for p in pieces)
    out = np.empty(n_samples)
    pos = 0
    for b in _batch_sizes(n_samples, width_est):
        u_rows = np.interp(gen.random(b), cdf_tab, u_tab)
        num = np.zeros(b)
        den = np.zeros(b)
        for piece, gv in zip(pieces, gvals):
            rate_rows = piece.rate + u_rows
            sj, sjg = _piece_mean_parts(piece, gv, b, gen, eps_rel, rate_rows)
            num += sjg
            den += sj
        for loc, mult, gj, b_obs in zip(
            sample.locations, sample.multiplicities, g_obs, obs_beta
        ):
            shape = mult - model.gamma if is_gg else float(mult)
            rate = (1.0 if is_gg else b_obs) + u_rows
            jumps = gen.standard_gamma(shape, b) / rate
            num += jumps * gj
            den += jumps
        out[pos : pos + b] = num / den
        pos += b
    return out


def ks_distance(samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Two-sided sup distance between the empirical law and a reference CDF."""
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("need at least one sample")
    try:
        f = np.asarray(cdf(xs), dtype=float)
        if f.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([float(cdf(x)) for x in xs])
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


# ---------------------------------------------------------------------------
# named validation suites
# ---------------------------------------------------------------------------

def _interp_cdf(grid: np.ndarray, values: np.ndarray) -> Callable:
    def cdf(x):
        return np.clip(np.interp(x, grid, values), 0.0, 1.0)

    return cdf


def _suite_dirichlet(n_samples: int, seed: int, eps_rel: float) -> list[dict]:
    from scipy.stats import beta as beta_dist

    from .measures import build_atomic_measure

    base = build_atomic_measure([(0.25, 1.0), (0.75, 1.0)])
    model = DirichletGamma(base)
    g = lambda x: (x < 0.5).astype(float)
    prior = sample_prior_mean(model, g, n_samples, RngSpec(seed, 1), eps_rel)
    cases = [
        {
            "name": "prior mass law is Beta(1,1)",
            "ks": ks_distance(prior, beta_dist(1, 1).cdf),
            "threshold": 0.015,
        }
    ]
    post = sample_posterior_mean(
        model, SampleSummary((0.25,), (1,)), g, n_samples, RngSpec(seed, 2), eps_rel
    )
    cases.append(
        {
            "name": "posterior mass law is Beta(2,1)",
            "ks": ks_distance(post, beta_dist(2, 1).cdf),
            "threshold": 0.015,
        }
    )
    return cases


def _eq24_cdf(beta1: float, beta2: float) -> Callable:
    from .posterior import eg_indicator_posterior_closed

    zs = np.linspace(0.0, 1.0, 4001)
    dens = np.array([eg_indicator_posterior_closed(beta1, beta2, z) for z in zs])
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(zs))])
    cdf /= cdf[-1]
    return _interp_cdf(zs, cdf)


def _suite_extended_gamma(n_samples: int, seed: int, eps_rel: float) -> list[dict]:
    from .measures import build_atomic_measure
    from .models import StepFunction

    base = build_atomic_measure([(0.25, 1.0), (0.75, 1.0)])
    model = ExtendedGamma(base, StepFunction((-1e9, 0.5), (2.0, 1.0)))
    g = lambda x: (x < 0.5).astype(float)
    post = sample_posterior_mean(
        model, SampleSummary((0.25,), (1,)), g, n_samples, RngSpec(seed, 3), eps_rel
    )
    return [
        {
            "name": "posterior mass law matches the two-rate closed form",
            "ks": ks_distance(post, _eq24_cdf(2.0, 1.0)),
            "threshold": 0.02,
        }
    ]


def _suite_generalized_gamma(n_samples: int, seed: int, eps_rel: float) -> list[dict]:
    from .measures import discretize_density
    from .prior import prior_cdf_grid

    p0 = discretize_density(lambda x: np.ones_like(x), (0.0, 1.0), 64, 1.0)
    model = GeneralizedGamma(0.3, 1.0, p0)
    g = lambda x: x
    samples = sample_prior_mean(model, g, n_samples, RngSpec(seed, 4), eps_rel)
    grid = np.linspace(0.0, 1.0, 201)
    exact = prior_cdf_grid(model, g, grid)
    return [
        {
            "name": "prior mean law matches the exact inversion",
            "ks": ks_distance(samples, _interp_cdf(grid, exact.values)),
            "threshold": 0.02,
        }
    ]


def _suite_pd(n_samples: int, seed: int, eps_rel: float) -> list[dict]:
    from .measures import build_atomic_measure
    from .pdprocess import PdModel, pd_mean_cdf

    p0 = build_atomic_measure([(0.0, 0.5), (1.0, 0.5)])
    pd = PdModel(0.3, 0.6, p0)
    g = lambda x: x
    gen = RngSpec(seed, 5).generator()
    shape = pd.theta / pd.gamma
    z = gen.standard_gamma(shape, n_samples)
    # remix: conditional on z the field is generalized gamma with beta = z
    samples = np.empty(n_samples)
    order = np.argsort(z, kind="stable")
    pos = 0
    for b in _batch_sizes(n_samples, 512):
        sel = order[pos : pos + b]
        num = np.zeros(b)
        den = np.zeros(b)
        piece = _Piece("ggamma", 1.0, 1.0, pd.gamma, p0.locations, p0.weights)
        gv = g_values(g, p0.locations)
        # per-replicate mass enters through the arrival scaling: N ~ z * base,
        # so inverting at arrivals / z reuses the unit table
        arrjumps = _piece_mean_parts_massed(piece, gv, b, gen, eps_rel, z[sel])
        num += arrjumps[1]
        den += arrjumps[0]
        samples[sel] = num / den
        pos += b
    grid = np.linspace(0.0, 1.0, 201)
    exact = np.array([pd_mean_cdf(pd, g, s) for s in grid])
    return [
        {
            "name": "PD mean law matches the arctan-form CDF",
            "ks": ks_distance(samples, _interp_cdf(grid, exact)),
            "threshold": 0.02,
        }
    ]


def _piece_mean_parts_massed(piece, gvals, n_rows, gen, eps_rel, mass_rows):
    """Like _piece_mean_parts but with a per-row mass multiplier."""
    scaled = _Piece(piece.family, 1.0, piece.rate, piece.index, piece.locations, piece.probs)
    width = piece.initial_columns(eps_rel, max(piece.rate, 1e-12))
    mass_col = np.asarray(mass_rows)[:, None]
    sum_j = np.zeros(n_rows)
    sum_jg = np.zeros(n_rows)
    carry_arrival = np.zeros(n_rows)
    carry_mass = np.zeros(n_rows)
    active = np.ones(n_rows, dtype=bool)
    cumprobs = np.cumsum(piece.probs)
    for _ in range(_MAX_BLOCKS):
        e = gen.standard_exponential((n_rows, width))
        u = gen.random((n_rows, width))
        arr = (carry_arrival[:, None] + np.cumsum(e, axis=1)) / mass_col
        j = scaled.invert(arr, piece.rate)
        s = carry_mass[:, None] + np.cumsum(j, axis=1)
        bound = mass_col * scaled.residual_bound(j, piece.rate)
        ok = bound <= eps_rel * s
        stop = np.where(ok.any(axis=1), ok.argmax(axis=1), width)
        cols = np.arange(width)
        keep = (cols[None, :] <= np.minimum(stop, width - 1)[:, None]) & active[:, None]
        gdraw = gvals[np.clip(np.searchsorted(cumprobs, u, side="right"), 0, gvals.size - 1)]
        sum_j += np.where(keep, j, 0.0).sum(axis=1)
        sum_jg += np.where(keep, j * gdraw, 0.0).sum(axis=1)
        carry_arrival = arr[:, -1] * mass_rows
        carry_mass = s[:, -1]
        active &= ~ok.any(axis=1)
        if not active.any():
            return sum_j, sum_jg
        width = max(64, width // 2)
    raise RuntimeError("jump generation did not reach its residual-mass target")


ORACLE_SUITES = {
    "dirichlet": _suite_dirichlet,
    "extended_gamma": _suite_extended_gamma,
    "generalized_gamma": _suite_generalized_gamma,
    "pd": _suite_pd,
}


def run_oracle_suite(
    name: str,
    n_samples: int = 20000,
    seed: int = 20240809,
    eps_rel: float = 1e-6,
) -> dict:
    """Run one named exact-vs-simulated agreement suite; returns a report dict."""
    if name not in ORACLE_SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(ORACLE_SUITES)}")
    cases = ORACLE_SUITES[name](n_samples, seed, eps_rel)
    for case in cases:
        case["passed"] = bool(case["ks"] <= case["threshold"])
    return {
        "suite": name,
        "n_samples": n_samples,
        "seed": seed,
        "eps_rel": eps_rel,
        "cases": cases,
        "passed": all(c["passed"] for c in cases),
    }
