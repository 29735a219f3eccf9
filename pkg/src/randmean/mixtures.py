"""Posterior laws of mixture means: partition sums over latent clusterings.

A mixture observation model hangs a kernel k(y, x) off every atom; the mean
of the mixture against g equals the mean of h(x) = int g(y) k(y, x) dy under
the driving random measure.  Posterior formulas therefore look exactly like
the plain-sample ones except that every occurrence of a distinct observation
is replaced by a kernel-weighted integral over the state space, summed over
all set partitions of the observation indices.

Three evaluation routes are provided:
  * "general":   the partition-sum kernel with model moment transforms
  * "dirichlet": the Dirichlet-process specialization, where the inner law
                 is itself a posterior mean with an augmented base measure
                 (single t-integral, no parity casework)
  * "augmented": the gamma-family quasi-conjugate form, enumerating atom
                 tuples of the augmented measure explicitly
The dirichlet route is the default for DirichletGamma models; the augmented
route exists for cross-checks at small n (its cost grows like K^clusters).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from .measures import g_values
from .models import (
    DirichletGamma,
    ExtendedGamma,
    GeneralizedGamma,
    NrmiModel,
    Stable,
    _psi_values,
    alpha_measure,
    beta_at,
    kappa_n,
    tau_n,
)
from .numerics import (
    DistributionGrid,
    QuadratureConfig,
    one_over_t_integral,
    semi_infinite_quad,
)
from .posterior import density_from_chi
from ._parallel import parallel_map

__all__ = [
    "GaussianKernel",
    "MixtureData",
    "set_partitions",
    "bell_number",
    "cluster_integral",
    "mixture_posterior_density",
    "mixture_posterior_cdf",
    "marginal_latent_weight",
    "partition_weights",
]

_PARTITION_CAP = 12

_BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597]


def bell_number(n: int) -> int:
    return _BELL[n]


def set_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All set partitions of {0, ..., n-1} in canonical order.

    Clusters are ordered by their smallest element and elements within a
    cluster are increasing.  The number of partitions is Bell(n); n is capped
    at 12 (Bell(12) is about 4.2 million).
    """
    if not 1 <= n <= _PARTITION_CAP:
        raise ValueError(f"n must lie in 1..{_PARTITION_CAP}")

    def rec(i: int, clusters: list[list[int]]):
        if i == n:
            yield tuple(tuple(c) for c in clusters)
            return
        for c in clusters:
            c.append(i)
            yield from rec(i + 1, clusters)
            c.pop()
        clusters.append([i])
        yield from rec(i + 1, clusters)
        clusters.pop()

    return rec(0, [])


@dataclass(frozen=True)
class GaussianKernel:
    """Normal density in y centered at the atom location, scale s."""

    s: float

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("kernel scale must be positive")

    def density(self, y, x):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        z = (y - x) / self.s
        return np.exp(-0.5 * z * z) / (self.s * math.sqrt(2.0 * math.pi))

    def mean_transform(self, g, locations) -> np.ndarray:
        """h(x) = int g(y) k(y, x) dy at the given locations.

        Exact for g identity / constant; Gauss-Hermite otherwise.
        """
        x = np.asarray(locations, dtype=float)
        if isinstance(g, str):
            if g == "identity":
                return x.copy()
            raise ValueError(f"unknown symbolic g {g!r}")
        nodes, weights = np.polynomial.hermite.hermgauss(61)
        y = x[..., None] + math.sqrt(2.0) * self.s * nodes
        gv = np.asarray(g(y), dtype=float)
        out = (gv @ weights) / math.sqrt(math.pi)
        if not np.all(np.isfinite(out)):
            raise ValueError("mean transform evaluated non-finite")
        return out


@dataclass(frozen=True)
class MixtureData:
    """Mixture observations with their kernel and the target transform g."""

    y: tuple[float, ...]
    kernel: GaussianKernel
    g: Union[str, Callable] = "identity"
    lambda_ref: str = "lebesgue"

    def __post_init__(self):
        if len(self.y) == 0:
            raise ValueError("need at least one observation")
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))

    @property
    def n(self) -> int:
        return len(self.y)

    def h_at(self, locations) -> np.ndarray:
        return self.kernel.mean_transform(self.g, locations)


def cluster_integral(model: NrmiModel, kernel, y_cluster: Sequence[float], weight_fn) -> complex:
    """integral over the base measure of weight_fn(x) prod_i k(Y_i, x).

    ``weight_fn`` maps a location array to (complex) weights; the observation
    product runs over the cluster's y values.
    """
    if len(y_cluster) == 0:
        raise ValueError("cluster must be non-empty")
    base = alpha_measure(model)
    xs = base.locations
    prod = np.ones_like(xs)
    for y in y_cluster:
        prod = prod * kernel.density(float(y), xs)
    wv = np.asarray(weight_fn(xs))
    if not np.all(np.isfinite(np.abs(wv))):
        raise ValueError("weight function evaluated non-finite at an atom")
    out = np.sum(base.weights * prod * wv)
    return complex(out) if np.iscomplexobj(wv) else float(out)


class _Engine:
    """Shared precomputation for one (model, data) pair.

    Kernel products per distinct cluster are memoized once (clusters recur
    across partitions); everything else is assembled per quadrature node.
    """

    def __init__(self, model: NrmiModel, data: MixtureData, cfg: QuadratureConfig):
        if isinstance(model, Stable):
            raise ValueError("mixture posteriors are not available for the stable model")
        if data.n > _PARTITION_CAP:
            raise ValueError(f"n exceeds the partition cap {_PARTITION_CAP}")
        self.model = model
        self.data = data
        self.cfg = cfg
        base = alpha_measure(model)
        self.xs = base.locations
        self.ws = base.weights
        self.h = data.h_at(self.xs)
        self.n = data.n
        self.partitions = list(set_partitions(self.n))
        self.cluster_prod: dict[frozenset, np.ndarray] = {}
        for part in self.partitions:
            for c in part:
                key = frozenset(c)
                if key not in self.cluster_prod:
                    prod = np.ones_like(self.xs)
                    for i in c:
                        prod = prod * data.kernel.density(data.y[i], self.xs)
                    self.cluster_prod[key] = prod
        self.inner_cfg = QuadratureConfig(
            abs_tol=0.1 * cfg.abs_tol,
            rel_tol=0.1 * cfg.rel_tol,
            max_subdivisions=cfg.max_subdivisions,
            tail_threshold=cfg.tail_threshold,
            t_min=cfg.t_min,
        )
        self._log_scale, self._den = self._denominator()

    def hull(self) -> tuple[float, float]:
        return float(np.min(self.h)), float(np.max(self.h))

    def _partition_sum(self, cluster_value):
        """Sum over partitions of the product over clusters of cluster_value[C]."""
        total = None
        for part in self.partitions:
            prod = None
            for c in part:
                v = cluster_value[frozenset(c)]
                prod = v if prod is None else prod * v
            total = prod if total is None else total + prod
        return total

    def _b_of_u(self, u: np.ndarray) -> np.ndarray:
        """Partition sum of tau-weighted cluster integrals, as a function of u."""
        vals = {}
        for key, prod in self.cluster_prod.items():
            m = len(key)
            tv = tau_n(self.model, m, u[:, None], self.xs)
            vals[key] = np.sum(self.ws * prod * tv, axis=-1)
        return self._partition_sum(vals)

    def _denominator(self):
        """int u^(n-1) e^-psi(u) B(u) du, returned as (log_scale, scaled value)."""
        n = self.n
        psi0 = np.zeros(self.xs.size)

        def log_f(u):
            u = np.asarray(u, dtype=float)
            s = np.log(self._b_of_u(u))
            s = s - np.real(_psi_values(self.model, u[:, None] + psi0))
            if n > 1:
                with np.errstate(divide="ignore"):
                    s = s + (n - 1) * np.where(u > 0, np.log(u), -np.inf)
            return s

        probe = np.concatenate([[0.0], np.geomspace(1e-4, 1e4, 81)])
        shift = float(np.max(log_f(probe)))
        res = semi_infinite_quad(lambda u: np.exp(log_f(u) - shift), self.inner_cfg,
                                 log_substitution=True)
        return shift, float(res.value)

    # -- general route -------------------------------------------------------
    def xi(self, t: np.ndarray, z) -> np.ndarray:
        """The general partition-sum kernel xi(t, z); a z array gives (T, Z)."""
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        if z.ndim == 0:
            carg = 1j * t[:, None] * (self.h - z)
        else:
            carg = 1j * t[:, None, None] * (self.h[None, None, :] - z[None, :, None])
        vals = {}
        for key, prod in self.cluster_prod.items():
            m = len(key)
            kv = kappa_n(self.model, m, carg, self.xs)
            vals[key] = np.sum(self.ws * prod * kv, axis=-1)
        num = self._partition_sum(vals)
        psi = _psi_values(self.model, -carg)
        return np.exp(-psi - self._log_scale) * num / (math.pi * self._den)

    def phi(self, t: np.ndarray, sigma: float) -> np.ndarray:
        """Posterior characteristic function of the field against h - sigma."""
        t = np.asarray(t, dtype=float)
        n = self.n

        def f_u(u):
            u = np.asarray(u, dtype=float)
            vals = {}
            carg = 1j * t[None, :, None] * (self.h - sigma) - u[:, None, None]
            for key, prod in self.cluster_prod.items():
                m = len(key)
                kv = kappa_n(self.model, m, carg, self.xs)
                vals[key] = np.sum(self.ws * prod * kv, axis=-1)
            num = self._partition_sum(vals)
            w = u[:, None, None] - 1j * t[None, :, None] * (self.h - sigma)
            s = -_psi_values(self.model, w) - self._log_scale
            if n > 1:
                with np.errstate(divide="ignore"):
                    s = s + (n - 1) * np.where(u > 0, np.log(u), -np.inf)[:, None]
            return np.exp(s) * num

        res = semi_infinite_quad(f_u, self.inner_cfg, log_substitution=True)
        return np.asarray(res.value) / self._den


class _DirichletEngine(_Engine):
    """Specialized route for the Dirichlet process: the inner posterior mean
    is again a Dirichlet mean under the augmented base measure, so everything
    collapses to a single t-integral with per-cluster augmented factors."""

    def __init__(self, model: DirichletGamma, data: MixtureData, cfg: QuadratureConfig):
        super().__init__(model, data, cfg)
        self.a = model.base.total_mass
        self.marg = self._partition_sum({
            key: math.gamma(len(key)) * float(np.sum(self.ws * prod))
            for key, prod in self.cluster_prod.items()
        })

    def _weighted_sum(self, t: np.ndarray, sigma: float) -> np.ndarray:
        base = np.exp(-np.sum(self.ws * np.log(1.0 - 1j * t[:, None] * (self.h - sigma)), axis=-1))
        vals = {}
        for key, prod in self.cluster_prod.items():
            m = len(key)
            fac = (1.0 - 1j * t[:, None] * (self.h - sigma)) ** (-float(m))
            vals[key] = math.gamma(m) * np.sum(self.ws * prod * fac, axis=-1)
        return base * self._partition_sum(vals)

    def density(self, sigma: float):
        pref = (self.a + self.n - 1.0) / math.pi
        res = semi_infinite_quad(lambda t: np.real(self._weighted_sum(t, sigma)), self.cfg)
        return pref * float(res.value) / self.marg, pref * res.err_estimate / self.marg

    def cdf(self, sigma: float):
        val, err = one_over_t_integral(
            lambda t: np.imag(self._weighted_sum(t, sigma)) / self.marg, self.cfg
        )
        return 0.5 - val / math.pi, err / math.pi


class _AugmentedEngine:
    """Gamma-family quasi-conjugate route: explicit sums over atom tuples of
    the augmented measure.  Cost grows as K^(number of clusters); meant for
    small cross-check cases."""

    def __init__(self, model, data: MixtureData, cfg: QuadratureConfig):
        if not isinstance(model, (DirichletGamma, ExtendedGamma)):
            raise TypeError("the augmented route applies to gamma-type models")
        self.model = model
        self.data = data
        self.cfg = cfg
        base = alpha_measure(model)
        self.xs = base.locations
        self.ws = base.weights
        self.beta = beta_at(model, self.xs)
        self.h = data.h_at(self.xs)
        self.n = data.n
        self.partitions = list(set_partitions(self.n))
        self.inner_cfg = QuadratureConfig(
            abs_tol=0.1 * cfg.abs_tol, rel_tol=0.1 * cfg.rel_tol,
            max_subdivisions=cfg.max_subdivisions,
            tail_threshold=cfg.tail_threshold, t_min=cfg.t_min,
        )
        kmat = np.array([data.kernel.density(y, self.xs) for y in data.y])  # (n, K)
        # per partition: tuple index array (ntup, m) and coefficient vector (ntup,)
        self.layout = []
        zcache: dict[tuple, float] = {}
        den = 0.0
        for part in self.partitions:
            m = len(part)
            sizes = [len(c) for c in part]
            prods = [np.prod(kmat[list(c), :], axis=0) for c in part]
            idx = np.array(list(itertools.product(range(self.xs.size), repeat=m)), dtype=int)
            coef = np.ones(idx.shape[0])
            for j, (c, pr) in enumerate(zip(part, prods)):
                coef = coef * math.gamma(len(c)) * self.ws[idx[:, j]] * pr[idx[:, j]]
            self.layout.append((sizes, idx, coef))
            for row, cf in zip(idx, coef):
                key = tuple(sorted(zip(row.tolist(), sizes)))
                if key not in zcache:
                    zcache[key] = self._z_tuple(row, sizes)
                den += cf * zcache[key]
        self._zcache = zcache
        self.den = den

    def _log_u_tuple(self, u: np.ndarray, row, sizes) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        s = -np.sum(self.ws * np.log(self.beta + u[:, None]), axis=-1)
        for k, m in zip(row, sizes):
            s = s - m * np.log(self.beta[k] + u)
        if self.n > 1:
            with np.errstate(divide="ignore"):
                s = s + (self.n - 1) * np.where(u > 0, np.log(u), -np.inf)
        return s

    def _z_tuple(self, row, sizes) -> float:
        res = semi_infinite_quad(
            lambda u: np.exp(self._log_u_tuple(u, row, sizes)),
            self.inner_cfg, log_substitution=True,
        )
        return float(res.value)

    def hull(self):
        return float(np.min(self.h)), float(np.max(self.h))

    def xi(self, t: np.ndarray, z) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        z = np.asarray(z, dtype=float)
        if z.ndim == 0:
            barg = self.beta - 1j * t[:, None] * (self.h - z)  # (T, K)
        else:
            barg = self.beta - 1j * t[:, None, None] * (self.h[None, None, :] - z[None, :, None])
        base = np.exp(-np.sum(self.ws * np.log(barg), axis=-1))
        total = np.zeros(base.shape, dtype=complex)
        for sizes, idx, coef in self.layout:
            fac = np.ones(base.shape + (idx.shape[0],), dtype=complex)
            for j, m in enumerate(sizes):
                fac = fac * barg[..., idx[:, j]] ** (-float(m))
            total = total + fac @ coef
        return base * total / (math.pi * self.den)

    def phi(self, t: np.ndarray, sigma: float) -> np.ndarray:
        t = np.asarray(t, dtype=float)

        def f_u(u):
            u = np.asarray(u, dtype=float)
            barg = self.beta + u[:, None, None] - 1j * t[None, :, None] * (self.h - sigma)
            s = -np.sum(self.ws * np.log(barg), axis=-1)
            if self.n > 1:
                with np.errstate(divide="ignore"):
                    s = s + (self.n - 1) * np.where(u > 0, np.log(u), -np.inf)[:, None]
            base = np.exp(s)  # (U, T)
            total = np.zeros(base.shape, dtype=complex)
            for sizes, idx, coef in self.layout:
                fac = np.ones((u.size, t.size, idx.shape[0]), dtype=complex)
                for j, m in enumerate(sizes):
                    fac = fac * barg[:, :, idx[:, j]] ** (-float(m))
                total = total + fac @ coef
            return base * total

        res = semi_infinite_quad(f_u, self.inner_cfg, log_substitution=True)
        return np.asarray(res.value) / self.den


def _pick_route(model: NrmiModel, route: str | None) -> str:
    if route is None or route == "auto":
        return "dirichlet" if isinstance(model, DirichletGamma) else "general"
    if route not in ("general", "dirichlet", "augmented"):
        raise ValueError(f"unknown route {route!r}")
    return route


def mixture_posterior_density(
    model: NrmiModel,
    data: MixtureData,
    sigma_grid,
    cfg: QuadratureConfig | None = None,
    *,
    route: str | None = None,
    threads: int = 1,
) -> DistributionGrid:
    """Posterior density of the mixture mean over a sigma grid."""
    cfg = cfg or QuadratureConfig()
    sig = np.asarray(sigma_grid, dtype=float)
    route = _pick_route(model, route)
    if route == "dirichlet":
        if not isinstance(model, DirichletGamma):
            raise TypeError("the dirichlet route requires a DirichletGamma model")
        eng = _DirichletEngine(model, data, cfg)
        lo, hi = eng.hull()
        rows = parallel_map(
            lambda s: eng.density(float(s)) if lo <= s <= hi else (0.0, 0.0), sig, threads
        )
        return DistributionGrid(sig, [r[0] for r in rows], [r[1] for r in rows])
    eng = _AugmentedEngine(model, data, cfg) if route == "augmented" else _Engine(model, data, cfg)
    lo, hi = eng.hull()

    def one(s):
        if s < lo or s > hi:
            return 0.0, 0.0
        return density_from_chi(eng.xi, data.n, lo, float(s), cfg)

    rows = parallel_map(one, sig, threads)
    return DistributionGrid(sig, [r[0] for r in rows], [r[1] for r in rows])


def mixture_posterior_cdf(
    model: NrmiModel,
    data: MixtureData,
    sigma_grid,
    cfg: QuadratureConfig | None = None,
    *,
    route: str | None = None,
    threads: int = 1,
) -> DistributionGrid:
    """Posterior CDF of the mixture mean over a sigma grid."""
    cfg = cfg or QuadratureConfig()
    sig = np.asarray(sigma_grid, dtype=float)
    route = _pick_route(model, route)
    if route == "dirichlet":
        if not isinstance(model, DirichletGamma):
            raise TypeError("the dirichlet route requires a DirichletGamma model")
        eng = _DirichletEngine(model, data, cfg)
        rows = parallel_map(lambda s: eng.cdf(float(s)), sig, threads)
        return DistributionGrid(sig, [r[0] for r in rows], [r[1] for r in rows])
    eng = _AugmentedEngine(model, data, cfg) if route == "augmented" else _Engine(model, data, cfg)

    def one(s):
        val, err = one_over_t_integral(lambda t: np.imag(eng.phi(t, float(s))), cfg)
        return 0.5 - val / math.pi, err / math.pi

    rows = parallel_map(one, sig, threads)
    return DistributionGrid(sig, [r[0] for r in rows], [r[1] for r in rows])


def marginal_latent_weight(
    model: NrmiModel,
    kernel,
    y: Sequence[float],
    partition: Sequence[Sequence[int]],
    cfg: QuadratureConfig | None = None,
) -> float:
    """Unnormalized marginal weight of one latent clustering of the data.

    int u^(n-1) e^-psi(u) prod_C [ int prod_{i in C} k(Y_i, x) tau_|C|(u|x)
    alpha(dx) ] du.  Weights across all partitions of the index set normalize
    to one.
    """
    cfg = cfg or QuadratureConfig(abs_tol=1e-12, rel_tol=1e-11)
    if isinstance(model, Stable):
        raise ValueError("marginal weights are not available for the stable model")
    y = [float(v) for v in y]
    n = len(y)
    idx = sorted(i for c in partition for i in c)
    if idx != list(range(n)):
        raise ValueError("partition must cover the observation indices exactly once")
    base = alpha_measure(model)
    xs, ws = base.locations, base.weights
    prods = []
    for c in partition:
        prod = np.ones_like(xs)
        for i in c:
            prod = prod * kernel.density(y[i], xs)
        prods.append((len(c), prod))

    def log_f(u):
        u = np.asarray(u, dtype=float)
        s = -np.real(_psi_values(model, u[:, None] + np.zeros(xs.size)))
        if n > 1:
            with np.errstate(divide="ignore"):
                s = s + (n - 1) * np.where(u > 0, np.log(u), -np.inf)
        for m, prod in prods:
            tv = tau_n(model, m, u[:, None], xs)
            s = s + np.log(np.sum(ws * prod * tv, axis=-1))
        return s

    probe = np.concatenate([[0.0], np.geomspace(1e-4, 1e4, 81)])
    shift = float(np.max(log_f(probe)))
    res = semi_infinite_quad(lambda u: np.exp(log_f(u) - shift), cfg, log_substitution=True)
    return math.exp(shift) * float(res.value)


def partition_weights(
    model: NrmiModel, kernel, y: Sequence[float], cfg: QuadratureConfig | None = None
) -> dict[tuple, float]:
    """Normalized posterior weights of every partition of the observations."""
    parts = list(set_partitions(len(list(y))))
    raw = np.array([marginal_latent_weight(model, kernel, y, p, cfg) for p in parts])
    raw = raw / raw.sum()
    return {p: float(wt) for p, wt in zip(parts, raw)}
