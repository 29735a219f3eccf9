"""Two-parameter Poisson-Dirichlet functionals.

The PD(gamma, theta) random probability measure is reachable from the
generalized gamma family by mixing the total-shape parameter over a gamma
variable Z with shape theta/gamma: conditioning on Z = z gives a generalized
gamma model with beta = z * beta0, and integrating z out gives the PD law.
Carrying that mixture through the prior inversion integral collapses, via the
gamma-sine integral, to the one-line CDF implemented in pd_mean_cdf; the
numeric mixture route pd_cdf_via_mixture keeps the two derivations separate
so they can check each other (the result must also be independent of the
auxiliary beta0).

Also here: the simplex densities of the PD(1/2, theta) vector of set masses,
the predictive rule of the stable model, and its sample-size limits (the
first-moment limit and the asymptotic normal variance).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .measures import BaseMeasure, g_values, integrate
from .models import GeneralizedGamma, SampleSummary, Stable
from .numerics import QuadratureConfig, one_over_t_integral, semi_infinite_quad
from .prior import gg_ab, prior_cdf

__all__ = [
    "PdModel",
    "pd_mean_cdf",
    "pd_cdf_via_mixture",
    "pd_fdd_density",
    "stable_predictive",
    "consistency_limit",
    "bvm_variance",
]


@dataclass(frozen=True)
class PdModel:
    """Two-parameter Poisson-Dirichlet process PD(gamma, theta) over p0."""

    gamma: float
    theta: float
    p0: BaseMeasure

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.theta <= -self.gamma:
            raise ValueError("theta must exceed -gamma")
        if abs(self.p0.total_mass - 1.0) > 1e-12:
            raise ValueError("p0 must be a probability measure")


def pd_mean_cdf(pd: PdModel, g, sigma: float, cfg: QuadratureConfig | None = None) -> float:
    """CDF of the PD mean at sigma:

        1/2 - (1/pi) int_0^inf sin((theta/gamma) arctan(B/A))
                               / ( t (A^2 + B^2)^(theta/(2 gamma)) ) dt,

    with the trigonometric integrals A, B of the generalized-gamma exponent.
    Requires theta > 0 (the gamma-mixture representation behind the formula).
    """
    if pd.theta <= 0:
        raise ValueError("the mean CDF requires theta > 0")
    cfg = cfg or QuadratureConfig()
    ratio = pd.theta / pd.gamma
    proxy = GeneralizedGamma(pd.gamma, 1.0, pd.p0)

    def im_phi(t):
        a, b = gg_ab(proxy, g, float(sigma), np.asarray(t))
        return np.sin(ratio * np.arctan(b / a)) / (a * a + b * b) ** (0.5 * ratio)

    val, _ = one_over_t_integral(im_phi, cfg)
    return 0.5 - val / math.pi


def pd_cdf_via_mixture(
    pd: PdModel,
    g,
    sigma: float,
    beta: float = 1.0,
    cfg: QuadratureConfig | None = None,
) -> float:
    """The same CDF through the explicit gamma mixture of generalized gamma laws.

    Numerically integrates P[mean <= sigma | Z = z] against the gamma(theta/
    gamma, rate beta) density of Z.  The result must not depend on beta; the
    identity is stated for nonnegative g (a warning is emitted otherwise).
    """
    if pd.theta <= 0:
        raise ValueError("the mixture route requires theta > 0")
    if beta <= 0:
        raise ValueError("beta must be positive")
    cfg = cfg or QuadratureConfig()
    if float(np.min(g_values(g, pd.p0.locations))) < 0.0:
        warnings.warn("the mixture identity is stated for nonnegative g", stacklevel=2)
    shape = pd.theta / pd.gamma
    log_norm = shape * math.log(beta) - math.lgamma(shape)
    inner_cfg = QuadratureConfig(
        abs_tol=0.1 * cfg.abs_tol, rel_tol=0.1 * cfg.rel_tol,
        max_subdivisions=cfg.max_subdivisions,
        tail_threshold=cfg.tail_threshold, t_min=cfg.t_min,
    )

    def f(z):
        if z <= 0.0:
            return 0.0
        dens = math.exp(log_norm + (shape - 1.0) * math.log(z) - beta * z)
        model = GeneralizedGamma(pd.gamma, z * beta, pd.p0)
        return dens * prior_cdf(model, g, float(sigma), inner_cfg)

    res = semi_infinite_quad(f, cfg)
    return float(res.value)


def pd_fdd_density(theta: float, p, w) -> float:
    """Joint density of PD(1/2, theta) masses of a measurable partition.

    ``p`` are the n cell probabilities under p0 (positive, summing to 1);
    ``w`` is an interior point of the (n-1)-simplex carrying the first n-1
    masses.  The density diverges on the simplex boundary, which is rejected.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    n = p.size
    if w.size != n - 1 or n < 2:
        raise ValueError("w must have length len(p) - 1 >= 1")
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must be strictly positive and sum to one")
    w_last = 1.0 - w.sum()
    if np.any(w <= 0) or w_last <= 0:
        raise ValueError("w must be an interior simplex point")
    if theta <= 0:
        raise ValueError("theta must be positive")
    log_c = (
        np.log(p).sum()
        + math.lgamma(theta + 0.5 * n)
        - 0.5 * (n - 1) * math.log(math.pi)
        - math.lgamma(theta + 0.5)
    )
    a_n = float(np.sum(p[:-1] ** 2 / w) + p[-1] ** 2 / w_last)
    log_f = (
        log_c
        - 1.5 * float(np.log(w).sum())
        - 1.5 * math.log(w_last)
        - (theta + 0.5 * n) * math.log(a_n)
    )
    return math.exp(log_f)


def stable_predictive(gamma: float, p0: BaseMeasure, sample: SampleSummary):
    """Predictive mixture weights of the stable model given a sample.

    Returns (new_mass, atom_masses): mass gamma * clusters / n on the prior
    guess p0 and (n_i - gamma)/n on each distinct observed value.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if sample.is_empty:
        raise ValueError("the predictive rule needs a non-empty sample")
    n = sample.n
    new_mass = gamma * sample.n_clusters / n
    atom_masses = [(m - gamma) / n for m in sample.multiplicities]
    return new_mass, atom_masses


def _check_probability(m: BaseMeasure, name: str):
    if abs(m.total_mass - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a probability measure")


def consistency_limit(gamma: float, p0: BaseMeasure, p_true: BaseMeasure, g) -> float:
    """Large-sample limit of the posterior expected mean under a non-atomic
    truth: gamma * p0(g) + (1 - gamma) * p_true(g)."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    _check_probability(p0, "p0")
    _check_probability(p_true, "p_true")
    return gamma * float(integrate(g, p0)) + (1.0 - gamma) * float(integrate(g, p_true))


def bvm_variance(gamma: float, g, p_true: BaseMeasure, p0: BaseMeasure) -> float:
    """Asymptotic normal variance of the centered, sqrt(n)-scaled posterior mean:

        (1-gamma) Var_true(g) + gamma (1-gamma) Var_p0(g)
        + gamma (p_true(g) - p0(g))^2.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    _check_probability(p0, "p0")
    _check_probability(p_true, "p_true")
    g2 = lambda x: np.asarray(g(x)) ** 2
    m_tr = float(integrate(g, p_true))
    m_p0 = float(integrate(g, p0))
    v_tr = float(integrate(g2, p_true)) - m_tr**2
    v_p0 = float(integrate(g2, p0)) - m_p0**2
    return (1.0 - gamma) * v_tr + gamma * (1.0 - gamma) * v_p0 + gamma * (m_tr - m_p0) ** 2
