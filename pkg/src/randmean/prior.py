"""Prior distribution of the random mean functional.

The cumulative distribution function of the normalized mean at sigma is read
off the characteristic function of the unnormalized field integrated against
g - sigma:

    F(sigma) = 1/2 - (1/pi) int_0^inf Im exp(-psi(-i t (g - sigma))) / t dt.

For the generalized gamma model the exponent is carried in explicitly real
trigonometric form (the A/B integrals below), which is both cheaper and a
useful independent evaluation route; prior_cdf dispatches to it by default
and ``method="charfn"`` forces the generic complex-exponent route.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import BaseMeasure, g_values
from .models import (
    GeneralizedGamma,
    NrmiModel,
    Stable,
    _psi_values,
    alpha_measure,
)
from .numerics import (
    DistributionGrid,
    QuadratureConfig,
    one_over_t_integral,
)
from ._parallel import parallel_map

__all__ = [
    "PriorMeanLaw",
    "prior_cdf",
    "prior_cdf_grid",
    "prior_density_grid",
    "gg_ab",
    "prior_density_extended_gamma_indicator",
]


@dataclass
class PriorMeanLaw:
    """A model, a mean function and the grid of computed CDF values."""

    model: NrmiModel
    g: Callable
    grid: DistributionGrid


def gg_ab(model: GeneralizedGamma, g, sigma: float, t):
    """The cosine/sine integrals (A, B) of the generalized-gamma exponent.

    A(t) = int [1 + t^2 (g-sigma)^2]^(gamma/2) cos(gamma arctan(t (g-sigma))) dP0
    and B likewise with sin.  ``t`` may be an array.
    """
    if not isinstance(model, GeneralizedGamma):
        raise TypeError("gg_ab applies to the generalized gamma model")
    t_arr = np.asarray(t, dtype=float)
    delta = g_values(g, model.p0.locations) - sigma
    td = t_arr[..., None] * delta
    mod = (1.0 + td * td) ** (0.5 * model.gamma)
    ang = model.gamma * np.arctan(td)
    w = model.p0.weights
    a = np.sum(w * mod * np.cos(ang), axis=-1)
    b = np.sum(w * mod * np.sin(ang), axis=-1)
    if t_arr.ndim == 0:
        return float(a), float(b)
    return a, b


def _im_charfn(model: NrmiModel, g, sigma: float):
    """Im exp(-psi(-i t (g - sigma))) as a vectorized function of t."""
    base = alpha_measure(model)
    delta = g_values(g, base.locations) - sigma

    def im_phi(t):
        w = -1j * np.asarray(t)[..., None] * delta
        return np.imag(np.exp(-_psi_values(model, w)))

    return im_phi


def _im_charfn_gg_trig(model: GeneralizedGamma, g, sigma: float):
    """The same imaginary part through the explicitly real A/B route."""
    b = model.beta_total

    def im_phi(t):
        a_t, b_t = gg_ab(model, g, sigma, np.asarray(t))
        return np.exp(b - b * a_t) * np.sin(b * b_t)

    return im_phi


def prior_cdf(
    model: NrmiModel,
    g,
    sigma: float,
    cfg: QuadratureConfig | None = None,
    *,
    method: str = "auto",
) -> float:
    """P[mean of g <= sigma] under the prior law of the model.

    ``method``: "auto" (trigonometric route for generalized gamma, complex
    characteristic-function route otherwise), "charfn", or "gg_trig".
    """
    if isinstance(model, Stable):
        raise ValueError("exact prior inversion is not available for the stable model")
    cfg = cfg or QuadratureConfig()
    if method == "auto":
        method = "gg_trig" if isinstance(model, GeneralizedGamma) else "charfn"
    if method == "gg_trig":
        im_phi = _im_charfn_gg_trig(model, g, float(sigma))
    elif method == "charfn":
        im_phi = _im_charfn(model, g, float(sigma))
    else:
        raise ValueError(f"unknown method {method!r}")
    val, _ = one_over_t_integral(im_phi, cfg)
    return 0.5 - val / math.pi


def _prior_cdf_with_err(model, g, sigma, cfg):
    if isinstance(model, GeneralizedGamma):
        im_phi = _im_charfn_gg_trig(model, g, float(sigma))
    else:
        im_phi = _im_charfn(model, g, float(sigma))
    val, err = one_over_t_integral(im_phi, cfg)
    return 0.5 - val / math.pi, err / math.pi


def prior_cdf_grid(
    model: NrmiModel,
    g,
    sigma_grid,
    cfg: QuadratureConfig | None = None,
    threads: int = 1,
) -> DistributionGrid:
    """prior_cdf over a grid, with per-point quadrature error estimates.

    Raw pointwise values are returned without monotone post-processing, so
    numerical defects stay visible to the caller.
    """
    cfg = cfg or QuadratureConfig()
    sig = np.asarray(sigma_grid, dtype=float)
    rows = parallel_map(lambda s: _prior_cdf_with_err(model, g, s, cfg), sig, threads)
    vals = np.array([r[0] for r in rows])
    errs = np.array([r[1] for r in rows])
    return DistributionGrid(sig, vals, errs)


def prior_density_grid(
    model: NrmiModel,
    g,
    sigma_grid,
    cfg: QuadratureConfig | None = None,
    threads: int = 1,
) -> DistributionGrid:
    """Prior density on a grid by central differences of the CDF.

    No closed form is attempted; pair this with the model-specific closed
    forms (where they exist) in tests rather than inside the pipeline.
    """
    sig = np.asarray(sigma_grid, dtype=float)
    if sig.size < 3:
        raise ValueError("density differencing needs at least 3 grid points")
    cdf = prior_cdf_grid(model, g, sig, cfg, threads)
    f = cdf.values
    dens = np.empty_like(f)
    dens[1:-1] = (f[2:] - f[:-2]) / (sig[2:] - sig[:-2])
    dens[0] = (f[1] - f[0]) / (sig[1] - sig[0])
    dens[-1] = (f[-1] - f[-2]) / (sig[-1] - sig[-2])
    errs = np.empty_like(f)
    errs[1:-1] = (cdf.errors[2:] + cdf.errors[:-2]) / (sig[2:] - sig[:-2])
    errs[0] = errs[1]
    errs[-1] = errs[-2]
    return DistributionGrid(sig, dens, errs)


def prior_density_extended_gamma_indicator(beta1: float, beta2: float, sigma: float) -> float:
    """Closed-form prior density of the mass of a set under a two-rate model.

    For g the indicator of a set carrying rate beta1 (complement beta2) and
    unit base mass on each side, the prior density of the normalized mass is
    beta1 beta2 / (beta1 sigma + beta2 (1 - sigma))^2 on [0, 1].
    """
    if beta1 <= 0 or beta2 <= 0:
        raise ValueError("rates must be positive")
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    return beta1 * beta2 / (beta1 * sigma + beta2 * (1.0 - sigma)) ** 2
