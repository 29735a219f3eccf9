"""randmean: exact distributions of means of normalized random measures.

The package computes prior and posterior densities and distribution
functions of mean functionals of normalized completely random measures
(Dirichlet, extended gamma, generalized gamma), of their kernel mixtures,
and of the two-parameter Poisson-Dirichlet process, together with a
decreasing-jump Monte Carlo simulator that cross-validates every exact
formula.
"""

__version__ = "0.1.0"

from .measures import (
    BaseMeasure,
    MeanFunction,
    build_atomic_measure,
    discretize_density,
    integrate,
    mean_function,
)
from .models import (
    BranchError,
    DirichletGamma,
    ExtendedGamma,
    GeneralizedGamma,
    NrmiModel,
    SampleSummary,
    Stable,
    StepFunction,
    jump_charfn,
    kappa_n,
    laplace_exponent,
    latent_u_density,
    latent_u_lognorm,
    tau_n,
)
from .numerics import (
    DistributionGrid,
    QuadratureConfig,
    QuadratureError,
    QuadResult,
    double_quad,
    gauss_2f1,
    gil_pelaez_cdf,
    semi_infinite_quad,
    upper_incomplete_gamma,
)
from .prior import (
    PriorMeanLaw,
    gg_ab,
    prior_cdf,
    prior_cdf_grid,
    prior_density_extended_gamma_indicator,
    prior_density_grid,
)
from .posterior import (
    PosteriorMeanQuery,
    chi_integrand,
    eg_indicator_posterior_closed,
    posterior_cdf,
    posterior_density,
)
from .mixtures import (
    GaussianKernel,
    MixtureData,
    cluster_integral,
    marginal_latent_weight,
    mixture_posterior_cdf,
    mixture_posterior_density,
    partition_weights,
    set_partitions,
)
from .pdprocess import (
    PdModel,
    bvm_variance,
    consistency_limit,
    pd_cdf_via_mixture,
    pd_fdd_density,
    pd_mean_cdf,
    stable_predictive,
)
from .simulate import (
    JumpField,
    RngSpec,
    ks_distance,
    run_oracle_suite,
    sample_crm_jumps,
    sample_posterior_mean,
    sample_prior_mean,
)
