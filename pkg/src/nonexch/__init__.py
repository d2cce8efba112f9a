"""Non-exchangeability of bivariate copulas: measures, constructions and a permutation test."""

from .copulas import (
    C_MAX,
    FGM,
    M,
    PI,
    W,
    Clayton,
    Copula,
    Gaussian,
    Mixture,
    MTheta,
    PerturbedProduct,
    Rect,
    convex3,
    evaluate,
    mix_symmetric,
    mix_transpose,
    perturbed_product,
    survival,
    transpose,
    volume,
)
from .empirical import (
    PseudoSample,
    Sample,
    StatConfig,
    empirical_copula,
    pseudo_observations,
    sample_kendall,
    sample_spearman,
    t_statistic,
)
from .measures import (
    GridSpec,
    MeasureReport,
    bound_report,
    c_p,
    feasible_rho_range,
    k_mu,
    mu_p,
    mu_p_normalized,
    prescribe_alpha,
    prescribe_alpha_symmetric,
    rho_m_theta,
    sigma_p,
    spearman_rho,
    tau_m_theta,
)
from .permutation import TestConfig, TestResult, coordinate_swap, run_test
from .rng import RngStream
from .samplers import FamilySpec, sample, sample_m1_mixture

__version__ = "0.1.0"
