"""Dependent clustering of multiview data with the product-centred Dirichlet process."""

from .estimator import CLICMixture
from .partitions import (
    adjusted_rand_index,
    canonicalize,
    contingency,
    enumerate_partitions,
    rand_index,
    variation_of_information,
)
from .prior import (
    ClicHyperParams,
    FiniteApproxParams,
    LogStirlingTable,
    clic_log_meppf,
    crp_log_pmf,
    expected_rand_finite,
    expected_rand_infinite,
    marginal_log_eppf,
    prior_k_pmf,
    sample_finite_prior,
    sample_urn,
)
from .sampler import MultiviewData, PosteriorTrace, SamplerConfig, run_chain

__version__ = "0.1.0"

__all__ = [
    "CLICMixture",
    "ClicHyperParams",
    "FiniteApproxParams",
    "LogStirlingTable",
    "MultiviewData",
    "PosteriorTrace",
    "SamplerConfig",
    "adjusted_rand_index",
    "canonicalize",
    "clic_log_meppf",
    "contingency",
    "crp_log_pmf",
    "enumerate_partitions",
    "expected_rand_finite",
    "expected_rand_infinite",
    "marginal_log_eppf",
    "prior_k_pmf",
    "rand_index",
    "run_chain",
    "sample_finite_prior",
    "sample_urn",
    "variation_of_information",
]
