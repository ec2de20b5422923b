"""Exact truncated distributions of the largest eigenvalue of singular
beta-Wishart matrices (beta = 1, 2, 4), built on Jack polynomials and
hypergeometric functions of matrix argument."""

__version__ = "0.1.0"

from .partitions import Partition, conjugate, enumerate_partitions, hook_product, pochhammer_beta
from .jack import jack_c, jack_identity_value, jack_values
from .hypergeom import (
    HypergeomParams,
    SeriesValue,
    TruncationBudget,
    hyper_hetero,
    hyper_one_matrix,
    kummer_transform,
)
from .eigendist import (
    ConvergenceError,
    DistValue,
    LargestEigenvalueDistribution,
    WishartSpec,
    cdf_largest,
    joint_density,
    log_multigamma_beta,
    pdf_largest,
    pdf_m2_nonnull,
    quantile_largest,
    sup_cdf,
)
from .montecarlo import SampleBatch, empirical_cdf, ks_distance, sample_largest_eigs, stiefel_splitting_check
from .capacity import CapacityQuery, miso_capacity

__all__ = [
    "Partition", "conjugate", "enumerate_partitions", "hook_product", "pochhammer_beta",
    "jack_c", "jack_identity_value", "jack_values",
    "HypergeomParams", "SeriesValue", "TruncationBudget",
    "hyper_hetero", "hyper_one_matrix", "kummer_transform",
    "ConvergenceError", "DistValue", "LargestEigenvalueDistribution", "WishartSpec",
    "cdf_largest", "joint_density", "log_multigamma_beta", "pdf_largest", "pdf_m2_nonnull",
    "quantile_largest", "sup_cdf",
    "SampleBatch", "empirical_cdf", "ks_distance", "sample_largest_eigs", "stiefel_splitting_check",
    "CapacityQuery", "miso_capacity",
]
