"""Relative similarity testing with the maximum mean discrepancy.

Given a reference sample X and two candidate samples Y and Z, decide whether
Z is significantly closer to X than Y is, using the joint asymptotic normal
distribution of the two correlated unbiased MMD^2 estimates.
"""

__version__ = "0.1.0"

from .kernels import KernelSpec, GramBundle, gram_bundle, kernel_eval, median_heuristic, relative_bandwidth
from .estimators import (
    JointMmdEstimate,
    MmdEstimate,
    covariance_zeta1,
    diff_variance_direct,
    joint_estimate,
    mmd2_general,
    mmd2_paired,
    variance_zeta1,
)
from .reltest import Decision, TestResult, relative_similarity_test, relative_test, split_test, std_normal_cdf

__all__ = [
    "Decision",
    "GramBundle",
    "JointMmdEstimate",
    "KernelSpec",
    "MmdEstimate",
    "TestResult",
    "covariance_zeta1",
    "diff_variance_direct",
    "gram_bundle",
    "joint_estimate",
    "kernel_eval",
    "median_heuristic",
    "mmd2_general",
    "mmd2_paired",
    "relative_bandwidth",
    "relative_similarity_test",
    "relative_test",
    "split_test",
    "std_normal_cdf",
    "variance_zeta1",
]
