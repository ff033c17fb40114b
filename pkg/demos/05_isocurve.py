# # How good is the joint normal approximation?
#
# Repeat the experiment many times, scatter the pairs (MMD^2(X,Y), MMD^2(X,Z)),
# and count how many fall inside the 2-sigma ellipse given by the estimated
# covariance.  For a bivariate normal that fraction is 1 - exp(-2), about 0.865.

import numpy as np

from relmmd.experiments import ExperimentConfig, isocurve_validation

rep = isocurve_validation(ExperimentConfig(gammas=(0.5,), m=400, repetitions=60, seed=0))
print("kernel              ", rep.kernel)
print("population center   ", rep.center)
print("fraction inside     ", rep.fraction_inside, "expected", 1 - np.exp(-2))
print("Monte-Carlo cov\n", rep.mc_covariance)
print("mean estimated cov\n", rep.mean_analytic_covariance)

# The estimates are negatively correlated here: moving X toward Y shrinks one
# discrepancy and grows the other.
