import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relmmd.estimators import JointMmdEstimate, MmdEstimate, joint_estimate
from relmmd.experiments import ExperimentConfig, draw_triplet, stream
from relmmd.kernels import KernelSpec, gram_bundle
from relmmd.reltest import (
    VARIANCE_FLOOR,
    Decision,
    decide,
    relative_similarity_test,
    relative_test,
    split_indices,
    split_test,
    std_normal_cdf,
)

mpmath.mp.dps = 40


def mp_phi(t):
    return float(mpmath.ncdf(mpmath.mpf(t)))


def _joint(mxy, mxz, vxy=1e-4, vxz=2e-4, cov=5e-5):
    return JointMmdEstimate(MmdEstimate(mxy, 10, 10), MmdEstimate(mxz, 10, 10), vxy, vxz, cov, 10, 10, 10)


def test_phi_values():
    assert std_normal_cdf(0.0) == 0.5
    low = std_normal_cdf(-40.0)
    assert 0.0 <= low < 1e-300
    assert std_normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-15)
    assert std_normal_cdf(1.96) == pytest.approx(mp_phi(1.96), abs=1e-15)


def test_phi_grid_against_high_precision():
    t = np.linspace(-8, 8, 2001)
    ours = std_normal_cdf(t)
    ref = np.array([mp_phi(v) for v in t])
    assert np.max(np.abs(ours - ref)) <= 1e-12
    assert np.all(np.diff(ours) >= 0)
    assert np.max(np.abs(ours + std_normal_cdf(-t) - 1)) <= 1e-12


@settings(max_examples=200)
@given(st.floats(-30, 30))
def test_phi_bounded_and_symmetric(t):
    p = std_normal_cdf(t)
    assert 0.0 <= p <= 1.0
    assert abs(p + std_normal_cdf(-t) - 1.0) <= 1e-12


def test_zero_statistic_is_inconclusive():
    res = relative_test(_joint(0.3, 0.3), alpha=0.05)
    assert res.statistic == 0.0
    assert res.p_value == 0.5
    assert res.decision is Decision.INCONCLUSIVE


def test_boundary_rejection():
    sd = np.sqrt(1e-4 + 2e-4 - 2 * 5e-5)
    res = relative_test(_joint(0.2 + 1.6449 * sd, 0.2), alpha=0.05)
    assert res.projected_sd == pytest.approx(sd, rel=1e-14)
    assert res.statistic / res.projected_sd == pytest.approx(1.6449, rel=1e-9)
    assert res.p_value == pytest.approx(mp_phi(-1.6449), abs=1e-12)
    assert res.p_value == pytest.approx(0.05, abs=1e-4)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        relative_test(_joint(0.1, 0.2), alpha)


def test_degenerate_variance_is_flagged_not_raised():
    res = relative_test(_joint(0.5, 0.4, 1e-6, 1e-6, 1e-6), alpha=0.05)
    assert res.degenerate_variance
    assert res.projected_sd == pytest.approx(np.sqrt(VARIANCE_FLOOR))
    assert res.decision is Decision.FAVOR_Z
    assert not relative_test(_joint(0.5, 0.4)).degenerate_variance


@pytest.mark.parametrize("p, expected", [(0.01, "favor-z"), (0.05, "favor-z"), (0.5, "inconclusive"), (0.95, "favor-y"), (0.999, "favor-y")])
def test_decision_rule(p, expected):
    assert decide(p, 0.05).value == expected


@settings(max_examples=100)
@given(st.floats(-0.05, 0.05), st.floats(1e-4, 0.05))
def test_p_decreases_with_statistic(delta, step):
    a = relative_test(_joint(0.3 + delta, 0.3))
    b = relative_test(_joint(0.3 + delta + step, 0.3))
    assert b.p_value <= a.p_value
    if 1e-12 < a.p_value < 1 - 1e-12:
        assert b.p_value < a.p_value


@pytest.mark.parametrize("gamma", [0.45, 0.5, 0.55])
def test_swapping_candidates_reflects_p(gamma):
    cfg = ExperimentConfig(gammas=(gamma,), m=120)
    X, Y, Z = draw_triplet(cfg, gamma, stream(1, 0))
    spec = KernelSpec.rbf(4.0)
    b = gram_bundle(spec, X, Y, Z)
    fwd = relative_test(joint_estimate(b))
    rev = relative_test(joint_estimate(b.swapped()))
    assert rev.statistic == -fwd.statistic
    assert fwd.p_value + rev.p_value == pytest.approx(1.0, abs=1e-12)
    via_samples = relative_similarity_test(X, Z, Y, kernel=spec)
    assert via_samples.p_value == pytest.approx(rev.p_value, abs=1e-12)


def test_relative_similarity_test_on_clear_cases():
    cfg = ExperimentConfig(m=200)
    near_y = relative_similarity_test(*draw_triplet(cfg, 0.1, stream(5, 0)))
    near_z = relative_similarity_test(*draw_triplet(cfg, 0.9, stream(5, 1)))
    assert near_y.decision is Decision.FAVOR_Y and near_y.p_value > 0.95
    assert near_z.decision is Decision.FAVOR_Z and near_z.p_value < 0.05
    assert near_y.kernel.family == "gaussian-rbf" and near_y.kernel.bandwidth > 0


def test_linear_kernel_path():
    cfg = ExperimentConfig(m=100)
    res = relative_similarity_test(*draw_triplet(cfg, 0.9, stream(6, 0)), kernel="linear")
    assert res.kernel == KernelSpec.linear()
    assert res.decision is Decision.FAVOR_Z


def test_split_indices_partition():
    a, b = split_indices(11, 3)
    assert len(a) == 6 and len(b) == 5
    assert sorted(np.concatenate([a, b]).tolist()) == list(range(11))
    a2, _ = split_indices(11, 3)
    assert np.array_equal(a, a2)


def test_split_test_needs_six_rows(rng):
    with pytest.raises(ValueError, match="at least 6"):
        split_test(rng.normal(size=(5, 2)), rng.normal(size=(5, 2)), rng.normal(size=(5, 2)), KernelSpec.rbf(1.0))


def test_split_test_equal_halves_gives_half(rng):
    X = np.ones((8, 2))
    Y = rng.normal(size=(10, 2))
    res = split_test(X, Y, Y, KernelSpec.rbf(1.0), rng=4)
    assert res.mmd_xy == res.mmd_xz
    assert res.p_value == 0.5


def test_split_test_is_deterministic_and_sensible():
    cfg = ExperimentConfig(m=200)
    X, Y, Z = draw_triplet(cfg, 0.9, stream(8, 0))
    spec = KernelSpec.rbf(7.0)
    a = split_test(X, Y, Z, spec, rng=1)
    assert a == split_test(X, Y, Z, spec, rng=1)
    assert a.decision is Decision.FAVOR_Z
