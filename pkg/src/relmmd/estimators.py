"""Unbiased MMD^2 estimators and plug-in estimates of their joint covariance.

All variance quantities here are the leading ``zeta_1`` component of a
second-order U-statistic.  The ``zeta_2`` term, of order ``m^-2``, is not
estimated.

The matrix expressions are evaluated through row sums: with ``s = K e``,
``e^T A B e`` reduces to a dot product of two row-sum vectors, so every
estimator is O(m^2) in the Gram entries and O(m) afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramBundle

GENERAL = "general"
PAIRED = "paired-ustat"

EXACT_USTAT = "exact-ustat"
LEADING_ORDER = "leading-order"
SCALINGS = (EXACT_USTAT, LEADING_ORDER)


@dataclass(frozen=True)
class MmdEstimate:
    value: float
    m: int
    n: int
    estimator_form: str = GENERAL

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class JointMmdEstimate:
    """Two MMD^2 estimates sharing the reference sample, with their 2x2 covariance."""

    mmd_xy: MmdEstimate
    mmd_xz: MmdEstimate
    var_xy: float
    var_xz: float
    cov_xyxz: float
    m: int
    n: int
    r: int

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mmd_xy.value, self.mmd_xz.value])

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.var_xy, self.cov_xyxz], [self.cov_xyxz, self.var_xz]])

    @property
    def difference_variance(self) -> float:
        """``var_xy + var_xz - 2 cov_xyxz`` as estimated, before any flooring."""
        return self.var_xy + self.var_xz - 2.0 * self.cov_xyxz


def _within(K: np.ndarray, name: str, min_size: int) -> np.ndarray:
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"{name} must be square, got shape {K.shape}")
    if K.shape[0] < min_size:
        raise ValueError(f"{name} has size {K.shape[0]}; at least {min_size} is required")
    if np.any(np.diagonal(K) != 0):
        raise ValueError(f"{name} must have a zero diagonal")
    return K


def _cross(K: np.ndarray, rows: int, cols: int, name: str) -> np.ndarray:
    K = np.asarray(K, dtype=np.float64)
    if K.shape != (rows, cols):
        raise ValueError(f"{name} has shape {K.shape}, expected {(rows, cols)}")
    return K


def mmd2_general(ktil_xx, ktil_yy, k_xy) -> MmdEstimate:
    """Unbiased MMD^2 for samples of sizes ``m`` and ``n`` (may differ).

    Two within-sample U-statistics minus twice the full cross-sample mean.
    """
    ktil_xx = _within(ktil_xx, "ktil_xx", 2)
    ktil_yy = _within(ktil_yy, "ktil_yy", 2)
    m, n = ktil_xx.shape[0], ktil_yy.shape[0]
    k_xy = _cross(k_xy, m, n, "k_xy")
    value = ktil_xx.sum() / (m * (m - 1)) + ktil_yy.sum() / (n * (n - 1)) - 2.0 * k_xy.sum() / (m * n)
    return MmdEstimate(float(value), m, n, GENERAL)


def mmd2_paired(ktil_xx, ktil_yy, k_xy) -> MmdEstimate:
    """Unbiased MMD^2 as a one-sample U-statistic over pairs ``v_i = (x_i, y_i)``.

    Uses ``h(v_i, v_j) = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(x_j,y_i)``
    summed over ``i != j``; the cross diagonal ``k(x_i, y_i)`` never enters.
    Requires ``m == n``.
    """
    ktil_xx = _within(ktil_xx, "ktil_xx", 2)
    ktil_yy = _within(ktil_yy, "ktil_yy", 2)
    m, n = ktil_xx.shape[0], ktil_yy.shape[0]
    if m != n:
        raise ValueError(f"paired estimator needs m == n, got m={m}, n={n}")
    k_xy = _cross(k_xy, m, n, "k_xy")
    H = ktil_xx + ktil_yy - k_xy - k_xy.T
    np.fill_diagonal(H, 0.0)
    value = H.sum() / (m * (m - 1))
    return MmdEstimate(float(value), m, n, PAIRED)


def variance_zeta1(ktil_xx, ktil_yy, k_xy) -> float:
    """Plug-in ``zeta_1`` for the variance of the X-Y MMD^2 estimate.

    ``zeta_1 = Var[E h(v_1, V_2) | v_1]``, expanded into within-X, within-Y and
    cross terms, each replaced by its empirical counterpart.
    """
    ktil_xx = _within(ktil_xx, "ktil_xx", 3)
    ktil_yy = _within(ktil_yy, "ktil_yy", 3)
    m, n = ktil_xx.shape[0], ktil_yy.shape[0]
    k_xy = _cross(k_xy, m, n, "k_xy")

    sx = ktil_xx.sum(axis=1)
    sy = ktil_yy.sum(axis=1)
    rxy = k_xy.sum(axis=1)
    cxy = k_xy.sum(axis=0)
    e_xx, e_yy, e_xy = sx.sum(), sy.sum(), rxy.sum()

    zeta = sx @ sx / (m * (m - 1) ** 2) - (e_xx / (m * (m - 1))) ** 2
    zeta -= 2.0 * (sx @ rxy / (m * (m - 1) * n) - e_xx * e_xy / (m**2 * (m - 1) * n))
    zeta += sy @ sy / (n * (n - 1) ** 2) - (e_yy / (n * (n - 1))) ** 2
    zeta -= 2.0 * (sy @ cxy / (n * (n - 1) * m) - e_yy * e_xy / (n**2 * (n - 1) * m))
    zeta += rxy @ rxy / (n**2 * m) - 2.0 * (e_xy / (n * m)) ** 2 + cxy @ cxy / (m**2 * n)
    return float(zeta)


def covariance_zeta1(bundle: GramBundle, printed: bool = False) -> float:
    """Plug-in ``zeta_1`` for the covariance of the X-Y and X-Z MMD^2 estimates.

    Only the shared sample X contributes:
    ``Cov(<phi(x),mu_x - mu_y>, <phi(x),mu_x - mu_z>)`` over ``x ~ P_x``.

    With ``printed=True`` the third bracket's mean product uses the X-Z cross
    mean in place of the X-Y one.  That variant is kept for comparison only; it
    is not symmetric in Y and Z and does not match the expectation it estimates.
    """
    ktil_xx = _within(bundle.ktil_xx, "ktil_xx", 3)
    m, n, r = bundle.m, bundle.n, bundle.r
    if n < 3 or r < 3:
        raise ValueError(f"sizes must be at least 3, got n={n}, r={r}")
    k_xy = _cross(bundle.k_xy, m, n, "k_xy")
    k_xz = _cross(bundle.k_xz, m, r, "k_xz")

    sx = ktil_xx.sum(axis=1)
    rxy = k_xy.sum(axis=1)
    rxz = k_xz.sum(axis=1)
    e_xx, e_xy, e_xz = sx.sum(), rxy.sum(), rxz.sum()

    zeta = sx @ sx / (m * (m - 1) ** 2) - (e_xx / (m * (m - 1))) ** 2
    zeta -= sx @ rxz / (m * (m - 1) * r) - e_xx * e_xz / (m**2 * (m - 1) * r)
    if printed:
        zeta -= sx @ rxy / (m * (m - 1) * n) - e_xx * e_xz / (m**2 * (m - 1) * n)
    else:
        zeta -= sx @ rxy / (m * (m - 1) * n) - e_xx * e_xy / (m**2 * (m - 1) * n)
    zeta += rxy @ rxz / (m * n * r) - e_xy * e_xz / (m**2 * n * r)
    return float(zeta)


def diff_variance_direct(bundle: GramBundle, printed: bool = False) -> float:
    """Plug-in ``zeta_1`` of the difference statistic MMD^2(X,Y) - MMD^2(X,Z).

    Treats the difference as a single U-statistic over triples
    ``d_i = (x_i, y_i, z_i)``, so ``m == n == r`` is required.  The within-X
    kernel cancels from the difference and does not appear.

    ``printed=True`` reproduces the variant whose final bracket subtracts the
    Y-block mean product instead of the Z-block one.
    """
    m, n, r = bundle.m, bundle.n, bundle.r
    if not m == n == r:
        raise ValueError(f"difference estimator needs m == n == r, got {m}, {n}, {r}")
    if m < 3:
        raise ValueError(f"sizes must be at least 3, got {m}")
    ktil_yy = _within(bundle.ktil_yy, "ktil_yy", 3)
    ktil_zz = _within(bundle.ktil_zz, "ktil_zz", 3)
    k_xy = _cross(bundle.k_xy, m, n, "k_xy")
    k_xz = _cross(bundle.k_xz, m, r, "k_xz")

    sy, sz = ktil_yy.sum(axis=1), ktil_zz.sum(axis=1)
    rxy, cxy = k_xy.sum(axis=1), k_xy.sum(axis=0)
    rxz, cxz = k_xz.sum(axis=1), k_xz.sum(axis=0)
    u_yy = sy.sum() / (n * (n - 1))
    u_zz = sz.sum() / (r * (r - 1))
    u_xy = rxy.sum() / (n * m)
    u_xz = rxz.sum() / (r * m)

    zeta = sy @ sy / (n * (n - 1) ** 2) - u_yy**2
    zeta += rxy @ rxy / (n**2 * m) - u_xy**2
    zeta += cxy @ cxy / (n * m**2) - u_xy**2
    zeta += sz @ sz / (r * (r - 1) ** 2) - u_zz**2
    zeta += cxz @ cxz / (r * m**2) - u_xz**2
    zeta += rxz @ rxz / (r**2 * m) - u_xz**2
    zeta -= 2.0 * (sy @ cxy / (n * (n - 1) * m) - u_yy * u_xy)
    zeta -= 2.0 * (rxy @ rxz / (n * m * r) - u_xy * u_xz)
    if printed:
        zeta -= 2.0 * (sz @ cxz / (r * (r - 1) * m) - u_yy * u_xy)
    else:
        zeta -= 2.0 * (sz @ cxz / (r * (r - 1) * m) - u_zz * u_xz)
    return float(zeta)


def variance_prefactor(m: int, scaling: str = EXACT_USTAT) -> float:
    """Factor turning ``zeta_1`` into a variance: ``4(m-2)/(m(m-1))`` or ``4/m``."""
    if scaling == EXACT_USTAT:
        return 4.0 * (m - 2) / (m * (m - 1))
    if scaling == LEADING_ORDER:
        return 4.0 / m
    raise ValueError(f"unknown scaling {scaling!r}; expected one of {SCALINGS}")


def joint_estimate(bundle: GramBundle, scaling: str = EXACT_USTAT, printed: bool = False) -> JointMmdEstimate:
    """Both MMD^2 estimates and their estimated covariance matrix.

    The prefactor is based on the reference size ``m`` for every entry,
    including when ``n`` or ``r`` differ from it.  Negative plug-in variances
    are floored at zero; the covariance is reported as estimated.
    """
    m, n, r = bundle.m, bundle.n, bundle.r
    if min(m, n, r) < 3:
        raise ValueError(f"sizes must be at least 3, got m={m}, n={n}, r={r}")
    c = variance_prefactor(m, scaling)
    mmd_xy = mmd2_general(bundle.ktil_xx, bundle.ktil_yy, bundle.k_xy)
    mmd_xz = mmd2_general(bundle.ktil_xx, bundle.ktil_zz, bundle.k_xz)
    var_xy = c * variance_zeta1(bundle.ktil_xx, bundle.ktil_yy, bundle.k_xy)
    var_xz = c * variance_zeta1(bundle.ktil_xx, bundle.ktil_zz, bundle.k_xz)
    cov = c * covariance_zeta1(bundle, printed=printed)
    if not all(np.isfinite([mmd_xy.value, mmd_xz.value, var_xy, var_xz, cov])):
        raise ValueError("non-finite estimate; check the kernel matrices")
    return JointMmdEstimate(mmd_xy, mmd_xz, max(var_xy, 0.0), max(var_xz, 0.0), cov, m, n, r)
