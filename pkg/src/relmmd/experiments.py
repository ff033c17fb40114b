"""Synthetic Gaussian studies: gamma sweeps, power, null calibration, iso-curves.

Every repetition draws from its own random stream, keyed by
``(seed, gamma index, repetition index)`` through ``numpy.random.SeedSequence``,
so results do not depend on how many worker threads run them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .estimators import EXACT_USTAT, joint_estimate
from .kernels import GAUSSIAN_RBF, LINEAR, KernelSpec, gram_bundle, relative_bandwidth
from .reltest import Decision, TestResult, relative_test, split_test

# spawn-key slot reserved for draws that belong to no gamma/repetition cell
_PILOT_KEY = 2**32 - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the cell identified by ``keys``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def n_threads() -> int:
    raw = os.environ.get("RELMMD_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"RELMMD_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"RELMMD_THREADS must be a positive integer, got {raw!r}")
    return value


def _map(fn, items):
    items = list(items)
    workers = min(n_threads(), len(items)) or 1
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def rotation(degrees: float) -> np.ndarray:
    t = math.radians(degrees)
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def rotated_covariance(scales=(4.0, 0.25), degrees: float = 0.0) -> tuple:
    R = rotation(degrees)
    C = R @ np.diag(scales) @ R.T
    return tuple(map(tuple, C))


def default_gammas() -> tuple:
    return tuple(float(g) for g in np.linspace(0.1, 0.9, 41))


@dataclass(frozen=True)
class ExperimentConfig:
    """Three Gaussians with ``mu_x = (1 - gamma) mu_y + gamma mu_z``.

    Covariances default to the identity.  ``bandwidth=None`` selects the
    averaged median heuristic from each repetition's data (or, for the
    iso-curve study, once from a pilot draw).
    """

    mu_y: tuple = (-5.0, -5.0)
    mu_z: tuple = (5.0, 5.0)
    gammas: tuple = field(default_factory=default_gammas)
    m: int = 500
    n: int | None = None
    r: int | None = None
    repetitions: int = 100
    seed: int = 0
    kernel: str = GAUSSIAN_RBF
    bandwidth: float | None = None
    alpha: float = 0.05
    cov_x: tuple | None = None
    cov_y: tuple | None = None
    cov_z: tuple | None = None
    name: str = "gaussian-means"

    def __post_init__(self):
        object.__setattr__(self, "mu_y", tuple(float(v) for v in self.mu_y))
        object.__setattr__(self, "mu_z", tuple(float(v) for v in self.mu_z))
        gammas = self.gammas
        if np.isscalar(gammas):
            gammas = (gammas,)
        object.__setattr__(self, "gammas", tuple(float(g) for g in gammas))
        object.__setattr__(self, "n", self.m if self.n is None else int(self.n))
        object.__setattr__(self, "r", self.m if self.r is None else int(self.r))
        for name in ("cov_x", "cov_y", "cov_z"):
            c = getattr(self, name)
            if c is not None:
                object.__setattr__(self, name, tuple(tuple(float(v) for v in row) for row in np.asarray(c)))
        self.validate()

    def validate(self):
        if len(self.mu_y) != len(self.mu_z) or len(self.mu_y) == 0:
            raise ValueError("mu_y and mu_z must be non-empty and of equal length")
        if not self.gammas:
            raise ValueError("gamma grid is empty")
        g = np.asarray(self.gammas)
        if np.any(g <= 0) or np.any(g >= 1):
            raise ValueError("gamma values must lie strictly inside (0, 1)")
        if np.any(np.diff(g) <= 0):
            raise ValueError("gamma grid must be strictly increasing")
        if min(self.m, self.n, self.r) < 3:
            raise ValueError("sample sizes must be at least 3")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.kernel not in (GAUSSIAN_RBF, LINEAR):
            KernelSpec(self.kernel, 1.0)
        if self.bandwidth is not None and not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError("bandwidth must be positive and finite")
        d = len(self.mu_y)
        for name in ("cov_x", "cov_y", "cov_z"):
            c = getattr(self, name)
            if c is not None and np.asarray(c).shape != (d, d):
                raise ValueError(f"{name} must be {d}x{d}")

    @property
    def dim(self) -> int:
        return len(self.mu_y)

    def mu_x(self, gamma: float) -> np.ndarray:
        return (1.0 - gamma) * np.asarray(self.mu_y) + gamma * np.asarray(self.mu_z)

    def echo(self) -> dict:
        return asdict(self)


def sample_gaussian(mean, count: int, rng: np.random.Generator, cov=None) -> np.ndarray:
    """``count`` i.i.d. draws from N(mean, cov); identity covariance when ``cov`` is None."""
    mean = np.asarray(mean, dtype=np.float64)
    if count < 1:
        raise ValueError("count must be positive")
    noise = rng.standard_normal((count, mean.shape[0]))
    if cov is not None:
        noise = noise @ np.linalg.cholesky(np.asarray(cov, dtype=np.float64)).T
    return mean + noise


def draw_triplet(config: ExperimentConfig, gamma: float, rng: np.random.Generator):
    X = sample_gaussian(config.mu_x(gamma), config.m, rng, config.cov_x)
    Y = sample_gaussian(config.mu_y, config.n, rng, config.cov_y)
    Z = sample_gaussian(config.mu_z, config.r, rng, config.cov_z)
    return X, Y, Z


def _kernel_for(config: ExperimentConfig, X, Y, Z) -> KernelSpec:
    if config.kernel == LINEAR:
        return KernelSpec.linear()
    bw = config.bandwidth if config.bandwidth is not None else relative_bandwidth(X, Y, Z)
    return KernelSpec(config.kernel, bw)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    mean_p: float
    rejection_rate_favor_z: float
    rejection_rate_favor_y: float
    inconclusive_rate: float
    mean_statistic: float
    mean_projected_sd: float


@dataclass(frozen=True)
class SweepReport:
    config: ExperimentConfig
    rows: tuple
    p_values: np.ndarray  # (len(gammas), repetitions)
    method: str = "relative"

    def row(self, gamma: float) -> SweepRow:
        for row in self.rows:
            if math.isclose(row.gamma, gamma, abs_tol=1e-12):
                return row
        raise KeyError(gamma)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])


def _aggregate(gamma: float, results: list) -> SweepRow:
    count = len(results)
    decisions = [res.decision for res in results]
    fz = sum(d == Decision.FAVOR_Z for d in decisions) / count
    fy = sum(d == Decision.FAVOR_Y for d in decisions) / count
    return SweepRow(
        gamma=gamma,
        mean_p=float(np.mean([res.p_value for res in results])),
        rejection_rate_favor_z=fz,
        rejection_rate_favor_y=fy,
        inconclusive_rate=1.0 - fz - fy,
        mean_statistic=float(np.mean([res.statistic for res in results])),
        mean_projected_sd=float(np.mean([res.projected_sd for res in results])),
    )


def _run_cell(config: ExperimentConfig, gi: int, rep: int, methods: tuple) -> dict:
    gamma = config.gammas[gi]
    try:
        rng = stream(config.seed, gi, rep)
        X, Y, Z = draw_triplet(config, gamma, rng)
        spec = _kernel_for(config, X, Y, Z)
        out = {}
        if "relative" in methods:
            joint = joint_estimate(gram_bundle(spec, X, Y, Z), scaling=EXACT_USTAT)
            out["relative"] = relative_test(joint, config.alpha, kernel=spec)
        if "split" in methods:
            out["split"] = split_test(X, Y, Z, spec, config.alpha, rng=rng)
        return out
    except Exception as exc:
        raise RuntimeError(f"experiment failed at gamma={gamma!r}, repetition={rep}: {exc}") from exc


def _sweep(config: ExperimentConfig, methods: tuple) -> dict:
    cells = [(gi, rep) for gi in range(len(config.gammas)) for rep in range(config.repetitions)]
    outputs = _map(lambda c: _run_cell(config, c[0], c[1], methods), cells)
    reports = {}
    for method in methods:
        rows, pvals = [], []
        for gi, gamma in enumerate(config.gammas):
            res = [outputs[gi * config.repetitions + rep][method] for rep in range(config.repetitions)]
            rows.append(_aggregate(gamma, res))
            pvals.append([r.p_value for r in res])
        reports[method] = SweepReport(config, tuple(rows), np.array(pvals), method)
    return reports


def gamma_sweep(config: ExperimentConfig) -> SweepReport:
    """Relative test at every gamma, ``config.repetitions`` fresh draws each."""
    return _sweep(config, ("relative",))["relative"]


def power_comparison(config: ExperimentConfig) -> tuple[SweepReport, SweepReport]:
    """Relative test and split baseline run on the very same draws."""
    if config.m < 6:
        raise ValueError("the split baseline needs m >= 6")
    reports = _sweep(config, ("relative", "split"))
    return reports["relative"], reports["split"]


def mean_power(report: SweepReport, low: float = 0.5, high: float = 0.7) -> float:
    """Average favor-z rate over gammas in ``(low, high]``."""
    g = report.column("gamma")
    mask = (g > low + 1e-9) & (g <= high + 1e-9)
    if not mask.any():
        raise ValueError(f"no gamma in ({low}, {high}]")
    return float(report.column("rejection_rate_favor_z")[mask].mean())


CALIBRATION_GEOMETRIES = ("means", "means-orientations", "orientations")


def calibration_config(geometry: str = "means", m: int = 500, repetitions: int = 200, seed: int = 0, **kw) -> ExperimentConfig:
    """A null-boundary configuration where MMD(x,y) = MMD(x,z) by symmetry.

    ``means``: isotropic Gaussians at -5, 0, +5 along the diagonal.
    ``means-orientations``: Y and Z share a +45 degree anisotropic covariance,
    X is axis-aligned; Y and Z are point reflections of each other about X's
    mean.
    ``orientations``: all centered at the origin, X axis-aligned, Y and Z
    rotated by +45 and -45 degrees, mirror images across the first axis.
    The anisotropic scales diag(4, 0.25) are illustrative choices.
    """
    if geometry == "means":
        return ExperimentConfig(gammas=(0.5,), m=m, repetitions=repetitions, seed=seed, name=geometry, **kw)
    if geometry == "means-orientations":
        return ExperimentConfig(
            mu_y=(-3.0, -3.0), mu_z=(3.0, 3.0), gammas=(0.5,), m=m, repetitions=repetitions, seed=seed,
            cov_x=rotated_covariance(degrees=0.0), cov_y=rotated_covariance(degrees=45.0),
            cov_z=rotated_covariance(degrees=45.0), name=geometry, **kw,
        )
    if geometry == "orientations":
        return ExperimentConfig(
            mu_y=(0.0, 0.0), mu_z=(0.0, 0.0), gammas=(0.5,), m=m, repetitions=repetitions, seed=seed,
            cov_x=rotated_covariance(degrees=0.0), cov_y=rotated_covariance(degrees=45.0),
            cov_z=rotated_covariance(degrees=-45.0), name=geometry, **kw,
        )
    raise ValueError(f"unknown calibration geometry {geometry!r}; expected one of {CALIBRATION_GEOMETRIES}")


def default_alpha_grid() -> np.ndarray:
    return np.round(np.linspace(0.01, 0.99, 99), 10)


@dataclass(frozen=True)
class CalibrationReport:
    config: ExperimentConfig
    p_values: np.ndarray
    ks_statistic: float
    ks_pvalue: float
    alpha_grid: np.ndarray
    false_positive_rates: np.ndarray

    def false_positive_rate(self, alpha: float) -> float:
        return float(np.mean(self.p_values <= alpha))


def calibration_run(config: ExperimentConfig, alpha_grid=None) -> CalibrationReport:
    """p-values at the null boundary, compared with U(0, 1)."""
    if len(config.gammas) != 1:
        raise ValueError("calibration uses a single gamma")
    g = config.gammas[0]
    mu_x = config.mu_x(g)
    if not math.isclose(np.linalg.norm(mu_x - np.asarray(config.mu_y)), np.linalg.norm(mu_x - np.asarray(config.mu_z)), rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("calibration needs mu_x equidistant from mu_y and mu_z")
    report = gamma_sweep(config)
    p = report.p_values[0]
    ks = stats.kstest(p, "uniform")
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, dtype=np.float64)
    fpr = np.array([np.mean(p <= a) for a in grid])
    return CalibrationReport(config, p, float(ks.statistic), float(ks.pvalue), grid, fpr)


def _gaussian_kernel_mean(delta, S, bandwidth: float) -> float:
    """E exp(-|w|^2 / (2 s^2)) for w ~ N(delta, S)."""
    d = len(delta)
    s2 = bandwidth**2
    A = np.eye(d) + np.asarray(S) / s2
    quad = np.asarray(delta) @ np.linalg.solve(np.asarray(S) + s2 * np.eye(d), np.asarray(delta))
    return float(np.exp(-0.5 * quad) / math.sqrt(np.linalg.det(A)))


def population_mmd2(spec: KernelSpec, mu_a, mu_b, cov_a=None, cov_b=None) -> float:
    """Closed-form MMD^2 between two Gaussians, for the Gaussian or linear kernel."""
    mu_a, mu_b = np.asarray(mu_a, dtype=np.float64), np.asarray(mu_b, dtype=np.float64)
    if spec.family == LINEAR:
        diff = mu_a - mu_b
        return float(diff @ diff)
    d = len(mu_a)
    Ca = np.eye(d) if cov_a is None else np.asarray(cov_a)
    Cb = np.eye(d) if cov_b is None else np.asarray(cov_b)
    zero = np.zeros(d)
    return (
        _gaussian_kernel_mean(zero, 2 * Ca, spec.bandwidth)
        + _gaussian_kernel_mean(zero, 2 * Cb, spec.bandwidth)
        - 2 * _gaussian_kernel_mean(mu_a - mu_b, Ca + Cb, spec.bandwidth)
    )


@dataclass(frozen=True)
class IsocurveReport:
    config: ExperimentConfig
    gamma: float
    kernel: KernelSpec
    pairs: np.ndarray  # (repetitions, 2) of (mmd_xy, mmd_xz)
    covariances: np.ndarray  # (repetitions, 2, 2) estimated per repetition
    center: np.ndarray  # population (MMD^2(x,y), MMD^2(x,z))
    mahalanobis_sq: np.ndarray
    fraction_inside: float
    mc_covariance: np.ndarray
    mean_analytic_covariance: np.ndarray

    @property
    def relative_errors(self) -> np.ndarray:
        return np.abs(self.mean_analytic_covariance - self.mc_covariance) / np.abs(self.mc_covariance)


def isocurve_validation(config: ExperimentConfig, radius: float = 2.0) -> IsocurveReport:
    """Compare scattered MMD pairs with the estimated joint Gaussian.

    The kernel is fixed across repetitions (from ``config.bandwidth`` or the
    averaged median heuristic on one pilot draw) so that all pairs share one
    population mean, which is computed in closed form.
    """
    if config.repetitions < 2:
        raise ValueError("need at least two repetitions")
    gamma = config.gammas[0]
    if config.kernel == LINEAR or config.bandwidth is not None:
        spec = _kernel_for(config, None, None, None)
    else:
        spec = _kernel_for(config, *draw_triplet(config, gamma, stream(config.seed, _PILOT_KEY)))
    mu_x = config.mu_x(gamma)
    center = np.array([
        population_mmd2(spec, mu_x, config.mu_y, config.cov_x, config.cov_y),
        population_mmd2(spec, mu_x, config.mu_z, config.cov_x, config.cov_z),
    ])

    def one(rep):
        try:
            X, Y, Z = draw_triplet(config, gamma, stream(config.seed, 0, rep))
            return joint_estimate(gram_bundle(spec, X, Y, Z))
        except Exception as exc:
            raise RuntimeError(f"iso-curve run failed at gamma={gamma!r}, repetition={rep}: {exc}") from exc

    joints = _map(one, range(config.repetitions))
    pairs = np.array([j.mean for j in joints])
    covs = np.array([j.covariance for j in joints])
    dev = pairs - center
    d2 = np.einsum("ri,rij,rj->r", dev, np.linalg.inv(covs), dev)
    return IsocurveReport(
        config=config,
        gamma=gamma,
        kernel=spec,
        pairs=pairs,
        covariances=covs,
        center=center,
        mahalanobis_sq=d2,
        fraction_inside=float(np.mean(d2 <= radius**2)),
        mc_covariance=np.cov(pairs, rowvar=False),
        mean_analytic_covariance=covs.mean(axis=0),
    )
