"""Kernel functions, Gram matrices and bandwidth heuristics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

GAUSSIAN_RBF = "gaussian-rbf"
LINEAR = "linear"
FAMILIES = (GAUSSIAN_RBF, LINEAR)

_ALIASES = {"rbf": GAUSSIAN_RBF, "gaussian": GAUSSIAN_RBF}


@dataclass(frozen=True)
class KernelSpec:
    """A positive-definite kernel.

    ``gaussian-rbf`` is ``exp(-||u - v||^2 / (2 * bandwidth^2))``; ``linear``
    is the dot product and ignores ``bandwidth``.
    """

    family: str = GAUSSIAN_RBF
    bandwidth: float | None = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", family)
        if family == GAUSSIAN_RBF:
            bw = self.bandwidth
            if bw is None or not math.isfinite(bw) or bw <= 0:
                raise ValueError(f"gaussian-rbf needs a positive finite bandwidth, got {bw!r}")
            object.__setattr__(self, "bandwidth", float(bw))

    @classmethod
    def rbf(cls, bandwidth: float) -> "KernelSpec":
        return cls(GAUSSIAN_RBF, bandwidth)

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(LINEAR)

    def cross(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Kernel matrix between the rows of ``A`` and the rows of ``B``."""
        if self.family == LINEAR:
            return A @ B.T
        return np.exp(-cdist(A, B, "sqeuclidean") / (2.0 * self.bandwidth**2))

    def within(self, A: np.ndarray) -> np.ndarray:
        """Symmetric kernel matrix of ``A`` against itself, diagonal set to zero.

        Every unordered pair is evaluated once and mirrored, so the result is
        symmetric bit for bit.
        """
        if self.family == LINEAR:
            K = np.triu(A @ A.T, 1)
            return K + K.T
        d2 = pdist(A, "sqeuclidean")
        K = squareform(np.exp(-d2 / (2.0 * self.bandwidth**2)))
        return K


def as_samples(A, name: str = "sample") -> np.ndarray:
    """Coerce ``A`` to a finite float64 matrix with one observation per row."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array (rows = observations), got ndim={A.ndim}")
    if A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite values")
    return A


def kernel_eval(spec: KernelSpec, u, v) -> float:
    """Evaluate ``spec`` at a single pair of points."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite input")
    if spec.family == LINEAR:
        return float(np.dot(u, v))
    diff = u - v
    return math.exp(-float(np.dot(diff, diff)) / (2.0 * spec.bandwidth**2))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GramBundle:
    """Kernel matrices for a reference sample X and candidates Y and Z.

    The ``ktil_*`` blocks are within-sample matrices with zeroed diagonals;
    ``k_xy`` and ``k_xz`` are full cross matrices.  Arrays are read-only.
    """

    ktil_xx: np.ndarray
    ktil_yy: np.ndarray
    ktil_zz: np.ndarray
    k_xy: np.ndarray
    k_xz: np.ndarray

    @property
    def m(self) -> int:
        return self.ktil_xx.shape[0]

    @property
    def n(self) -> int:
        return self.ktil_yy.shape[0]

    @property
    def r(self) -> int:
        return self.ktil_zz.shape[0]

    def swapped(self) -> "GramBundle":
        """The same bundle with the roles of Y and Z exchanged."""
        return GramBundle(self.ktil_xx, self.ktil_zz, self.ktil_yy, self.k_xz, self.k_xy)


def gram_bundle(spec: KernelSpec, X, Y, Z, min_size: int = 3) -> GramBundle:
    """Build every kernel block the joint estimators need."""
    X = as_samples(X, "X")
    Y = as_samples(Y, "Y")
    Z = as_samples(Z, "Z")
    if not X.shape[1] == Y.shape[1] == Z.shape[1]:
        raise ValueError(
            f"feature dimension mismatch: X has {X.shape[1]}, Y has {Y.shape[1]}, Z has {Z.shape[1]}"
        )
    for name, A in (("X", X), ("Y", Y), ("Z", Z)):
        if A.shape[0] < min_size:
            raise ValueError(f"{name} has {A.shape[0]} rows; at least {min_size} are required")
    blocks = [spec.within(X), spec.within(Y), spec.within(Z), spec.cross(X, Y), spec.cross(X, Z)]
    for b in blocks:
        if not np.all(np.isfinite(b)):
            raise ValueError("kernel matrix has non-finite entries")
    return GramBundle(*(_readonly(b) for b in blocks))


def median_heuristic(A, B) -> float:
    """Median Euclidean distance over all cross pairs ``(a_i, b_j)``.

    When more than half of the cross pairs coincide the median is zero; the
    smallest nonzero cross distance is returned instead.
    """
    A = as_samples(A, "A")
    B = as_samples(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    d = cdist(A, B, "euclidean").ravel()
    med = float(np.median(d))
    if med > 0:
        return med
    nonzero = d[d > 0]
    if nonzero.size == 0:
        raise ValueError("all cross-pair distances are zero; bandwidth undefined")
    return float(nonzero.min())


def relative_bandwidth(X, Y, Z) -> float:
    """Average of the X-Y and X-Z median heuristics."""
    return (median_heuristic(X, Y) + median_heuristic(X, Z)) / 2.0
