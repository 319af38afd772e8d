"""Spatial covariance estimation, decorrelation and eigendecomposition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, UsageError
from .signal_sim import SnapshotMatrix

_ASYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Smoothing:
    """Which decorrelation was applied to a covariance estimate.

    ``kind`` is one of ``none``, ``forward_backward``, ``forward_spatial``,
    ``forward_backward_spatial``; the spatial kinds carry ``subarray_len``.
    """

    kind: str = "none"
    subarray_len: Optional[int] = None

    KINDS = ("none", "forward_backward", "forward_spatial", "forward_backward_spatial")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown smoothing kind {self.kind!r}")
        spatial = self.kind.endswith("spatial")
        if spatial != (self.subarray_len is not None):
            raise DomainError("subarray_len is required for spatial smoothing and only then")

    @property
    def backward(self) -> bool:
        return self.kind.startswith("forward_backward")

    def __str__(self):
        return self.kind if self.subarray_len is None else f"{self.kind}({self.subarray_len})"


NO_SMOOTHING = Smoothing()


@dataclass(frozen=True)
class HermitianCovariance:
    """Hermitian covariance estimate.

    The matrix is symmetrized as ``(R + R^H) / 2`` on construction. Inputs
    whose relative asymmetry exceeds 1e-12 are rejected.
    """

    matrix: np.ndarray
    num_snapshots_used: Optional[int] = None
    smoothing: Smoothing = NO_SMOOTHING

    def __post_init__(self):
        R = np.array(self.matrix, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] == 0:
            raise DomainError("covariance must be a non-empty square matrix")
        if not np.all(np.isfinite(R)):
            raise DomainError("covariance has non-finite entries")
        scale = np.linalg.norm(R)
        if scale > 0 and np.linalg.norm(R - R.conj().T) > _ASYMMETRY_TOL * scale:
            raise DomainError("covariance is not Hermitian")
        R = 0.5 * (R + R.conj().T)
        R.setflags(write=False)
        object.__setattr__(self, "matrix", R)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]


def sample_covariance(x: SnapshotMatrix) -> HermitianCovariance:
    """``X X^H / N``."""
    X = x.samples if isinstance(x, SnapshotMatrix) else np.asarray(x)
    if X.ndim != 2 or X.size == 0:
        raise DomainError("snapshot matrix is empty")
    n = X.shape[1]
    return HermitianCovariance(X @ X.conj().T / n, n)


def _exchange(R):
    # J conj(R) J, J being the anti-identity
    return R[::-1, ::-1].conj()


def forward_backward_average(r: HermitianCovariance) -> HermitianCovariance:
    """``(R + J conj(R) J) / 2``. Only valid on an unsmoothed estimate."""
    if r.smoothing.kind != "none":
        raise UsageError(f"covariance already smoothed ({r.smoothing}); apply once to a raw estimate")
    R = r.matrix
    return HermitianCovariance(
        0.5 * (R + _exchange(R)), r.num_snapshots_used, Smoothing("forward_backward")
    )


def spatial_smoothing(
    x: SnapshotMatrix, subarray_len: int, forward_backward: bool = False
) -> HermitianCovariance:
    """Averages covariances of the M - L + 1 sliding length-L subarrays.

    Args:
        x: Array snapshots.
        subarray_len: Subarray length L, ``2 <= L <= M``.
        forward_backward: Also average with the conjugate-backward result.

    Returns:
        An L x L :class:`HermitianCovariance`.
    """
    full = sample_covariance(x)
    m = full.size
    if int(subarray_len) != subarray_len or not 2 <= subarray_len <= m:
        raise DomainError(f"subarray length must be in [2, {m}], got {subarray_len!r}")
    L = int(subarray_len)
    R = full.matrix
    K = m - L + 1
    Rf = sum(R[k:k + L, k:k + L] for k in range(K)) / K
    kind = "forward_spatial"
    if forward_backward:
        Rf = 0.5 * (Rf + _exchange(Rf))
        kind = "forward_backward_spatial"
    return HermitianCovariance(Rf, full.num_snapshots_used, Smoothing(kind, L))


def eigendecompose(r: HermitianCovariance) -> EigenSystem:
    """Descending eigendecomposition with a deterministic phase per column.

    Each eigenvector is rotated so that its largest-magnitude entry is real
    and positive. Equal eigenvalues keep the order returned by LAPACK.
    """
    R = r.matrix if isinstance(r, HermitianCovariance) else np.asarray(r, dtype=complex)
    if not np.all(np.isfinite(R)):
        raise DomainError("covariance has non-finite entries")
    w, Q = np.linalg.eigh(R)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    Q = Q[:, order]
    pivot = np.argmax(np.abs(Q), axis=0)
    ref = Q[pivot, np.arange(Q.shape[1])]
    Q = Q * (np.abs(ref) / ref)[None, :]
    return EigenSystem(w, Q)
