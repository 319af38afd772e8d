"""Source enumeration with the AIC and MDL information criteria.

Both criteria share the log-likelihood term

    -N (M - d) log(g(d) / a(d))

with ``g`` and ``a`` the geometric and arithmetic means of the ``M - d``
smallest eigenvalues, and differ in the penalty added to it. Logs are
natural.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

METHODS = ("aic", "mdl")
PENALTY_VARIANTS = ("standard", "forward_only", "forward_backward")
_EIG_FLOOR = 1e-30
# eigenvalues below this fraction of the largest are treated as exact zeros
_REL_FLOOR = 1e-12


@dataclass(frozen=True)
class EnumerationResult:
    num_sources: int
    criterion_values: np.ndarray
    method: str
    penalty_variant: str = "standard"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "penalty_variant": self.penalty_variant,
            "num_sources": int(self.num_sources),
            "criterion_values": [float(v) for v in self.criterion_values],
        }


def penalty(method: str, variant: str, d: int, M: int, N: int) -> float:
    """Penalty term for ``d`` sources, ``M`` sensors and ``N`` snapshots.

    ``forward_only`` and ``forward_backward`` are the corrections for
    spatially smoothed covariances.
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    if variant not in PENALTY_VARIANTS:
        raise DomainError(f"unknown penalty variant {variant!r}")
    if variant == "standard":
        dof = d * (2 * M - d)
        return float(dof) if method == "aic" else 0.5 * dof * np.log(N)
    if variant == "forward_only":
        dof = d * (2 * M - 2 * d + 1)
        return float(dof) if method == "aic" else 0.5 * dof * np.log(N)
    if method == "aic":
        return 0.5 * d * (2 * M - 2 * d + 1)
    return 0.25 * d * (2 * M - d + 1) * np.log(N)


def log_likelihood_term(eigenvalues, num_snapshots: int) -> np.ndarray:
    """Data term for every candidate ``d = 0 .. M-1``."""
    lam = _validated(eigenvalues, num_snapshots)
    M = lam.size
    out = np.empty(M)
    for d in range(M):
        tail = lam[d:]
        log_g = np.mean(np.log(tail))
        log_a = np.log(np.mean(tail))
        out[d] = -num_snapshots * (M - d) * (log_g - log_a)
    # g <= a, so the term is >= 0 apart from rounding
    return np.maximum(out, 0.0)


def _validated(eigenvalues, num_snapshots):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise DomainError("need at least two eigenvalues")
    if not np.all(np.isfinite(lam)):
        raise DomainError("eigenvalues must be finite")
    if np.any(np.diff(lam) > 1e-12 * max(abs(lam[0]), 1.0)):
        raise DomainError("eigenvalues must be sorted in descending order")
    if int(num_snapshots) != num_snapshots or num_snapshots < 1:
        raise DomainError("num_snapshots must be a positive integer")
    return np.maximum(lam, max(_EIG_FLOOR, _REL_FLOOR * lam[0]))


def _criterion(method, eigenvalues, num_snapshots, penalty_variant):
    data = log_likelihood_term(eigenvalues, num_snapshots)
    M = data.size
    values = data + np.array(
        [penalty(method, penalty_variant, d, M, num_snapshots) for d in range(M)]
    )
    # np.argmin returns the first minimum, i.e. the smallest d on ties
    return EnumerationResult(int(np.argmin(values)), values, method, penalty_variant)


def aic(eigenvalues, num_snapshots: int, penalty_variant: str = "standard") -> EnumerationResult:
    """Akaike information criterion over d = 0 .. M-1."""
    return _criterion("aic", eigenvalues, num_snapshots, penalty_variant)


def mdl(eigenvalues, num_snapshots: int, penalty_variant: str = "standard") -> EnumerationResult:
    """Minimum description length criterion over d = 0 .. M-1."""
    return _criterion("mdl", eigenvalues, num_snapshots, penalty_variant)


def penalty_variant_for(smoothing) -> str:
    """Penalty variant matching a :class:`~doakit.covariance.Smoothing` tag."""
    if smoothing.kind == "forward_spatial":
        return "forward_only"
    if smoothing.backward:
        return "forward_backward"
    return "standard"
