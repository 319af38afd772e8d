"""Synthetic narrowband snapshots for a uniform linear array.

The model is ``X = A S + V`` with circular complex Gaussian source
waveforms ``S`` and white circular complex Gaussian noise ``V``. Sources
that share a ``correlation_group`` label are scaled copies of a single
waveform (fully coherent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .array_model import ArrayGeometry, manifold_matrix
from .errors import DomainError


@dataclass(frozen=True)
class SourceSpec:
    theta: float
    power: float = 1.0
    correlation_group: Optional[str] = None

    def __post_init__(self):
        if not np.isfinite(self.theta) or abs(self.theta) > 90.0:
            raise DomainError(f"source angle must lie in [-90, 90], got {self.theta!r}")
        if not np.isfinite(self.power) or self.power <= 0:
            raise DomainError(f"source power must be positive, got {self.power!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything needed to reproduce one batch of snapshots.

    ``snr_db`` is the per-source SNR against per-element noise power; pass
    ``math.inf`` for noiseless data.
    """

    geometry: ArrayGeometry
    sources: Sequence[SourceSpec]
    num_snapshots: int
    snr_db: float = 20.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.sources:
            raise DomainError("a scenario needs at least one source")
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise DomainError(f"num_snapshots must be >= 1, got {self.num_snapshots!r}")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise DomainError(f"snr_db must be a number or +inf, got {self.snr_db!r}")
        if int(self.rng_seed) != self.rng_seed or self.rng_seed < 0:
            raise DomainError(f"rng_seed must be an unsigned integer, got {self.rng_seed!r}")

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.sources], dtype=float)

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    def with_seed(self, seed: int) -> ScenarioSpec:
        return ScenarioSpec(self.geometry, self.sources, self.num_snapshots, self.snr_db, seed)


@dataclass(frozen=True)
class SnapshotMatrix:
    """M x N complex baseband samples (rows: elements, columns: time)."""

    samples: np.ndarray
    geometry: Optional[ArrayGeometry] = field(default=None, compare=False)

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim != 2 or x.size == 0:
            raise DomainError("snapshot matrix must be a non-empty 2-D array")
        if self.geometry is not None and x.shape[0] != self.geometry.num_elements:
            raise DomainError(
                f"{x.shape[0]} rows do not match a {self.geometry.num_elements}-element array"
            )
        object.__setattr__(self, "samples", x.astype(complex, copy=False))

    @property
    def num_elements(self) -> int:
        return self.samples.shape[0]

    @property
    def num_snapshots(self) -> int:
        return self.samples.shape[1]

    @property
    def envelope(self) -> np.ndarray:
        return np.abs(self.samples)

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.samples)


def noise_variance(spec: ScenarioSpec) -> float:
    """Per-element noise power implied by ``spec.snr_db``.

    The reference signal power is the mean source power, which equals every
    source's power in equal-power scenarios.
    """
    if spec.snr_db == math.inf:
        return 0.0
    p_ref = float(np.mean([s.power for s in spec.sources]))
    return p_ref / 10.0 ** (spec.snr_db / 10.0)


def _waveform_groups(sources):
    # one independent waveform per group label, in order of first appearance
    keys = []
    index = []
    for k, s in enumerate(sources):
        key = ("group", s.correlation_group) if s.correlation_group is not None else ("solo", k)
        if key not in keys:
            keys.append(key)
        index.append(keys.index(key))
    return len(keys), np.array(index)


def source_covariance(spec: ScenarioSpec) -> np.ndarray:
    """Analytic D x D source correlation matrix ``E[s s^H]``."""
    _, group = _waveform_groups(spec.sources)
    amp = np.sqrt([s.power for s in spec.sources])
    same = group[:, None] == group[None, :]
    return (np.outer(amp, amp) * same).astype(complex)


def model_covariance(spec: ScenarioSpec) -> np.ndarray:
    """Analytic array covariance ``A Rss A^H + sigma^2 I``."""
    A = manifold_matrix(spec.geometry, spec.thetas)
    R = A @ source_covariance(spec) @ A.conj().T
    return R + noise_variance(spec) * np.eye(spec.geometry.num_elements)


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def simulate(spec: ScenarioSpec) -> SnapshotMatrix:
    """Draws ``spec.num_snapshots`` array snapshots.

    Deterministic for a given ``spec.rng_seed``; each call owns its own
    generator.
    """
    rng = np.random.default_rng(spec.rng_seed)
    n = spec.num_snapshots
    m = spec.geometry.num_elements
    num_waveforms, group = _waveform_groups(spec.sources)
    waveforms = _cn(rng, (num_waveforms, n))
    amp = np.sqrt([s.power for s in spec.sources])
    S = amp[:, None] * waveforms[group]
    A = manifold_matrix(spec.geometry, spec.thetas)
    X = A @ S
    sigma2 = noise_variance(spec)
    if sigma2 > 0:
        X = X + np.sqrt(sigma2) * _cn(rng, (m, n))
    return SnapshotMatrix(X, spec.geometry)
