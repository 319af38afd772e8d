"""Delay-and-sum and Capon (minimum variance) angular spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .array_model import ArrayGeometry, steering_matrix
from .covariance import HermitianCovariance
from .errors import DomainError, SingularityError

DEFAULT_GRID_STEP = 0.1
_MAX_CONDITION = 1e12


def default_grid(step: float = DEFAULT_GRID_STEP) -> np.ndarray:
    """Uniform grid over [-90, 90] degrees, both ends included."""
    if step <= 0:
        raise DomainError("grid step must be positive")
    n = int(round(180.0 / step))
    if not np.isclose(n * step, 180.0):
        raise DomainError(f"grid step {step} does not divide 180 degrees")
    return np.linspace(-90.0, 90.0, n + 1)


@dataclass(frozen=True)
class SpectrumTrace:
    """Sampled angular spectrum.

    Attributes:
        angles: Strictly increasing grid in degrees.
        powers: Spectrum values on ``angles``.
        scale: ``"linear"`` or ``"db_normalized"`` (max at 0 dB).
        estimator_name: Label of the estimator that produced the trace.
    """

    angles: np.ndarray
    powers: np.ndarray
    scale: str = "linear"
    estimator_name: str = ""

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        powers = np.asarray(self.powers, dtype=float)
        if angles.ndim != 1 or angles.size == 0 or angles.shape != powers.shape:
            raise DomainError("angles and powers must be matching non-empty vectors")
        if np.any(np.diff(angles) <= 0) or np.any(np.abs(angles) > 90.0):
            raise DomainError("angles must be strictly increasing within [-90, 90]")
        if not np.all(np.isfinite(powers)):
            raise DomainError("spectrum has non-finite values")
        if self.scale not in ("linear", "db_normalized"):
            raise DomainError(f"unknown scale {self.scale!r}")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "powers", powers)

    @property
    def step(self) -> float:
        return float(np.median(np.diff(self.angles))) if self.angles.size > 1 else 0.0

    def to_db(self) -> SpectrumTrace:
        """Normalized dB trace; the maximum maps to 0 dB."""
        if self.scale == "db_normalized":
            return self
        if np.any(self.powers <= 0):
            raise DomainError("dB conversion needs strictly positive powers")
        db = 10.0 * np.log10(self.powers / self.powers.max())
        return SpectrumTrace(self.angles, db, "db_normalized", self.estimator_name)


def _grid_steering(r, geometry, grid):
    if r.size != geometry.num_elements:
        raise DomainError(
            f"covariance is {r.size}x{r.size} but the array has {geometry.num_elements} elements"
        )
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("angle grid must be a non-empty vector")
    return grid, steering_matrix(geometry, grid)


def delay_and_sum_spectrum(
    r: HermitianCovariance, geometry: ArrayGeometry, grid=None
) -> SpectrumTrace:
    """Classical beamformer output power ``a^H R a`` on each grid angle."""
    grid, A = _grid_steering(r, geometry, grid)
    p = np.einsum("mk,mn,nk->k", A.conj(), r.matrix, A)
    trace = np.real(np.trace(r.matrix))
    if np.max(np.abs(p.imag), initial=0.0) > 1e-9 * max(trace, np.finfo(float).tiny):
        raise DomainError("delay-and-sum power has a non-negligible imaginary part")
    return SpectrumTrace(grid, p.real, "linear", "delay_sum")


def capon_spectrum(
    r: HermitianCovariance, geometry: ArrayGeometry, grid=None, loading=None
) -> SpectrumTrace:
    """Capon spectrum ``1 / (a^H (R + delta I)^-1 a)``.

    Args:
        r: Covariance estimate.
        geometry: Array matching ``r``.
        grid: Angles in degrees; defaults to :func:`default_grid`.
        loading: Diagonal loading delta >= 0. Defaults to
            ``1e-6 * trace(R) / M``.

    Raises:
        SingularityError: If ``R + delta I`` has condition number above 1e12.
    """
    grid, A = _grid_steering(r, geometry, grid)
    m = r.size
    if loading is None:
        loading = 1e-6 * np.real(np.trace(r.matrix)) / m
    if loading < 0:
        raise DomainError("diagonal loading must be non-negative")
    Rl = r.matrix + loading * np.eye(m)
    w = np.linalg.eigvalsh(Rl)
    if w[0] <= 0 or w[-1] / w[0] > _MAX_CONDITION:
        raise SingularityError(
            "R + delta*I is numerically singular; increase the diagonal loading"
        )
    RinvA = scipy.linalg.solve(Rl, A, assume_a="her")
    denom = np.real(np.einsum("mk,mk->k", A.conj(), RinvA))
    return SpectrumTrace(grid, 1.0 / denom, "linear", "capon")


def peak_width(trace: SpectrumTrace, angle: float, drop_db: float = 3.0) -> float:
    """Width in degrees of the spectral peak nearest ``angle``.

    The local maximum closest to ``angle`` is located first, then the
    crossings ``drop_db`` below its height are linearly interpolated on
    each side. Returns ``inf`` when a side never drops far enough.
    """
    db = trace.to_db().powers
    ang = trace.angles
    interior = np.flatnonzero((db[1:-1] >= db[:-2]) & (db[1:-1] >= db[2:])) + 1
    if interior.size == 0:
        return np.inf
    i = interior[np.argmin(np.abs(ang[interior] - angle))]
    level = db[i] - drop_db

    def crossing(direction):
        j = i
        while 0 <= j + direction < db.size:
            k = j + direction
            if db[k] < level:
                frac = (db[j] - level) / (db[j] - db[k])
                return ang[j] + frac * (ang[k] - ang[j])
            if db[k] > db[i]:
                return None
            j = k
        return None

    left = crossing(-1)
    right = crossing(+1)
    if left is None or right is None:
        return np.inf
    return float(right - left)


def prominent_peaks(trace: SpectrumTrace, threshold_db: float = 10.0) -> np.ndarray:
    """Angles of local maxima whose topographic prominence is >= ``threshold_db``.

    Prominence is measured on the normalized dB trace: the height of a peak
    above the higher of the two minima separating it from taller terrain.
    """
    db = trace.to_db().powers
    idx, props = scipy.signal.find_peaks(db, prominence=threshold_db)
    return trace.angles[idx]
