"""Uniform linear array geometry and steering vectors.

Angles are in degrees from broadside. Element ``m`` (0-indexed) of the
steering vector is ``exp(-1j * m * phi)`` with
``phi = 2 * pi * (d / lambda) * sin(theta)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array.

    Args:
        num_elements: Number of sensors M (at least 2).
        spacing_wavelengths: Inter-element spacing in carrier wavelengths.
    """

    num_elements: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise DomainError(f"num_elements must be an integer >= 2, got {self.num_elements!r}")
        if not np.isfinite(self.spacing_wavelengths) or self.spacing_wavelengths <= 0:
            raise DomainError(
                f"spacing_wavelengths must be positive, got {self.spacing_wavelengths!r}"
            )
        object.__setattr__(self, "num_elements", int(self.num_elements))
        object.__setattr__(self, "spacing_wavelengths", float(self.spacing_wavelengths))

    @property
    def size(self) -> int:
        return self.num_elements

    def subarray(self, length: int) -> ArrayGeometry:
        """Returns the geometry of a contiguous length-``length`` subarray."""
        return ArrayGeometry(length, self.spacing_wavelengths)


def _check_angles(theta):
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > 90.0):
        raise DomainError("angles must lie in [-90, 90] degrees")
    return theta


def phase_shift(geometry: ArrayGeometry, theta):
    """Inter-element phase shift in radians for arrival angle ``theta``.

    Accepts a scalar or an array of angles (degrees).
    """
    theta = _check_angles(theta)
    phi = 2.0 * np.pi * geometry.spacing_wavelengths * np.sin(np.deg2rad(theta))
    return float(phi) if phi.ndim == 0 else phi


def steering_vector(geometry: ArrayGeometry, theta) -> np.ndarray:
    """Length-M steering vector; the first entry is exactly 1."""
    phi = phase_shift(geometry, theta)
    if np.ndim(phi) != 0:
        raise DomainError("steering_vector takes a single angle; use manifold_matrix")
    m = np.arange(geometry.num_elements)
    return np.exp(-1j * m * phi)


def manifold_matrix(geometry: ArrayGeometry, thetas) -> np.ndarray:
    """M x D matrix whose columns are steering vectors for ``thetas``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if thetas.ndim != 1 or thetas.size == 0:
        raise DomainError("at least one angle is required")
    if thetas.size >= geometry.num_elements:
        warnings.warn(
            f"{thetas.size} directions for a {geometry.num_elements}-element array; "
            "subspace methods need fewer sources than elements",
            stacklevel=2,
        )
    return steering_matrix(geometry, thetas)


def steering_matrix(geometry: ArrayGeometry, grid) -> np.ndarray:
    """Steering vectors for every angle of a search grid, stacked as columns.

    Same as :func:`manifold_matrix` without the source-count warning.
    """
    phi = np.atleast_1d(phase_shift(geometry, np.atleast_1d(grid)))
    m = np.arange(geometry.num_elements)[:, None]
    return np.exp(-1j * m * phi[None, :])
