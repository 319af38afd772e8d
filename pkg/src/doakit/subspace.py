"""Subspace estimators: MUSIC, Root-MUSIC and TLS-ESPRIT.

All estimators take the number of sources as an argument; see
:mod:`doakit.enumeration` for estimating it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.signal

from .array_model import ArrayGeometry, manifold_matrix, steering_matrix
from .beamformers import SpectrumTrace, default_grid
from .covariance import EigenSystem, HermitianCovariance
from .errors import DegenerateGeometryError, DomainError, EstimationError, UnderresolvedError

_MAX_CONDITION = 1e12
_ROOT_PAIR_TOL = 1e-6


@dataclass(frozen=True)
class SubspaceSplit:
    signal_basis: np.ndarray
    noise_basis: np.ndarray
    assumed_sources: int

    @property
    def size(self) -> int:
        return self.signal_basis.shape[0]


@dataclass(frozen=True)
class DoaEstimates:
    """Angle estimates in degrees, sorted ascending.

    ``auxiliary`` maps a metadata name to one value per estimate, in the
    same order as ``angles_deg``.
    """

    angles_deg: tuple
    estimator: str
    auxiliary: dict = field(default_factory=dict)

    def __post_init__(self):
        angles = np.asarray(self.angles_deg, dtype=float)
        order = np.argsort(angles, kind="stable")
        object.__setattr__(self, "angles_deg", tuple(float(a) for a in angles[order]))
        aux = {k: [v[i] for i in order] for k, v in self.auxiliary.items()}
        object.__setattr__(self, "auxiliary", aux)

    def __len__(self):
        return len(self.angles_deg)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "angles_deg": list(self.angles_deg),
            "auxiliary": {k: [float(x) for x in v] for k, v in self.auxiliary.items()},
        }


def split_subspaces(eig: EigenSystem, num_sources: int) -> SubspaceSplit:
    """Signal basis = first ``num_sources`` eigenvectors, noise basis = the rest."""
    m = eig.size
    if int(num_sources) != num_sources or not 0 < num_sources < m:
        raise DomainError(f"number of sources must be in [1, {m - 1}], got {num_sources!r}")
    d = int(num_sources)
    Q = eig.eigenvectors
    return SubspaceSplit(Q[:, :d], Q[:, d:], d)


def music_spectrum(split: SubspaceSplit, geometry: ArrayGeometry, grid=None) -> SpectrumTrace:
    """MUSIC pseudospectrum ``1 / (a^H En En^H a)``.

    The denominator is floored at ``1e-12 * M`` so exact orthogonality
    yields a finite peak.
    """
    m = geometry.num_elements
    if split.size != m:
        raise DomainError(f"subspace dimension {split.size} does not match {m} elements")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    A = steering_matrix(geometry, grid)
    proj = split.noise_basis.conj().T @ A
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    return SpectrumTrace(grid, 1.0 / np.maximum(1e-12 * m, denom), "linear", "music")


def find_peaks(trace: SpectrumTrace, num_peaks: int) -> DoaEstimates:
    """Angles of the ``num_peaks`` highest local maxima of ``trace``.

    A local maximum is strictly higher than both neighbours; flat tops
    resolve to their midpoint. Each non-flat peak is refined with a
    three-point parabola fitted to the dB values.

    Raises:
        UnderresolvedError: Fewer than ``num_peaks`` maxima exist. The maxima
            that were found are attached as ``found``.
    """
    if int(num_peaks) != num_peaks or num_peaks < 1:
        raise DomainError("num_peaks must be a positive integer")
    num_peaks = int(num_peaks)
    db = trace.to_db().powers
    idx, props = scipy.signal.find_peaks(db, plateau_size=1)
    flat = props["plateau_sizes"] > 1
    heights = db[idx]
    rank = np.argsort(-heights, kind="stable")[:num_peaks]
    step = np.diff(trace.angles)
    angles = []
    for i, is_flat in zip(idx[rank], flat[rank]):
        a = trace.angles[i]
        if not is_flat:
            y0, y1, y2 = db[i - 1], db[i], db[i + 1]
            curv = y0 - 2.0 * y1 + y2
            if curv < 0:
                offset = 0.5 * (y0 - y2) / curv
                a = a + offset * (step[i] if offset > 0 else step[i - 1])
        angles.append(float(np.clip(a, -90.0, 90.0)))
    result = DoaEstimates(
        tuple(angles), trace.estimator_name, {"peak_height_db": list(heights[rank])}
    )
    if len(angles) < num_peaks:
        raise UnderresolvedError(
            f"found {len(angles)} spectral peaks, {num_peaks} requested", found=result
        )
    return result


def _noise_projector_coefficients(noise_basis):
    C = noise_basis @ noise_basis.conj().T
    m = C.shape[0]
    # c_k = sum of k-th diagonal (column index minus row index = k)
    return np.array([np.trace(C, offset=k) for k in range(-(m - 1), m)])


def root_music_roots(split: SubspaceSplit) -> np.ndarray:
    """All 2(M-1) roots of the Root-MUSIC polynomial."""
    coeffs = _noise_projector_coefficients(split.noise_basis)
    # np.roots wants the highest power first
    return np.roots(coeffs[::-1])


def _select_roots(roots, d):
    mags = np.abs(roots)
    cand = roots[mags <= 1.0 + _ROOT_PAIR_TOL]
    cand = cand[np.argsort(np.abs(np.abs(cand) - 1.0), kind="stable")]
    chosen = []
    for z in cand:
        twin = any(abs(z - 1.0 / np.conj(c)) <= _ROOT_PAIR_TOL for c in chosen)
        if not twin:
            chosen.append(z)
        if len(chosen) == d:
            break
    return np.array(chosen)


def root_music(split: SubspaceSplit, geometry: ArrayGeometry) -> DoaEstimates:
    """Search-free MUSIC for a uniform linear array.

    The roots of ``sum_k c_k z^k`` (``c_k`` the k-th diagonal sum of the
    noise projector) lying inside or on the unit circle are ranked by their
    distance to the circle; the closest ``D`` give the angles.
    """
    if split.size != geometry.num_elements:
        raise DomainError("subspace dimension does not match the array")
    d = split.assumed_sources
    try:
        roots = root_music_roots(split)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(f"polynomial rooting failed: {exc}") from exc
    if not np.all(np.isfinite(roots)):
        raise EstimationError("polynomial rooting returned non-finite roots")
    chosen = _select_roots(roots, d)
    if chosen.size < d:
        raise EstimationError(f"only {chosen.size} roots inside the unit circle, {d} needed")
    s = -np.angle(chosen) / (2.0 * np.pi * geometry.spacing_wavelengths)
    if np.any(np.abs(s) > 1.0):
        raise EstimationError("root phase outside the visible region; check array spacing")
    return DoaEstimates(
        tuple(np.rad2deg(np.arcsin(s))), "root_music", {"root_modulus": list(np.abs(chosen))}
    )


def _esprit_rows(m, subarray):
    if subarray == "max_overlap":
        return slice(0, m - 1), slice(1, m), 1
    if subarray == "split_halves":
        if m % 2:
            raise DomainError("split_halves needs an even number of elements")
        h = m // 2
        return slice(0, h), slice(h, m), h
    raise DomainError(f"unknown subarray mode {subarray!r}")


def esprit_tls(
    eig: EigenSystem, geometry: ArrayGeometry, num_sources: int, subarray: str = "max_overlap"
) -> DoaEstimates:
    """TLS-ESPRIT angle estimates.

    Args:
        eig: Eigendecomposition of the array covariance.
        geometry: Array that produced the covariance.
        num_sources: Number of sources D < M.
        subarray: ``"max_overlap"`` pairs rows 1..M-1 with 2..M (shift d);
            ``"split_halves"`` pairs the first and second half of the array
            (shift M/2 * d).

    When the subarray shift exceeds half a wavelength the rotation phase is
    ambiguous. Each candidate is then resolved against a coarse estimate read
    from adjacent elements of the recovered steering vector.
    """
    m = geometry.num_elements
    if eig.size != m:
        raise DomainError("eigensystem dimension does not match the array")
    if int(num_sources) != num_sources or not 0 < num_sources < m:
        raise DomainError(f"number of sources must be in [1, {m - 1}], got {num_sources!r}")
    d = int(num_sources)
    first, second, shift = _esprit_rows(m, subarray)
    Vs = eig.eigenvectors[:, :d]
    V01 = np.hstack([Vs[first], Vs[second]])
    w, E = np.linalg.eigh(V01.conj().T @ V01)
    E = E[:, np.argsort(-w, kind="stable")]
    V12 = E[:d, d:]
    V22 = E[d:, d:]
    if np.linalg.cond(V22) > _MAX_CONDITION:
        raise DegenerateGeometryError("V22 block is singular; subarrays do not span the signal subspace")
    psi = -V12 @ np.linalg.inv(V22)
    phis, T = np.linalg.eig(psi)
    baseline = shift * geometry.spacing_wavelengths
    s = -np.angle(phis) / (2.0 * np.pi * baseline)
    if baseline > 0.5:
        s = _resolve_aliases(s, baseline, Vs @ T, geometry.spacing_wavelengths)
    if np.any(np.abs(s) > 1.0 + 1e-12):
        raise EstimationError("rotation phase outside the visible region")
    s = np.clip(s, -1.0, 1.0)
    return DoaEstimates(
        tuple(np.rad2deg(np.arcsin(s))),
        "esprit",
        {"eigenvalue_arg_rad": list(np.angle(phis)), "eigenvalue_modulus": list(np.abs(phis))},
    )


def _resolve_aliases(s_fine, baseline, steering_est, spacing):
    # columns of Vs @ T are the array responses of the sources up to scale
    lag1 = np.sum(steering_est[1:] * steering_est[:-1].conj(), axis=0)
    s_coarse = -np.angle(lag1) / (2.0 * np.pi * spacing)
    out = np.empty_like(s_fine)
    period = 1.0 / baseline
    for k, (sf, sc) in enumerate(zip(s_fine, s_coarse)):
        n = np.arange(-np.ceil(baseline) - 1, np.ceil(baseline) + 2)
        cands = sf + n * period
        cands = cands[np.abs(cands) <= 1.0]
        out[k] = cands[np.argmin(np.abs(cands - sc))] if cands.size else sf
    return out


def recover_signal_covariance(
    r: HermitianCovariance,
    estimates: DoaEstimates | Sequence[float],
    geometry: ArrayGeometry,
    eig: EigenSystem,
) -> np.ndarray:
    """Source covariance from estimated angles.

    Evaluates ``(A^H A)^-1 A^H (R - lambda_min I) A (A^H A)^-1`` with
    ``lambda_min`` the smallest eigenvalue in ``eig``.
    """
    angles = estimates.angles_deg if isinstance(estimates, DoaEstimates) else estimates
    A = manifold_matrix(geometry, np.asarray(angles, dtype=float))
    G = A.conj().T @ A
    if np.linalg.cond(G) > _MAX_CONDITION:
        raise DegenerateGeometryError("estimated angles are (nearly) coincident")
    P = np.linalg.solve(G, A.conj().T)
    lam_min = eig.eigenvalues[-1]
    Rss = P @ (r.matrix - lam_min * np.eye(r.size)) @ P.conj().T
    return 0.5 * (Rss + Rss.conj().T)
