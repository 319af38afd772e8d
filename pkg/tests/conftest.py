import warnings

import numpy as np
import pytest

from doakit import ArrayGeometry, ScenarioSpec, SourceSpec


def make_scenario(M, thetas, N=1024, snr_db=20.0, seed=0, d=0.5, group=None, powers=None):
    powers = powers or [1.0] * len(thetas)
    sources = [SourceSpec(t, p, group) for t, p in zip(thetas, powers)]
    return ScenarioSpec(ArrayGeometry(M, d), sources, N, snr_db, seed)


def analytic_covariance(geometry, thetas, Rss, sigma2=0.0):
    """A Rss A^H + sigma2 I built from explicit exponentials (no library steering code)."""
    m = np.arange(geometry.num_elements)[:, None]
    phi = 2 * np.pi * geometry.spacing_wavelengths * np.sin(np.radians(thetas))
    A = np.exp(-1j * m * phi[None, :])
    return A, A @ Rss @ A.conj().T + sigma2 * np.eye(geometry.num_elements)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _quiet_rank_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*subspace methods need fewer sources.*")
        yield
