import math

import numpy as np
import pytest

from doakit import (
    ArrayGeometry,
    DomainError,
    ScenarioSpec,
    SnapshotMatrix,
    SourceSpec,
    eigendecompose,
    manifold_matrix,
    model_covariance,
    noise_variance,
    sample_covariance,
    simulate,
    source_covariance,
)

from conftest import make_scenario


def test_noiseless_broadside_rows_identical():
    spec = make_scenario(4, [0.0], N=4, snr_db=math.inf)
    X = simulate(spec).samples
    assert X.shape == (4, 4)
    for row in X[1:]:
        np.testing.assert_array_equal(row, X[0])


def test_three_uncorrelated_sources_eigen_gap():
    spec = make_scenario(6, [-30, 0, 30], N=1024, snr_db=20)
    lam = eigendecompose(sample_covariance(simulate(spec))).eigenvalues
    sigma2 = noise_variance(spec)
    assert np.all(lam[:3] > 10 * lam[3])
    np.testing.assert_allclose(lam[3:], sigma2, rtol=0.3)


def test_coherent_group_rank_one():
    spec = make_scenario(6, [-30, 0, 30], group="g", snr_db=math.inf)
    A = manifold_matrix(spec.geometry, spec.thetas)
    Rss = source_covariance(spec)
    np.testing.assert_allclose(Rss, np.ones((3, 3)))
    sv = np.linalg.svd(A @ Rss @ A.conj().T, compute_uv=False)
    assert np.sum(sv > 1e-9 * sv[0]) == 1


@pytest.mark.parametrize(
    "powers, group, expected",
    [
        ([1, 1], None, np.eye(2)),
        ([1, 1], "g", np.ones((2, 2))),
        ([1, 4], None, np.diag([1, 4])),
        ([1, 4], "g", [[1, 2], [2, 4]]),
    ],
)
def test_source_covariance(powers, group, expected):
    spec = make_scenario(4, [-10, 20], powers=powers, group=group)
    np.testing.assert_allclose(source_covariance(spec), expected)


def test_reproducible():
    spec = make_scenario(6, [-30, 0, 30], seed=7)
    a = simulate(spec).samples
    b = simulate(spec).samples
    assert a.tobytes() == b.tobytes()
    assert simulate(spec.with_seed(8)).samples.tobytes() != a.tobytes()


def test_noise_statistics():
    # pure noise: one very weak source so the data are dominated by noise
    N = 100_000
    spec = make_scenario(4, [0.0], N=N, snr_db=0.0, seed=3)
    g = spec.geometry
    X = simulate(spec).samples
    A = manifold_matrix(g, spec.thetas)
    # remove the signal exactly by projecting out the steering vector
    P = np.eye(4) - A @ A.conj().T / 4
    V = P @ X
    sigma2 = noise_variance(spec)
    # projected noise keeps 3/4 of the per-element variance
    per_row = np.mean(np.abs(V) ** 2, axis=1)
    np.testing.assert_allclose(per_row, 0.75 * sigma2, rtol=3 / np.sqrt(N))
    pseudo = np.abs(np.mean(V ** 2))
    assert pseudo < 5 / np.sqrt(4 * N) * sigma2


def test_noise_variance_matches_snr():
    spec = make_scenario(6, [0.0], snr_db=20)
    assert noise_variance(spec) == pytest.approx(0.01)
    assert noise_variance(make_scenario(6, [0.0], snr_db=math.inf)) == 0.0


@pytest.mark.parametrize("N", [1024, 8192])
def test_covariance_consistency(N):
    spec = make_scenario(6, [-30, 0, 30], N=N, snr_db=10, seed=11)
    R = sample_covariance(simulate(spec)).matrix
    Rm = model_covariance(spec)
    assert np.linalg.norm(R - Rm) / np.linalg.norm(Rm) < 5 * 6 / np.sqrt(N)


def test_spec_validation():
    g = ArrayGeometry(4, 0.5)
    with pytest.raises(DomainError):
        SourceSpec(95.0)
    with pytest.raises(DomainError):
        SourceSpec(0.0, power=0.0)
    with pytest.raises(DomainError):
        ScenarioSpec(g, [], 10)
    with pytest.raises(DomainError):
        ScenarioSpec(g, [SourceSpec(0.0)], 0)
    with pytest.raises(DomainError):
        SnapshotMatrix(np.zeros((3, 5)), g)


def test_envelope_and_phase():
    x = SnapshotMatrix(np.array([[3 + 4j, -1j]]))
    np.testing.assert_allclose(x.envelope, [[5, 1]])
    np.testing.assert_allclose(x.phase, [[np.arctan2(4, 3), -np.pi / 2]])
