"""Exit criteria for the toolkit, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible without -s).
"""

import dataclasses
import json
import time

import numpy as np
import pytest

from doakit import (
    ArrayGeometry,
    HermitianCovariance,
    UnderresolvedError,
    aic,
    capon_spectrum,
    default_grid,
    delay_and_sum_spectrum,
    eigendecompose,
    esprit_tls,
    find_peaks,
    manifold_matrix,
    mdl,
    music_spectrum,
    peak_width,
    prominent_peaks,
    recover_signal_covariance,
    root_music,
    root_music_roots,
    sample_covariance,
    simulate,
    source_covariance,
    spatial_smoothing,
    split_subspaces,
    steering_vector,
)
from doakit.harness import load_config, run_experiment
from doakit.harness.cli import main

from conftest import analytic_covariance, make_scenario
from test_enumeration import oracle_criterion

SEEDS = range(100)


@pytest.fixture
def verdict(capsys):
    def _report(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return _report


def _eig(spec):
    X = simulate(spec)
    R = sample_covariance(X)
    return X, R, eigendecompose(R)


def test_ac1_music_uncorrelated(verdict):
    cfg = load_config("scenario-6.1").with_overrides(trials=100)
    cfg = dataclasses.replace(cfg, estimators=cfg.estimators[:1])
    t0 = time.perf_counter()
    report = run_experiment(cfg, write=False)
    elapsed = time.perf_counter() - t0
    hits = [
        r.estimates["music"]["error"] is None
        and len(r.estimates["music"]["angles_deg"]) == 3
        and all(e is not None and abs(e) <= 1.0 for e in r.estimates["music"]["errors_deg"])
        for r in report.trials
    ]
    rate = float(np.mean(hits))
    ok = rate >= 0.95 and elapsed < 60.0
    verdict("AC1 scenario 6.1 MUSIC", ok, f"3 peaks within 1 deg in {rate:.0%} of 100 trials, {elapsed:.1f} s")


def test_ac2_music_coherent(verdict):
    spec0 = make_scenario(6, [-30, 0, 30], group="c")
    A = manifold_matrix(spec0.geometry, spec0.thetas)
    sig = A @ source_covariance(spec0) @ A.conj().T
    lam = np.linalg.eigvalsh(sig)[::-1]
    rank = int(np.sum(lam > 1e-8 * lam[0]))

    few_peaks = 0
    recovered = 0
    for seed in SEEDS:
        spec = spec0.with_seed(seed)
        X, _, e = _eig(spec)
        tr = music_spectrum(split_subspaces(e, 3), spec.geometry)
        few_peaks += prominent_peaks(tr, 10.0).size < 3
        Rs = spatial_smoothing(X, 4, forward_backward=True)
        es = eigendecompose(Rs)
        try:
            est = find_peaks(music_spectrum(split_subspaces(es, 3), spec.geometry.subarray(4)), 3)
        except UnderresolvedError as exc:
            est = exc.found
        found = np.array(est.angles_deg)
        hits = sum(found.size > 0 and np.min(np.abs(found - t)) < 2.0 for t in spec.thetas)
        recovered += hits >= 2
    ok = rank == 1 and few_peaks >= 80 and recovered >= 80
    verdict(
        "AC2 scenario 6.2 coherent MUSIC", ok,
        f"signal rank {rank}; <3 prominent peaks unsmoothed in {few_peaks}/100; "
        f">=2 sources after FB+spatial(L=4) in {recovered}/100",
    )


def test_ac3_root_music(verdict):
    truth = np.array([-15.5, -12.0, 60.5])
    good = 0
    for seed in SEEDS:
        spec = make_scenario(10, truth, N=1024, snr_db=10, seed=seed)
        _, _, e = _eig(spec)
        est = np.array(root_music(split_subspaces(e, 3), spec.geometry).angles_deg)
        good += np.all(np.abs(est - truth) <= 0.5)
    verdict("AC3 scenario 6.3 Root-MUSIC", good >= 90, f"all within 0.5 deg in {good}/100 trials")


def test_ac4_esprit(verdict):
    truth = np.array([-3.0, 3.0, 61.0])
    details = []
    ok = True
    spec = make_scenario(6, truth, N=1000, snr_db=12, seed=0)
    _, _, e = _eig(spec)
    enum = {"aic": aic(e.eigenvalues, 1000).num_sources, "mdl": mdl(e.eigenvalues, 1000).num_sources}
    ok &= 3 in enum.values()
    for mode in ("max_overlap", "split_halves"):
        single = np.array(esprit_tls(e, spec.geometry, 3, mode).angles_deg)
        errs = []
        for seed in SEEDS:
            s = spec.with_seed(seed)
            _, _, es = _eig(s)
            errs.append(np.array(esprit_tls(es, s.geometry, 3, mode).angles_deg) - truth)
        rmse = np.sqrt(np.mean(np.square(errs), axis=0))
        ok &= bool(np.all(np.abs(single - truth) <= 0.5) and np.all(rmse < 0.3))
        details.append(
            f"{mode}: single {np.round(single, 2).tolist()}, RMSE {np.round(rmse, 3).tolist()}"
        )
    details.append(f"enumeration {enum}")
    verdict("AC4 scenario 6.4 TLS-ESPRIT", ok, "; ".join(details))


def test_ac5_eigen_shift(verdict, rng):
    g = ArrayGeometry(6, 0.5)
    thetas = np.sort(rng.uniform(-60, 60, 3))
    while np.min(np.diff(thetas)) < 10:
        thetas = np.sort(rng.uniform(-60, 60, 3))
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Rss = B @ B.conj().T + 0.5 * np.eye(3)
    sigma2 = 0.1
    A, R = analytic_covariance(g, thetas, Rss, sigma2)
    e = eigendecompose(HermitianCovariance(R))
    n_noise = int(np.sum(np.abs(e.eigenvalues - sigma2) <= 1e-8))
    ortho = np.linalg.norm(A.conj().T @ split_subspaces(e, 3).noise_basis)
    ok = n_noise == 3 and ortho <= 1e-8
    verdict("AC5 eigenvalue shift", ok, f"{n_noise} noise eigenvalues at sigma^2, ||A^H Vn|| = {ortho:.1e}")


def test_ac6_signal_covariance_round_trip(verdict, rng):
    g = ArrayGeometry(6, 0.5)
    thetas = np.array([-35.0, 5.0, 40.0])
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Rss = B @ B.conj().T
    _, R = analytic_covariance(g, thetas, Rss, 0.3)
    Rc = HermitianCovariance(R)
    got = recover_signal_covariance(Rc, thetas, g, eigendecompose(Rc))
    rel = np.linalg.norm(got - Rss) / np.linalg.norm(Rss)
    verdict("AC6 signal covariance recovery", rel <= 1e-6, f"relative Frobenius error {rel:.1e}")


def test_ac7_enumeration(verdict, rng):
    eigs = [10, 10, 10, 0.01, 0.01, 0.01]
    oracle = {m: int(np.argmin(oracle_criterion(eigs, 1024, m))) for m in ("aic", "mdl")}
    got = {"aic": aic(eigs, 1024).num_sources, "mdl": mdl(eigs, 1024).num_sources}
    flat = (aic([2.0] * 4, 100).num_sources, mdl([2.0] * 4, 100).num_sources)
    violations = 0
    for _ in range(500):
        M = int(rng.integers(2, 12))
        lam = np.sort(np.exp(rng.uniform(-5, 5, M)))[::-1]
        N = int(rng.integers(10, 100_000))
        violations += mdl(lam, N).num_sources > aic(lam, N).num_sources
    ok = got == oracle == {"aic": 3, "mdl": 3} and flat == (0, 0) and violations == 0
    verdict(
        "AC7 enumeration", ok,
        f"separated -> {got} (oracle {oracle}); all-equal -> {flat}; MDL>AIC in {violations}/500",
    )


def test_ac8_estimator_ordering(verdict):
    truth = np.array([-30.0, 0.0, 30.0])
    grid = default_grid()
    errs = {"music": [], "capon": [], "delay_sum": []}
    widths = {"music": [], "capon": []}
    for seed in range(50):
        spec = make_scenario(6, truth, seed=seed)
        g = spec.geometry
        _, R, e = _eig(spec)
        traces = {
            "music": music_spectrum(split_subspaces(e, 3), g, grid),
            "capon": capon_spectrum(R, g, grid),
            "delay_sum": delay_and_sum_spectrum(R, g, grid),
        }
        for name, tr in traces.items():
            errs[name].append(np.array(find_peaks(tr, 3).angles_deg) - truth)
        for name in widths:
            widths[name].append([peak_width(traces[name], t) for t in truth])
    rmse = {k: float(np.sqrt(np.mean(np.square(v)))) for k, v in errs.items()}
    med = {k: np.median(v, axis=0) for k, v in widths.items()}
    ok = rmse["music"] <= rmse["capon"] <= rmse["delay_sum"] and bool(np.all(med["music"] < med["capon"]))
    verdict(
        "AC8 estimator ordering", ok,
        "RMSE " + ", ".join(f"{k} {v:.4f}" for k, v in rmse.items())
        + f"; median -3 dB width music {np.round(med['music'], 2).tolist()} < capon {np.round(med['capon'], 2).tolist()}",
    )


def test_ac9_structural_invariants(verdict, rng):
    worst_norm = 0.0
    for M in (2, 6, 10, 33):
        g = ArrayGeometry(M, 0.5)
        for t in np.linspace(-90, 90, 721):
            a = steering_vector(g, t)
            worst_norm = max(worst_norm, abs(np.vdot(a, a).real - M) / M)
    spec = make_scenario(10, [-15.5, -12, 60.5], snr_db=10, seed=3)
    _, R, e = _eig(spec)
    roots = root_music_roots(split_subspaces(e, 3))
    pairing = max(np.min(np.abs(roots - 1 / np.conj(z))) for z in roots)
    g6 = ArrayGeometry(6, 0.5)
    _, Rn = analytic_covariance(g6, np.array([-20.0, 45.0]), np.eye(2))
    est = esprit_tls(eigendecompose(HermitianCovariance(Rn)), g6, 2)
    modulus = float(np.max(np.abs(np.array(est.auxiliary["eigenvalue_modulus"]) - 1)))
    resid = 0.0
    for _ in range(20):
        B = rng.standard_normal((8, 9)) + 1j * rng.standard_normal((8, 9))
        Rr = HermitianCovariance(B @ B.conj().T)
        er = eigendecompose(Rr)
        r = np.linalg.norm(Rr.matrix @ er.eigenvectors - er.eigenvectors * er.eigenvalues, axis=0)
        resid = max(resid, r.max() / np.linalg.norm(Rr.matrix, 2))
    ok = worst_norm <= 1e-14 and pairing <= 1e-6 and modulus <= 1e-8 and resid <= 1e-9
    verdict(
        "AC9 structural invariants", ok,
        f"|‖a‖²-M|/M {worst_norm:.1e}; root pairing {pairing:.1e}; |Phi|-1 {modulus:.1e}; eig residual {resid:.1e}",
    )


def test_ac10_determinism(verdict, tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code = main(["run", "scenario-6.1", "--seed", "42", "--out", str(tmp_path / name)])
        assert code == 0
        outs.append({f: (tmp_path / name / f).read_bytes() for f in ("summary.json", "trials.jsonl")})
    capsys.readouterr()
    same = outs[0] == outs[1]
    json.loads(outs[0]["summary.json"])
    verdict("AC10 determinism", same, "summary.json and trials.jsonl byte-identical across runs" if same else "outputs differ")
