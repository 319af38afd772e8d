"""Monte-Carlo experiment execution and result files."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..beamformers import SpectrumTrace, capon_spectrum, default_grid, delay_and_sum_spectrum
from ..covariance import (
    eigendecompose,
    forward_backward_average,
    sample_covariance,
    spatial_smoothing,
)
from ..enumeration import aic, mdl, penalty_variant_for
from ..errors import ConfigError, DoaError, EstimationError
from ..signal_sim import simulate
from ..subspace import esprit_tls, find_peaks, music_spectrum, root_music, split_subspaces
from .config import EstimatorConfig, ExperimentConfig

log = logging.getLogger(__name__)

DETECTION_TOLERANCE_DEG = 2.0


def match_estimates(estimates, truths) -> list:
    """Per-truth signed error after minimum-total-error one-to-one matching.

    Truths left without an estimate get ``None``.
    """
    truths = np.asarray(truths, dtype=float)
    est = np.asarray(estimates, dtype=float)
    errors = [None] * truths.size
    if est.size == 0:
        return errors
    cost = np.abs(est[:, None] - truths[None, :])
    rows, cols = linear_sum_assignment(cost)
    for r, c in zip(rows, cols):
        errors[c] = float(est[r] - truths[c])
    return errors


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    snapshot_sha256: str
    estimates: dict
    enumeration: Optional[dict]
    runtimes_ms: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "seed": self.seed,
            "snapshot_sha256": self.snapshot_sha256,
            "enumeration": self.enumeration,
            "estimates": self.estimates,
        }


@dataclass
class SummaryReport:
    config_echo: dict
    per_estimator: dict
    enumeration: dict
    trials: list = field(default_factory=list, repr=False)

    def to_dict(self, include_timing: bool = False) -> dict:
        per = {}
        for label, stats in self.per_estimator.items():
            stats = dict(stats)
            if not include_timing:
                stats["mean_runtime_ms"] = None
            per[label] = stats
        return {
            "config_echo": self.config_echo,
            "per_estimator": per,
            "enumeration": self.enumeration,
        }


def _enumerate(method, eig, num_snapshots, variant="standard"):
    fn = aic if method == "aic" else mdl
    return fn(eig.eigenvalues, num_snapshots, variant)


def _estimator_covariance(est: EstimatorConfig, X, R):
    sm = est.smoothing
    if sm.kind == "none":
        return R
    if sm.kind == "forward_backward":
        return forward_backward_average(R)
    return spatial_smoothing(X, sm.subarray_len, forward_backward=sm.backward)


def _run_estimator(est: EstimatorConfig, config: ExperimentConfig, X, R, eig, trial_d):
    """Returns (outcome dict, spectrum trace or None)."""
    geometry = config.scenario.geometry
    cov = _estimator_covariance(est, X, R)
    if cov.size != geometry.num_elements:
        geometry = geometry.subarray(cov.size)
    e = eig if cov is R else eigendecompose(cov)
    enum = None
    if config.enumeration == "fixed":
        d = config.fixed_sources
    elif cov is R:
        d = trial_d
    else:
        enum = _enumerate(config.enumeration, e, X.num_snapshots, penalty_variant_for(cov.smoothing))
        d = enum.num_sources
    outcome = {"label": est.label, "kind": est.kind, "num_sources": int(d),
               "angles_deg": [], "auxiliary": {}, "error": None}
    if enum is not None:
        outcome["enumeration"] = enum.to_dict()
    trace = None
    try:
        if d < 1:
            raise EstimationError("no sources detected")
        if d >= cov.size:
            raise EstimationError(f"{d} sources cannot be resolved with {cov.size} elements")
        grid = default_grid(est.grid_step)
        if est.kind == "delay_sum":
            trace = delay_and_sum_spectrum(cov, geometry, grid)
        elif est.kind == "capon":
            trace = capon_spectrum(cov, geometry, grid, est.loading)
        elif est.kind == "music":
            trace = music_spectrum(split_subspaces(e, d), geometry, grid)
        if trace is not None:
            result = find_peaks(trace, d)
        elif est.kind == "root_music":
            result = root_music(split_subspaces(e, d), geometry)
        else:
            result = esprit_tls(e, geometry, d, est.subarray)
        outcome["angles_deg"] = list(result.angles_deg)
        outcome["auxiliary"] = result.to_dict()["auxiliary"]
    except DoaError as exc:
        found = getattr(exc, "found", None)
        if found is not None:
            outcome["angles_deg"] = list(found.angles_deg)
            outcome["auxiliary"] = found.to_dict()["auxiliary"]
        outcome["error"] = f"{type(exc).__name__}: {exc}"
    return outcome, trace


def run_trial(config: ExperimentConfig, trial_index: int, keep_traces: bool = False):
    """Runs every configured estimator on one simulated snapshot batch.

    Returns:
        ``(TrialRecord, traces)`` where ``traces`` maps estimator label to
        :class:`SpectrumTrace` when ``keep_traces`` is set.
    """
    seed = config.base_seed + trial_index
    scenario = config.scenario.with_seed(seed)
    truths = scenario.thetas
    X = simulate(scenario)
    digest = hashlib.sha256(X.samples.tobytes()).hexdigest()
    log.debug("trial %d seed %d snapshots sha256 %s", trial_index, seed, digest)
    R = sample_covariance(X)
    eig = eigendecompose(R)

    enum_dict = None
    trial_d = config.fixed_sources
    if config.enumeration != "fixed":
        enum = _enumerate(config.enumeration, eig, X.num_snapshots)
        trial_d = enum.num_sources
        enum_dict = enum.to_dict()

    estimates = {}
    runtimes = {}
    traces = {}
    for est in config.estimators:
        t0 = time.perf_counter()
        outcome, trace = _run_estimator(est, config, X, R, eig, trial_d)
        runtimes[est.label] = 1e3 * (time.perf_counter() - t0)
        errors = match_estimates(outcome["angles_deg"], truths)
        outcome["errors_deg"] = errors
        outcome["detected"] = bool(
            outcome["error"] is None
            and outcome["num_sources"] == truths.size
            and len(outcome["angles_deg"]) == truths.size
            and all(e is not None and abs(e) < DETECTION_TOLERANCE_DEG for e in errors)
        )
        estimates[est.label] = outcome
        if keep_traces and trace is not None:
            traces[est.label] = trace
    record = TrialRecord(trial_index, seed, digest, estimates, enum_dict, runtimes)
    return record, traces


def _summarize(config: ExperimentConfig, records) -> SummaryReport:
    truths = config.scenario.thetas
    per = {}
    for est in config.estimators:
        outs = [r.estimates[est.label] for r in records]
        rmse = []
        for k in range(truths.size):
            errs = [o["errors_deg"][k] for o in outs if o["errors_deg"][k] is not None]
            rmse.append(float(math.sqrt(np.mean(np.square(errs)))) if errs else None)
        per[est.label] = {
            "rmse_deg": rmse,
            "detection_rate": float(np.mean([o["detected"] for o in outs])),
            "failure_rate": float(np.mean([o["error"] is not None for o in outs])),
            "mean_runtime_ms": float(np.mean([r.runtimes_ms[est.label] for r in records])),
        }
    if config.enumeration == "fixed":
        enum = {"method": "fixed", "correct_rate": float(config.fixed_sources == truths.size)}
    else:
        correct = [r.enumeration["num_sources"] == truths.size for r in records]
        enum = {"method": config.enumeration, "correct_rate": float(np.mean(correct))}
    return SummaryReport(config.to_dict(), per, enum, list(records))


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_spectrum_csv(path: Path, trace: SpectrumTrace):
    """Writes ``angle_deg,power_linear,power_db`` rows with 9 significant digits."""
    lin = trace.powers
    db = trace.to_db().powers
    rows = ["angle_deg,power_linear,power_db"]
    rows += [f"{a:.9g},{p:.9g},{q:.9g}" for a, p, q in zip(trace.angles, lin, db)]
    _write(path, "\n".join(rows) + "\n")


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def run_experiment(config: ExperimentConfig, write: bool = True) -> SummaryReport:
    """Runs ``config.trials`` trials and writes the result files.

    Files written to ``config.output_dir``: ``summary.json``,
    ``trials.jsonl`` and, from the first trial, ``spectrum_<label>.csv`` for
    each spectrum-based estimator.
    """
    records = []
    first_traces = {}
    for t in range(config.trials):
        record, traces = run_trial(config, t, keep_traces=(t == 0))
        if t == 0:
            first_traces = traces
        records.append(record)
    report = _summarize(config, records)
    if write:
        out = Path(config.output_dir)
        _write(out / "summary.json", _dump_json(report.to_dict(config.record_timing)))
        _write(
            out / "trials.jsonl",
            "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records),
        )
        for label, trace in first_traces.items():
            write_spectrum_csv(out / f"spectrum_{label}.csv", trace)
    return report


def spectrum_traces(config: ExperimentConfig, write: bool = True) -> dict:
    """First-trial spectra of every spectrum-based estimator."""
    _, traces = run_trial(config, 0, keep_traces=True)
    if write:
        for label, trace in traces.items():
            write_spectrum_csv(Path(config.output_dir) / f"spectrum_{label}.csv", trace)
    return traces


@dataclass
class ComparisonTable:
    rows: list
    summary: SummaryReport

    def format(self) -> str:
        lines = [f"{'estimator':<16}{'rmse_deg (per source)':<36}{'mean_rmse':>10}{'detect':>8}"]
        for row in self.rows:
            per = " ".join("-" if v is None else f"{v:.3f}" for v in row["rmse_deg"])
            mean = "-" if row["mean_rmse_deg"] is None else f"{row['mean_rmse_deg']:.3f}"
            lines.append(f"{row['estimator']:<16}{per:<36}{mean:>10}{row['detection_rate']:>8.2f}")
        return "\n".join(lines)


def compare_estimators(config: ExperimentConfig, write: bool = True) -> ComparisonTable:
    """Runs all estimators on shared snapshots and tabulates RMSE and detection.

    ``mean_rmse_deg`` pools the squared errors of every source.
    """
    if len(config.estimators) < 2:
        raise ConfigError("compare needs at least two estimators", "run.estimators")
    report = run_experiment(config, write=write)
    rows = []
    for est in config.estimators:
        stats = report.per_estimator[est.label]
        errs = [
            e for r in report.trials for e in r.estimates[est.label]["errors_deg"] if e is not None
        ]
        rows.append({
            "estimator": est.label,
            "rmse_deg": stats["rmse_deg"],
            "mean_rmse_deg": float(math.sqrt(np.mean(np.square(errs)))) if errs else None,
            "detection_rate": stats["detection_rate"],
        })
    table = ComparisonTable(rows, report)
    if write:
        _write(Path(config.output_dir) / "comparison.json", _dump_json(rows))
    return table
