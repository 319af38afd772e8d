"""Experiment configuration files.

Configurations are TOML documents restricted to a flat layout: a
``[scenario]`` section, a ``[run]`` section and one optional options
section per estimator label. The full grammar is documented in the
README. Unknown sections and keys are rejected.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..array_model import ArrayGeometry
from ..beamformers import DEFAULT_GRID_STEP
from ..covariance import Smoothing
from ..errors import ConfigError, DoaError
from ..signal_sim import ScenarioSpec, SourceSpec

ESTIMATOR_KINDS = ("delay_sum", "capon", "music", "root_music", "esprit")
SPECTRUM_KINDS = ("delay_sum", "capon", "music")
ENUMERATION_METHODS = ("aic", "mdl", "fixed")
PRESET_DIR = Path(__file__).parent / "presets"

_SCENARIO_KEYS = {
    "num_elements", "spacing_wavelengths", "num_snapshots", "snr_db",
    "angles_deg", "powers", "correlation_groups",
}
_RUN_KEYS = {
    "estimators", "enumeration", "num_sources", "trials", "base_seed",
    "output_dir", "record_timing",
}
_ESTIMATOR_KEYS = {"kind", "grid_step", "smoothing", "subarray_len", "loading", "subarray"}


@dataclass(frozen=True)
class EstimatorConfig:
    label: str
    kind: str
    grid_step: float = DEFAULT_GRID_STEP
    smoothing: Smoothing = Smoothing()
    loading: Optional[float] = None
    subarray: str = "max_overlap"

    @property
    def is_spectral(self) -> bool:
        return self.kind in SPECTRUM_KINDS

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "smoothing": self.smoothing.kind}
        if self.smoothing.subarray_len is not None:
            out["subarray_len"] = self.smoothing.subarray_len
        if self.is_spectral:
            out["grid_step"] = self.grid_step
        if self.kind == "capon":
            out["loading"] = self.loading
        if self.kind == "esprit":
            out["subarray"] = self.subarray
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSpec
    estimators: tuple
    enumeration: str = "mdl"
    fixed_sources: Optional[int] = None
    trials: int = 1
    base_seed: int = 0
    output_dir: Path = field(default=Path("out"))
    record_timing: bool = False

    def __post_init__(self):
        if not self.estimators:
            raise ConfigError("at least one estimator is required", "run.estimators")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", "run.trials")

    def with_overrides(self, trials=None, base_seed=None, output_dir=None) -> ExperimentConfig:
        from dataclasses import replace

        changes = {}
        if trials is not None:
            changes["trials"] = int(trials)
        if base_seed is not None:
            changes["base_seed"] = int(base_seed)
            changes["scenario"] = self.scenario.with_seed(int(base_seed))
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Normalized echo of the configuration (output location excluded)."""
        sc = self.scenario
        return {
            "scenario": {
                "num_elements": sc.geometry.num_elements,
                "spacing_wavelengths": sc.geometry.spacing_wavelengths,
                "num_snapshots": sc.num_snapshots,
                "snr_db": sc.snr_db if math.isfinite(sc.snr_db) else "inf",
                "angles_deg": [s.theta for s in sc.sources],
                "powers": [s.power for s in sc.sources],
                "correlation_groups": [s.correlation_group or "" for s in sc.sources],
            },
            "run": {
                "estimators": [e.label for e in self.estimators],
                "enumeration": self.enumeration,
                "num_sources": self.fixed_sources,
                "trials": self.trials,
                "base_seed": self.base_seed,
            },
            "estimator_options": {e.label: e.to_dict() for e in self.estimators},
        }


def _key_lines(text):
    # maps (section, key) and (section, None) to 1-based line numbers
    lines = {}
    section = ""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        m = re.match(r"^\[\s*([^\[\]]+?)\s*\]$", line)
        if m:
            section = m.group(1).strip('"')
            lines.setdefault((section, None), n)
            continue
        m = re.match(r"^([A-Za-z0-9_\-\"]+)\s*=", line)
        if m:
            lines.setdefault((section, m.group(1).strip('"')), n)
    return lines


class _Reader:
    def __init__(self, doc, lines):
        self.doc = doc
        self.lines = lines

    def error(self, section, key, message):
        name = f"{section}.{key}" if key else section
        line = self.lines.get((section, key), self.lines.get((section, None)))
        return ConfigError(message, name, line)

    def section(self, name, allowed, required=True):
        sec = self.doc.get(name)
        if sec is None:
            if required:
                raise ConfigError(f"missing required section [{name}]", name)
            return {}
        if not isinstance(sec, dict):
            raise self.error(name, None, "expected a section")
        for key in sec:
            if key not in allowed:
                raise self.error(name, key, "unknown key")
        return sec

    def get(self, section, sec, key, types, default=..., check=None, what=None):
        if key not in sec:
            if default is ...:
                raise self.error(section, None, f"missing required key '{key}'")
            return default
        value = sec[key]
        if isinstance(value, bool) and bool not in types:
            raise self.error(section, key, f"expected {what or types[0].__name__}, got a boolean")
        if not isinstance(value, types):
            raise self.error(
                section, key, f"expected {what or types[0].__name__}, got {type(value).__name__}"
            )
        if check is not None:
            msg = check(value)
            if msg:
                raise self.error(section, key, msg)
        return value


def _positive(v):
    return None if v > 0 else "must be > 0"


def parse_config(text: str, default_output_dir: str | Path = "out") -> ExperimentConfig:
    """Parses and validates an experiment configuration document.

    Raises:
        ConfigError: Syntax errors (with line number) and invariant
            violations (naming the field).
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", line=int(m.group(1)) if m else None) from exc
    rd = _Reader(doc, _key_lines(text))

    sc = rd.section("scenario", _SCENARIO_KEYS)
    run = rd.section("run", _RUN_KEYS)

    labels = rd.get("run", run, "estimators", (list,), what="list of estimator labels")
    if not labels:
        raise rd.error("run", "estimators", "at least one estimator is required")
    if len(set(labels)) != len(labels) or not all(isinstance(x, str) for x in labels):
        raise rd.error("run", "estimators", "labels must be unique strings")
    for name in doc:
        if name not in ("scenario", "run") and name not in labels:
            raise rd.error(name, None, "unknown section (not a configured estimator label)")

    num_elements = rd.get("scenario", sc, "num_elements", (int,), check=lambda v: None if v >= 2 else "must be >= 2")
    spacing = rd.get("scenario", sc, "spacing_wavelengths", (float, int), 0.5, _positive, "number")
    num_snapshots = rd.get("scenario", sc, "num_snapshots", (int,), check=_positive)
    snr_db = rd.get(
        "scenario", sc, "snr_db", (float, int), 20.0,
        lambda v: None if not math.isnan(v) and v != -math.inf else "must be a number or inf", "number",
    )
    angles = rd.get("scenario", sc, "angles_deg", (list,), what="list of angles")
    if not angles:
        raise rd.error("scenario", "angles_deg", "at least one source is required")
    if not all(isinstance(a, (int, float)) and not isinstance(a, bool) for a in angles):
        raise rd.error("scenario", "angles_deg", "angles must be numbers")
    if any(abs(a) > 90 for a in angles):
        raise rd.error("scenario", "angles_deg", "angles must lie in [-90, 90]")
    D = len(angles)
    powers = rd.get("scenario", sc, "powers", (list,), [1.0] * D, what="list of powers")
    if len(powers) != D:
        raise rd.error("scenario", "powers", f"expected {D} entries to match angles_deg")
    if not all(isinstance(p, (int, float)) and not isinstance(p, bool) and p > 0 for p in powers):
        raise rd.error("scenario", "powers", "powers must be positive numbers")
    groups = rd.get("scenario", sc, "correlation_groups", (list,), [""] * D, what="list of labels")
    if len(groups) != D or not all(isinstance(g, str) for g in groups):
        raise rd.error("scenario", "correlation_groups", f"expected {D} string labels")

    base_seed = rd.get("run", run, "base_seed", (int,), 0, lambda v: None if v >= 0 else "must be >= 0")
    try:
        geometry = ArrayGeometry(num_elements, float(spacing))
        sources = [
            SourceSpec(float(a), float(p), g or None) for a, p, g in zip(angles, powers, groups)
        ]
        scenario = ScenarioSpec(geometry, sources, num_snapshots, float(snr_db), base_seed)
    except DoaError as exc:
        raise ConfigError(str(exc), "scenario") from exc

    enumeration = rd.get(
        "run", run, "enumeration", (str,), "mdl",
        lambda v: None if v in ENUMERATION_METHODS else f"must be one of {ENUMERATION_METHODS}",
    )
    fixed = rd.get("run", run, "num_sources", (int,), None, _positive)
    if enumeration == "fixed" and fixed is None:
        raise rd.error("run", "num_sources", "required when enumeration = 'fixed'")
    if enumeration != "fixed" and fixed is not None:
        raise rd.error("run", "num_sources", "only allowed when enumeration = 'fixed'")
    if fixed is not None and fixed >= num_elements:
        raise rd.error("run", "num_sources", "must be smaller than num_elements")
    trials = rd.get("run", run, "trials", (int,), 1, lambda v: None if v >= 1 else "must be >= 1")
    output_dir = rd.get("run", run, "output_dir", (str,), str(default_output_dir))
    record_timing = rd.get("run", run, "record_timing", (bool,), False)

    estimators = tuple(_parse_estimator(rd, label, doc.get(label), num_elements) for label in labels)
    return ExperimentConfig(
        scenario, estimators, enumeration, fixed, trials, base_seed, Path(output_dir), record_timing
    )


def _parse_estimator(rd, label, sec, num_elements):
    if sec is None:
        if label not in ESTIMATOR_KINDS:
            raise rd.error("run", "estimators", f"'{label}' is not an estimator kind and has no section")
        return EstimatorConfig(label, label)
    if not isinstance(sec, dict):
        raise rd.error(label, None, "expected a section")
    rd.section(label, _ESTIMATOR_KEYS)
    kind = rd.get(
        label, sec, "kind", (str,), label,
        lambda v: None if v in ESTIMATOR_KINDS else f"must be one of {ESTIMATOR_KINDS}",
    )
    if kind not in ESTIMATOR_KINDS:
        raise rd.error(label, None, f"unknown estimator; set kind to one of {ESTIMATOR_KINDS}")
    allowed = {"kind", "smoothing", "subarray_len"}
    if kind in SPECTRUM_KINDS:
        allowed.add("grid_step")
    if kind == "capon":
        allowed.add("loading")
    if kind == "esprit":
        allowed.add("subarray")
    for key in sec:
        if key not in allowed:
            raise rd.error(label, key, f"not an option of {kind}")

    def step_ok(v):
        if v <= 0:
            return "must be > 0"
        n = round(180.0 / v)
        return None if abs(n * v - 180.0) < 1e-9 else "must divide 180 degrees"

    grid_step = float(rd.get(label, sec, "grid_step", (float, int), DEFAULT_GRID_STEP, step_ok, "number"))
    smoothing_kind = rd.get(
        label, sec, "smoothing", (str,), "none",
        lambda v: None if v in Smoothing.KINDS else f"must be one of {Smoothing.KINDS}",
    )
    L = rd.get(
        label, sec, "subarray_len", (int,), None,
        lambda v: None if 2 <= v <= num_elements else f"must be in [2, {num_elements}]",
    )
    spatial = smoothing_kind.endswith("spatial")
    if spatial and L is None:
        raise rd.error(label, "smoothing", "spatial smoothing needs subarray_len")
    if not spatial and L is not None:
        raise rd.error(label, "subarray_len", "only valid with spatial smoothing")
    loading = rd.get(label, sec, "loading", (float, int), None, lambda v: None if v >= 0 else "must be >= 0", "number")
    subarray = rd.get(
        label, sec, "subarray", (str,), "max_overlap",
        lambda v: None if v in ("max_overlap", "split_halves") else "must be max_overlap or split_halves",
    )
    size = L if spatial else num_elements
    if kind == "esprit" and subarray == "split_halves" and size % 2:
        raise rd.error(label, "subarray", "split_halves needs an even array size")
    return EstimatorConfig(
        label, kind, grid_step, Smoothing(smoothing_kind, L),
        None if loading is None else float(loading), subarray,
    )


def preset_names() -> list:
    return sorted(p.stem for p in PRESET_DIR.glob("*.toml"))


def load_config(path_or_preset: str | Path) -> ExperimentConfig:
    """Loads a configuration file, or a bundled preset such as ``scenario-6.1``."""
    path = Path(path_or_preset)
    if not path.exists():
        preset = PRESET_DIR / f"{path_or_preset}.toml"
        if preset.exists():
            path = preset
        else:
            raise ConfigError(
                f"no config file {str(path_or_preset)!r} and no preset of that name "
                f"(presets: {', '.join(preset_names())})"
            )
    return parse_config(path.read_text(encoding="utf-8"))
