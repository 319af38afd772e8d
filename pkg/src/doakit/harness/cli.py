"""Command-line entry point: ``doakit run|compare|spectrum <config>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from ..errors import ConfigError
from .config import load_config, preset_names
from .runner import compare_estimators, run_experiment, spectrum_traces

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ESTIMATION = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doakit",
        description="Run direction-of-arrival experiments from a configuration file.",
        epilog=f"bundled presets: {', '.join(preset_names())}",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-trial details")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("run", "run all trials and write summary, per-trial records and spectra"),
        ("compare", "run all trials and print an estimator comparison table"),
        ("spectrum", "write first-trial spectra only"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="config file path or preset name")
        p.add_argument("--out", help="output directory (overrides run.output_dir)")
        p.add_argument("--trials", type=int, help="number of trials (overrides run.trials)")
        p.add_argument("--seed", type=int, help="base seed (overrides run.base_seed)")
    return parser


def _all_failed(report) -> bool:
    return all(
        o["error"] is not None for r in report.trials for o in r.estimates.values()
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if args.trials is not None and args.trials < 1:
            raise ConfigError("must be >= 1", "--trials")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("must be >= 0", "--seed")
        config = config.with_overrides(args.trials, args.seed, args.out)
        if args.command == "compare":
            table = compare_estimators(config)
            report = table.summary
            print(table.format())
        elif args.command == "spectrum":
            traces = spectrum_traces(config)
            for label in traces:
                print(config.output_dir / f"spectrum_{label}.csv")
            return EXIT_OK
        else:
            report = run_experiment(config)
            print(json.dumps(report.to_dict(config.record_timing), indent=2, sort_keys=True))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if _all_failed(report):
        print("every estimator failed in every trial", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
