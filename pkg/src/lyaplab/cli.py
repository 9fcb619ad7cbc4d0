"""Command-line entry point.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or
config error.  Output directory precedence: --output-dir flag, config field,
LYAPLAB_OUTDIR environment variable, ./lyaplab-out.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import scenarios as sc


def _print_report(report: sc.ScenarioReport, paths: list[str]) -> None:
    for v in report.verdicts:
        status = "PASS" if v.passed else "FAIL"
        print(f"[{status}] {v.check_id}: {v.name}: measured {v.measured:.10g} "
              f"vs {v.target:.10g} (tol {v.tolerance:.3g})"
              + (f"  [{v.note}]" if v.note else ""))
    n_fail = sum(not v.passed for v in report.verdicts)
    print(f"{report.scenario}: {len(report.verdicts) - n_fail}/{len(report.verdicts)} "
          f"checks passed")
    for p in paths:
        print(f"wrote {p}")


def _execute(cfg: sc.ExperimentConfig, seed=None, output_dir=None) -> int:
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    if output_dir is not None:
        cfg = replace(cfg, output_dir=output_dir)
    report = sc.run(cfg)
    paths = sc.write_artifacts(report, sc.resolve_output_dir(cfg))
    _print_report(report, paths)
    return 0 if report.all_passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lyaplab",
        description="Lyapunov-exponent experiments: variational solver checks, "
                    "Monte Carlo travel costs, and Poisson-line-process demos.")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run a scenario from a JSON config")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--output-dir", default=None, help="override the output directory")

    p_props = sub.add_parser("props-suite", help="run the solver property suite")
    p_props.add_argument("--corpus", default="default",
                         help="'default' or a JSON file with a list of potential specs")
    p_props.add_argument("--seed", type=int, default=None)
    p_props.add_argument("--output-dir", default=None)

    sub.add_parser("list-scenarios", help="list recognized scenario names")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize --help to 0
        return int(exc.code or 0)

    if args.command == "list-scenarios":
        for name in sc.SCENARIO_NAMES:
            print(name)
        for alias, target in sorted(sc.SCENARIO_ALIASES.items()):
            print(f"{alias} (alias of {target})")
        return 0

    try:
        if args.command == "run":
            cfg = sc.load_config(args.config)
            return _execute(cfg, args.seed, args.output_dir)
        if args.command == "props-suite":
            cfg = sc.default_config("props-suite")
            if args.corpus != "default":
                import json
                with open(args.corpus) as fh:
                    specs = json.load(fh)
                if not isinstance(specs, list) or not specs:
                    raise sc.ConfigError("corpus file must hold a nonempty list of potential specs")
                cfg = replace(cfg, potentials=tuple(specs))
                for p in cfg.potentials:
                    sc.potential_from_spec(p)
            return _execute(cfg, args.seed, args.output_dir)
    except sc.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
