"""Command-line entry point.

Verbs map to experiment kinds; every verb accepts --config (JSON), --seed,
--out and --threads overrides.  Exit codes: 0 success, 2 config error,
3 resume/replay mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .records import SchemaError, output_root
from .runner import (
    EXPERIMENT_KINDS,
    ConfigError,
    ExperimentConfig,
    ResumeMismatch,
    load_config,
    replay,
    run_experiment,
)

# verb -> (default kind, kinds the verb accepts from a config file)
_VERB_KINDS = {
    "evolve": ("evolve_ga", ("evolve_ga", "evolve_es")),
    "criticality": ("criticality_scan", ("criticality_scan", "sensor_modes")),
    "scaling": ("scaling", ("scaling",)),
    "generalize": ("generalize", ("generalize",)),
    "perturb": ("perturb", ("perturb",)),
    "benchmark": ("benchmark", ("benchmark",)),
    "thermalize": ("thermalization_sweep", ("thermalization_sweep",)),
    "delta-dist": ("delta_distribution", ("delta_distribution",)),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; omitted fields use defaults")
    parser.add_argument("--seed", type=int, help="root seed override")
    parser.add_argument("--out", help="output root override")
    parser.add_argument("--threads", type=int, help="cross-run fan-out width (never affects results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isingforage")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in _VERB_KINDS:
        p = sub.add_parser(verb)
        _add_common(p)
        if verb == "evolve":
            p.add_argument("--algorithm", choices=["ga", "es"], help="evolutionary algorithm")
    p = sub.add_parser("replay")
    p.add_argument("run_dir", help="experiment directory holding a config.json echo")
    p.add_argument("--out", required=True, help="directory for the re-run")
    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    default_kind, allowed = _VERB_KINDS[args.verb]
    if getattr(args, "algorithm", None):
        config.kind = f"evolve_{args.algorithm}"
    elif not args.config or config.kind not in allowed:
        if args.config and config.kind in EXPERIMENT_KINDS and config.kind not in allowed:
            raise ConfigError(f"config kind {config.kind!r} does not match verb {args.verb!r}")
        config.kind = default_kind
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    else:
        config.out_dir = output_root(config.out_dir)
    if args.threads is not None:
        config.threads = args.threads
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "replay":
            ok, diffs = replay(args.run_dir, args.out)
            if ok:
                print("replay: all CSV outputs identical")
                return 0
            print("replay: outputs differ: " + ", ".join(diffs))
            return 3
        config = _build_config(args)
        out = run_experiment(config)
        print(f"wrote {out}")
        return 0
    except (ConfigError, SchemaError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResumeMismatch as exc:
        print(f"resume mismatch: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
