"""Command-line entry point.

Subcommands: ``run``, ``experiment``, ``replicate``, ``compare`` and
``list-functions``. Values come from built-in defaults, then an optional
YAML ``--config`` file, then command-line flags (flags win).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .benchmarks import FUNCTION_NAMES, describe_registry
from .core import ComparisonError, ConfigError, DimensionError, PlotError, UnknownFunctionError
from .engine import SwitchProbabilitySchedule, run, run_improved
from .harness.experiment import (
    SCHEMA_VERSION,
    ExperimentConfig,
    compare_algorithms,
    replicate,
    run_experiment,
    write_comparisons,
)
from .harness.report import TABLE_COLUMNS, table_row

# flag dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "function": "function",
    "dim": "dimension",
    "algorithm": "algorithm",
    "p": "switch_probability",
    "schedule": "schedule",
    "pop": "swarm_size",
    "generations": "max_generations",
    "runs": "runs",
    "seed": "seed",
    "lam": "levy_exponent",
    "gamma": "global_step_scale",
    "workers": "workers",
    "out": "out_dir",
    "eq1_sign": "eq1_sign",
    "literal_himmelblau": "literal_himmelblau",
    "per_coordinate_epsilon": "per_coordinate_epsilon",
}


def _add_common(parser: argparse.ArgumentParser, algorithm: bool = True) -> None:
    # every default is None so we can tell "not given" from "given"
    parser.add_argument("--config", help="YAML file with ExperimentConfig fields and schema_version")
    parser.add_argument("--function", help=f"benchmark name: {', '.join(FUNCTION_NAMES)}")
    parser.add_argument("--dim", type=int, help="problem dimension")
    if algorithm:
        parser.add_argument("--algorithm", choices=["original", "proposed"])
    parser.add_argument("--p", type=float, help="switch probability for the original algorithm")
    parser.add_argument("--schedule", help='dimension schedule for the proposed algorithm, e.g. "10:0.5,30:0.2,50:0.1"')
    parser.add_argument("--pop", type=int, help="swarm size")
    parser.add_argument("--generations", type=int, help="generations per run")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--lambda", dest="lam", type=float, help="Levy exponent (0, 2]")
    parser.add_argument("--gamma", type=float, help="global step scale")
    parser.add_argument("--eq1-sign", action="store_true", default=None, help="step away from the best in global moves")
    parser.add_argument("--literal-himmelblau", action="store_true", default=None, help="index-weighted Himmelblau form")
    parser.add_argument("--per-coordinate-epsilon", action="store_true", default=None)


def _add_batch(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--runs", type=int, help="independent runs per experiment")
    parser.add_argument("--workers", type=int, help="worker processes (default: available cores)")
    parser.add_argument("--out", help="results directory (default: results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pollination", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("run", help="one seeded run; prints best fitness and position")
    _add_common(p)

    p = sub.add_parser("experiment", help="repeated runs of one configuration")
    _add_common(p)
    _add_batch(p)

    p = sub.add_parser("replicate", help="full function x dimension x algorithm grid")
    _add_common(p, algorithm=False)
    _add_batch(p)

    p = sub.add_parser("compare", help="original vs proposed on one function and dimension")
    _add_common(p, algorithm=False)
    _add_batch(p)

    sub.add_parser("list-functions", help="print the benchmark registry")
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping of field names to values")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config file {path}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    return data


def _settings(args: argparse.Namespace) -> dict:
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config_file(args.config))
    for dest, name in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = v
    return values


def _experiment_config(values: dict) -> ExperimentConfig:
    values = dict(values)
    values.setdefault("workers", os.cpu_count() or 1)
    values.setdefault("out_dir", "results")
    return ExperimentConfig.from_dict(values)


def _print_rows(rows) -> None:
    print(",".join(TABLE_COLUMNS))
    for row in rows:
        print(",".join(str(v) for v in row))


def _cmd_run(args) -> None:
    values = _settings(args)
    values.pop("runs", None)
    cfg = ExperimentConfig.from_dict({**values, "runs": 1})
    fpa_cfg = cfg.fpa_config()
    if cfg.algorithm == "proposed":
        result = run_improved(fpa_cfg, SwitchProbabilitySchedule.parse(cfg.schedule))
    else:
        result = run(fpa_cfg)
    print(f"function: {cfg.function}  dimension: {cfg.dimension}  algorithm: {cfg.algorithm}")
    print(f"switch_probability: {cfg.effective_switch_probability:g}  seed: {cfg.seed}")
    print(f"best_fitness: {result.best_fitness!r}")
    print("best_position: " + json.dumps([float(v) for v in result.best_position]))
    print(f"evaluations_used: {result.evaluations_used}")


def _cmd_experiment(args) -> None:
    cfg = _experiment_config(_settings(args))
    res = run_experiment(cfg)
    fn = res.benchmark
    _print_rows([table_row(fn.number, fn.display_name, cfg.algorithm, fn.dimension, res.statistics)])
    print(f"results written to {res.directory}", file=sys.stderr)


def _comparison_rows(records):
    rows = []
    for rec in records:
        for side in (rec.a, rec.b):
            fn = side.benchmark
            rows.append(table_row(fn.number, fn.display_name, side.config.algorithm, fn.dimension, side.statistics))
    return rows


def _cmd_compare(args) -> None:
    values = _settings(args)
    p = values.pop("switch_probability", None)
    base = _experiment_config({**values, "algorithm": "proposed"})
    original = dataclasses.replace(base, algorithm="original", switch_probability=p)
    rec = compare_algorithms(original, base)
    stem = f"compare_{base.function}_{base.dimension}"
    table, _ = write_comparisons([rec], base.out_dir, f"{stem}.csv", f"{stem}.json")
    _print_rows(_comparison_rows([rec]))
    c = rec.comparison
    print(
        f"better mean: {c.better_label or 'tie'}  ratio (proposed/original): {c.mean_ratio:.3g}  "
        f"rank-sum p (artifact extension): {c.rank_sum_p:.3g}"
    )
    print(f"table written to {table}", file=sys.stderr)


def _cmd_replicate(args) -> None:
    values = _settings(args)
    p = values.pop("switch_probability", None)
    for name in ("function", "dimension"):
        values.pop(name, None)
    base = _experiment_config({**values, "algorithm": "original", "switch_probability": p})

    def progress(rec):
        c = rec.comparison
        print(
            f"{c.function} d={c.dimension}: original mean {c.stats_a.mean:.3e}, "
            f"proposed mean {c.stats_b.mean:.3e}",
            file=sys.stderr,
        )

    records = replicate(base, progress=progress)
    _print_rows(_comparison_rows(records))
    wins = sum(r.comparison.better == "b" for r in records)
    print(f"proposed better mean in {wins}/{len(records)} cells")
    print(f"results written to {Path(base.out_dir)}", file=sys.stderr)


def _cmd_list_functions(args) -> None:
    print("number,name,display_name,lower,upper,modality,min_dimension")
    for row in describe_registry():
        lo, hi = row["bounds"]
        print(f"{row['number']},{row['name']},{row['display_name']},{lo:g},{hi:g},{row['modality']},{row['min_dimension']}")


_COMMANDS = {
    "run": _cmd_run,
    "experiment": _cmd_experiment,
    "replicate": _cmd_replicate,
    "compare": _cmd_compare,
    "list-functions": _cmd_list_functions,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (ConfigError, DimensionError, UnknownFunctionError, ComparisonError, PlotError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"pollination {args.command}: error: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pollination {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
