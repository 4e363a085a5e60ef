"""Batch experiments: repeated seeded runs, persistence and the full replication grid.

Results directory layout (one directory per experiment)::

    <out>/<function>_<dimension>_<algorithm>/
        runs.json   config echo, library version, statistics, per-run records
        stats.csv   one table row in the comparison-table format
        trace.csv   per-generation mean / min / max best-so-far
        plot.svg    convergence curve with min/max band

``replicate`` adds ``table.csv``, ``comparisons.json`` and
``figures/<function>.svg`` (+ ``.csv``) at the top of ``<out>``.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import __version__
from ..benchmarks import FUNCTION_NAMES, BenchmarkFunction, registry_lookup
from ..core import ComparisonError, ConfigError
from ..engine import (
    ORIGINAL_SWITCH_PROBABILITY,
    FpaConfig,
    RunResult,
    SwitchProbabilitySchedule,
    run_many,
)
from .report import ALGORITHM_LABELS, emit_convergence_plot, emit_table, table_row, write_rows
from .stats import Comparison, ConvergenceTrace, RunStatistics, compare_statistics, compute_statistics

__all__ = [
    "ALGORITHMS",
    "ComparisonRecord",
    "ExperimentConfig",
    "ExperimentResult",
    "GENERATIONS_BY_DIMENSION",
    "GRID_DIMENSIONS",
    "SCHEMA_VERSION",
    "compare_algorithms",
    "experiment_dirname",
    "load_experiment_config",
    "replicate",
    "run_experiment",
]

SCHEMA_VERSION = 1
ALGORITHMS = ("original", "proposed")
GRID_DIMENSIONS = (10, 30, 50)
GENERATIONS_BY_DIMENSION = {10: 1000, 30: 1500, 50: 2500}
DEFAULT_SCHEDULE_TEXT = "10:0.5,30:0.2,50:0.1"

# fields that change how work is scheduled or where it lands, never the numbers
_NON_RESULT_FIELDS = ("out_dir", "workers")


def default_generations(dimension: int) -> int:
    """Generation budget for ``dimension``; nearest grid dimension, ties go low."""
    nearest = min(GENERATIONS_BY_DIMENSION, key=lambda d: (abs(d - dimension), d))
    return GENERATIONS_BY_DIMENSION[nearest]


@dataclass
class ExperimentConfig:
    function: str = "sphere"
    dimension: int = 10
    algorithm: str = "proposed"
    runs: int = 100
    swarm_size: int = 50
    max_generations: Optional[int] = None
    switch_probability: Optional[float] = None
    schedule: str = DEFAULT_SCHEDULE_TEXT
    levy_exponent: float = 1.5
    global_step_scale: float = 1.0
    seed: int = 0
    eq1_sign: bool = False
    per_coordinate_epsilon: bool = False
    literal_himmelblau: bool = False
    out_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {', '.join(ALGORITHMS)}, got {self.algorithm!r}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.algorithm == "proposed" and self.switch_probability is not None:
            raise ConfigError(
                "switch_probability applies to algorithm 'original'; give 'proposed' a schedule instead"
            )
        SwitchProbabilitySchedule.parse(self.schedule)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        version = data.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        return cls(**data)

    @property
    def generations(self) -> int:
        if self.max_generations is not None:
            return self.max_generations
        return default_generations(self.dimension)

    @property
    def effective_switch_probability(self) -> float:
        if self.algorithm == "proposed":
            return SwitchProbabilitySchedule.parse(self.schedule).for_dimension(self.dimension)
        if self.switch_probability is None:
            return ORIGINAL_SWITCH_PROBABILITY
        return self.switch_probability

    def benchmark(self) -> BenchmarkFunction:
        return registry_lookup(self.function, self.dimension, self.literal_himmelblau)

    def fpa_config(self) -> FpaConfig:
        return FpaConfig(
            objective=self.benchmark(),
            swarm_size=self.swarm_size,
            max_generations=self.generations,
            switch_probability=self.effective_switch_probability,
            levy_exponent=self.levy_exponent,
            global_step_scale=self.global_step_scale,
            seed=self.seed,
            eq1_sign=self.eq1_sign,
            per_coordinate_epsilon=self.per_coordinate_epsilon,
        )

    def echo(self) -> dict:
        """Resolved, result-determining parameters as persisted in ``runs.json``."""
        out = {"schema_version": SCHEMA_VERSION}
        for f in dataclasses.fields(self):
            if f.name not in _NON_RESULT_FIELDS:
                out[f.name] = getattr(self, f.name)
        out["max_generations"] = self.generations
        if self.algorithm == "original":
            out["switch_probability"] = self.effective_switch_probability
        out["effective_switch_probability"] = self.effective_switch_probability
        return out

    @property
    def dirname(self) -> str:
        return experiment_dirname(self.function, self.dimension, self.algorithm)


def experiment_dirname(function: str, dimension: int, algorithm: str) -> str:
    return f"{function}_{dimension}_{algorithm}"


def load_experiment_config(path) -> ExperimentConfig:
    """Rebuild the config recorded in a ``runs.json`` file."""
    with open(path) as fh:
        record = json.load(fh)
    cfg = dict(record["config"])
    cfg.pop("effective_switch_probability", None)
    if cfg.get("algorithm") == "proposed":
        cfg["switch_probability"] = None
    return ExperimentConfig.from_dict(cfg)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    benchmark: BenchmarkFunction
    statistics: RunStatistics
    trace: ConvergenceTrace
    runs: list
    directory: Optional[Path] = None

    @property
    def final_values(self) -> list:
        return [r.best_fitness for r in self.runs]


@dataclass
class ComparisonRecord:
    a: ExperimentResult
    b: ExperimentResult
    comparison: Comparison


def _run_chunk(cfg: ExperimentConfig, streams: list) -> list:
    return run_many(cfg.fpa_config(), streams, algorithm=cfg.algorithm)


def _execute_runs(cfg: ExperimentConfig) -> list:
    streams = list(range(cfg.runs))
    if cfg.workers == 1 or cfg.runs == 1:
        return _run_chunk(cfg, streams)
    chunks = [list(map(int, c)) for c in np.array_split(streams, min(cfg.workers, cfg.runs))]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    # fold in run-index order regardless of completion order
    return [r for part in parts for r in part]


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Execute ``cfg.runs`` independent runs and aggregate them.

    Run ``i`` uses stream ``i`` under ``cfg.seed``. With ``cfg.out_dir`` set,
    the results are written to ``<out_dir>/<function>_<dimension>_<algorithm>/``.
    """
    benchmark = cfg.benchmark()
    fpa_cfg = cfg.fpa_config()  # validate before any work or I/O
    directory = None
    if cfg.out_dir is not None:
        directory = _prepare_dir(Path(cfg.out_dir) / cfg.dirname)
    runs = _execute_runs(cfg)
    if cfg.algorithm == "proposed":
        for r in runs:
            r.config["schedule"] = cfg.schedule
    result = ExperimentResult(
        config=cfg,
        benchmark=benchmark,
        statistics=compute_statistics([r.best_fitness for r in runs]),
        trace=ConvergenceTrace.from_traces([r.fitness_trace for r in runs]),
        runs=runs,
        directory=directory,
    )
    assert fpa_cfg.max_generations == result.trace.generations
    if directory is not None:
        _write_experiment(result, directory)
    return result


def _prepare_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    return path


def _dump_json(obj, path: Path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _run_record(index: int, run: RunResult) -> dict:
    rec = run.to_record()
    config = rec.pop("config")
    return {"run_index": index, "stream": config["stream"], **rec}


def _write_experiment(result: ExperimentResult, directory: Path) -> None:
    cfg = result.config
    payload = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "config": cfg.echo(),
        "seed_derivation": "PCG64(SeedSequence(seed, spawn_key=(run_index,)))",
        "statistics": result.statistics.as_dict(),
        "runs": [_run_record(i, r) for i, r in enumerate(result.runs)],
    }
    _dump_json(payload, directory / "runs.json")
    fn = result.benchmark
    write_rows(
        directory / "stats.csv",
        [table_row(fn.number, fn.display_name, cfg.algorithm, fn.dimension, result.statistics)],
    )
    emit_convergence_plot(
        [result.trace],
        [ALGORITHM_LABELS[cfg.algorithm]],
        directory / "plot.svg",
        title=f"{fn.display_name}, d={fn.dimension}",
        raw_path=directory / "trace.csv",
    )


def _comparable(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig) -> None:
    for name in ("function", "dimension", "runs", "swarm_size", "literal_himmelblau"):
        va, vb = getattr(cfg_a, name), getattr(cfg_b, name)
        if va != vb:
            raise ComparisonError(f"cannot compare experiments with different {name}: {va!r} vs {vb!r}")
    if cfg_a.generations != cfg_b.generations:
        raise ComparisonError(
            f"cannot compare experiments with different max_generations: "
            f"{cfg_a.generations} vs {cfg_b.generations}"
        )


def compare_algorithms(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig) -> ComparisonRecord:
    """Run both experiments on the same problem and budget and pair their results."""
    _comparable(cfg_a, cfg_b)
    a, b = run_experiment(cfg_a), run_experiment(cfg_b)
    comparison = compare_statistics(
        a.final_values,
        b.final_values,
        function=cfg_a.function,
        dimension=cfg_a.dimension,
        label_a=ALGORITHM_LABELS[cfg_a.algorithm],
        label_b=ALGORITHM_LABELS[cfg_b.algorithm],
    )
    return ComparisonRecord(a, b, comparison)


def write_comparisons(records: Sequence[ComparisonRecord], out_dir, table_name: str, json_name: str) -> tuple:
    out_dir = _prepare_dir(Path(out_dir))
    table = emit_table(records, out_dir / table_name)
    json_path = out_dir / json_name
    _dump_json(
        {
            "schema_version": SCHEMA_VERSION,
            "library_version": __version__,
            "comparisons": [r.comparison.as_dict() for r in records],
        },
        json_path,
    )
    return table, json_path


def replicate(
    base: ExperimentConfig,
    functions: Sequence[str] = FUNCTION_NAMES,
    dimensions: Sequence[int] = GRID_DIMENSIONS,
    progress=None,
) -> list:
    """Run original vs proposed for every (function, dimension) cell.

    ``base`` supplies runs, seed, workers, output directory and the shared
    search parameters; its function, dimension and algorithm are replaced
    per cell. Generation budgets follow the dimension unless ``base`` fixes
    ``max_generations``. With ``base.workers > 1`` whole cells run in worker
    processes; records come back in grid order either way.
    """
    cells = [(name, dim) for name in functions for dim in dimensions]
    # with several workers the grid cells are the unit of parallel work, so each
    # worker still vectorizes across all runs of its cell
    inner = 1 if base.workers > 1 else base.workers
    pairs = []
    for name, dim in cells:
        cfg_a = dataclasses.replace(base, function=name, dimension=dim, algorithm="original", workers=inner)
        cfg_b = dataclasses.replace(
            base, function=name, dimension=dim, algorithm="proposed", switch_probability=None, workers=inner
        )
        _comparable(cfg_a, cfg_b)
        pairs.append((cfg_a, cfg_b))
    records = []
    if base.workers > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=min(base.workers, len(pairs))) as pool:
            # map yields in submission order, so the fold is in grid order
            for rec in pool.map(compare_algorithms, *zip(*pairs)):
                records.append(rec)
                if progress is not None:
                    progress(rec)
    else:
        for cfg_a, cfg_b in pairs:
            rec = compare_algorithms(cfg_a, cfg_b)
            records.append(rec)
            if progress is not None:
                progress(rec)
    if base.out_dir is not None:
        out = Path(base.out_dir)
        write_comparisons(records, out, "table.csv", "comparisons.json")
        for name in functions:
            mine = [r for r in records if r.comparison.function == name]
            traces, labels, panels = [], [], []
            for rec in mine:
                for side in (rec.a, rec.b):
                    traces.append(side.trace)
                    labels.append(ALGORITHM_LABELS[side.config.algorithm])
                    panels.append(side.config.dimension)
            emit_convergence_plot(
                traces, labels, out / "figures" / f"{name}.svg", panels=panels,
                title=mine[0].a.benchmark.display_name,
            )
    return records
