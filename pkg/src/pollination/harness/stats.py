"""Aggregation of repeated runs: summary statistics, convergence envelopes, paired comparison."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import mannwhitneyu

from ..core import AggregationError

__all__ = ["Comparison", "ConvergenceTrace", "RunStatistics", "compare_statistics", "compute_statistics"]

SD_DIVISOR = "N"


@dataclass(frozen=True)
class RunStatistics:
    best: float
    worst: float
    mean: float
    median: float
    sd: float
    runs: int

    def as_dict(self) -> dict:
        return {
            "best": self.best,
            "worst": self.worst,
            "mean": self.mean,
            "median": self.median,
            "sd": self.sd,
            "runs": self.runs,
            "sd_divisor": SD_DIVISOR,
        }


def compute_statistics(values: Sequence[float]) -> RunStatistics:
    """Best/worst/mean/median/SD of final fitnesses (lower is better).

    SD is the population standard deviation (divisor N). Mean and SD are
    computed with exact summation, so the result does not depend on the
    order of ``values`` and a constant sample has SD exactly 0.
    """
    values = [float(v) for v in values]
    if not values:
        raise AggregationError("cannot aggregate an empty list of run results")
    for i, v in enumerate(values):
        if not math.isfinite(v):
            raise AggregationError(f"run result {i} is not finite: {v!r}")
    best, worst = min(values), max(values)
    if best == worst:
        return RunStatistics(best, worst, best, best, 0.0, len(values))
    mean = min(max(statistics.fmean(values), best), worst)
    return RunStatistics(
        best=best,
        worst=worst,
        mean=mean,
        median=float(statistics.median(values)),
        sd=float(statistics.pstdev(values)),
        runs=len(values),
    )


@dataclass
class ConvergenceTrace:
    """Per-generation mean best-so-far across runs with its min/max envelope."""

    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_traces(cls, traces) -> "ConvergenceTrace":
        arr = np.asarray([np.asarray(t, dtype=float) for t in traces])
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise AggregationError("need at least one trace, all of equal length")
        return cls(arr.mean(axis=0), arr.min(axis=0), arr.max(axis=0))

    @property
    def generations(self) -> int:
        return int(self.mean.shape[0])

    def all_positive(self) -> bool:
        return bool(np.all(self.lower > 0))


@dataclass
class Comparison:
    function: str
    dimension: int
    label_a: str
    label_b: str
    stats_a: RunStatistics
    stats_b: RunStatistics
    better: str
    mean_ratio: float
    rank_sum_p: Optional[float]

    @property
    def better_label(self) -> Optional[str]:
        return {"a": self.label_a, "b": self.label_b}.get(self.better)

    def as_dict(self) -> dict:
        return {
            "function": self.function,
            "dimension": self.dimension,
            "a": {"label": self.label_a, **self.stats_a.as_dict()},
            "b": {"label": self.label_b, **self.stats_b.as_dict()},
            "better_mean": self.better,
            "better_label": self.better_label,
            "mean_ratio_b_over_a": self.mean_ratio,
            "rank_sum": {
                "p_value": self.rank_sum_p,
                "test": "two-sided Mann-Whitney U on final best fitness",
                "note": "artifact extension",
            },
        }


def _mean_ratio(a: float, b: float) -> float:
    if a == b:
        return 1.0
    if a == 0.0:
        return math.copysign(math.inf, b)
    return b / a


def compare_statistics(
    values_a: Sequence[float],
    values_b: Sequence[float],
    function: str,
    dimension: int,
    label_a: str = "a",
    label_b: str = "b",
) -> Comparison:
    """Pair two samples of final fitness; the lower mean is flagged better."""
    sa, sb = compute_statistics(values_a), compute_statistics(values_b)
    if sa.mean < sb.mean:
        better = "a"
    elif sb.mean < sa.mean:
        better = "b"
    else:
        better = "tie"
    pooled = list(values_a) + list(values_b)
    if min(pooled) == max(pooled):
        p_value = 1.0
    else:
        p_value = float(mannwhitneyu(values_a, values_b, alternative="two-sided").pvalue)
    return Comparison(
        function=function,
        dimension=dimension,
        label_a=label_a,
        label_b=label_b,
        stats_a=sa,
        stats_b=sb,
        better=better,
        mean_ratio=_mean_ratio(sa.mean, sb.mean),
        rank_sum_p=p_value,
    )
