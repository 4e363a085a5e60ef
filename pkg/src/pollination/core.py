"""Shared domain types, bound handling and the random-stream contract.

Every stochastic routine in the package takes a :class:`numpy.random.Generator`
built by :func:`make_rng`. The generator family is fixed to PCG64 seeded
through :class:`numpy.random.SeedSequence`, so a ``(seed, stream)`` pair
always produces the same sequence of draws on any platform numpy supports.
Run ``i`` of an experiment uses ``stream=i`` under the experiment's master
seed, which makes the first 30 runs of a 100-run experiment identical to a
30-run experiment with the same master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "AggregationError",
    "Bounds",
    "ComparisonError",
    "ConfigError",
    "CountingObjective",
    "DimensionError",
    "PlotError",
    "Pollen",
    "Population",
    "PopulationTooSmallError",
    "UnknownFunctionError",
    "clamp",
    "make_rng",
    "pick_two_distinct",
    "uniform",
]


class ConfigError(ValueError):
    """Invalid parameter value; the message names the offending field."""


class DimensionError(ValueError):
    """Vector length incompatible with an objective or a population."""


class PopulationTooSmallError(ValueError):
    pass


class UnknownFunctionError(LookupError):
    pass


class AggregationError(ValueError):
    pass


class ComparisonError(ValueError):
    pass


class PlotError(ValueError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Hypercube search space ``[lower, upper]^d``, closed on both ends."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ConfigError(f"bounds must be finite, got [{self.lower}, {self.upper}]")
        if not self.lower < self.upper:
            raise ConfigError(f"bounds need lower < upper, got [{self.lower}, {self.upper}]")

    def contains(self, position) -> bool:
        position = np.asarray(position)
        return bool(np.all((position >= self.lower) & (position <= self.upper)))

    @property
    def width(self) -> float:
        return self.upper - self.lower


def clamp(position, bounds: Bounds) -> np.ndarray:
    """Saturate every coordinate into ``bounds``.

    In-bounds coordinates are returned bit-for-bit unchanged. A non-finite
    coordinate raises :class:`ValueError` naming its index.
    """
    position = np.asarray(position, dtype=float)
    finite = np.isfinite(position)
    if not finite.all():
        bad = np.argwhere(~finite)[0]
        index = int(bad[-1]) if position.ndim else 0
        raise ValueError(f"non-finite coordinate at index {index}: {position[tuple(bad)]!r}")
    return np.clip(position, bounds.lower, bounds.upper)


def make_rng(seed: int, stream: Optional[int] = None) -> np.random.Generator:
    """Return the PCG64 generator for ``seed`` (and optional sub-stream)."""
    if seed < 0 or seed >= 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream is None:
        seq = np.random.SeedSequence(seed)
    else:
        if stream < 0:
            raise ConfigError(f"stream index must be >= 0, got {stream}")
        seq = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(seq))


def uniform(rng: np.random.Generator, size=None):
    """Uniform draw(s) on ``[0, 1)``."""
    return rng.random(size)


def pick_two_distinct(rng: np.random.Generator, n: int, size=None):
    """Draw indices ``j != k`` uniformly from ``range(n)``.

    ``k`` is drawn from the ``n - 1`` indices other than ``j``, so every
    ordered pair is equally likely. With ``size`` the result is a pair of
    integer arrays.
    """
    if n < 2:
        raise PopulationTooSmallError(f"need at least 2 members to pick a distinct pair, got {n}")
    j = rng.integers(0, n, size=size)
    k = rng.integers(0, n - 1, size=size)
    k = k + (k >= j)
    if size is None:
        return int(j), int(k)
    return j, k


class CountingObjective:
    """Wrap an objective and count evaluated points.

    Accepts a single position (1-D) or a batch of positions (2-D, one per
    row); the count grows by the number of positions evaluated.
    """

    def __init__(self, func: Callable[[np.ndarray], object]):
        self.func = func
        self.calls = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        self.calls += 1 if x.ndim == 1 else x.shape[0]
        return self.func(x)


@dataclass
class Pollen:
    """One candidate solution with a lazily computed, cached fitness."""

    position: np.ndarray
    fitness: Optional[float] = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)

    @property
    def dimension(self) -> int:
        return self.position.shape[0]

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def evaluate(self, objective) -> float:
        if self.fitness is None:
            self.fitness = float(objective(self.position))
        return self.fitness

    def moved_to(self, position) -> "Pollen":
        return Pollen(np.asarray(position, dtype=float))


@dataclass
class Population:
    members: list
    best: Pollen = field(init=False)

    def __post_init__(self):
        if len(self.members) < 2:
            raise PopulationTooSmallError(
                f"population needs at least 2 members, got {len(self.members)}"
            )
        dims = {m.dimension for m in self.members}
        if len(dims) != 1:
            raise DimensionError(f"members disagree on dimension: {sorted(dims)}")
        if not all(m.evaluated for m in self.members):
            raise ValueError("every member must be evaluated before building a population")
        self.refresh_best()

    def __len__(self) -> int:
        return len(self.members)

    @property
    def dimension(self) -> int:
        return self.members[0].dimension

    def fitnesses(self) -> np.ndarray:
        return np.array([m.fitness for m in self.members])

    def positions(self) -> np.ndarray:
        return np.stack([m.position for m in self.members])

    def refresh_best(self) -> Pollen:
        # first index wins ties, matching np.argmin
        idx = int(np.argmin(self.fitnesses()))
        src = self.members[idx]
        self.best = Pollen(src.position.copy(), src.fitness)
        return self.best


