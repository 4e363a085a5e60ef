"""Flower pollination search, original and dimension-keyed variants.

Random draws follow a fixed per-generation protocol so that the readable
member-by-member implementation (:func:`reference_run`) and the vectorized
multi-run path (:func:`run_many`) consume a stream identically and agree
bit for bit:

* initialization: one ``uniform(lower, upper, (n, d))`` block;
* each generation, in order: ``n`` switch draws, ``n`` epsilon draws
  (``(n, d)`` with ``per_coordinate_epsilon``), ``n`` peer pairs from
  :func:`~pollination.core.pick_two_distinct`, and an ``(n, d)`` block of
  Levy steps. Draws for the branch a member does not take are discarded.

Member ``i`` takes the global branch when its switch draw is ``< p``. The
sweep is sequential: a local move for member ``i`` sees peers already
replaced earlier in the same generation, while the global best is refreshed
only after the full sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .benchmarks import BenchmarkFunction
from .core import (
    ConfigError,
    CountingObjective,
    DimensionError,
    Pollen,
    Population,
    clamp,
    make_rng,
    pick_two_distinct,
)
from .levy import LevyConfig, levy_step, mantegna_sigma

__all__ = [
    "DEFAULT_SCHEDULE",
    "FpaConfig",
    "GenerationDraws",
    "RunResult",
    "SwitchProbabilitySchedule",
    "draw_generation",
    "global_pollination",
    "initialize_population",
    "local_pollination",
    "reference_run",
    "run",
    "run_improved",
    "run_many",
    "step_generation",
    "switch_probability_for",
]

ORIGINAL_SWITCH_PROBABILITY = 0.8


@dataclass(frozen=True)
class FpaConfig:
    objective: BenchmarkFunction
    swarm_size: int = 50
    max_generations: int = 1000
    switch_probability: float = ORIGINAL_SWITCH_PROBABILITY
    levy_exponent: float = 1.5
    global_step_scale: float = 1.0
    seed: int = 0
    stream: Optional[int] = None
    # opt-in: step away from the best (x - g*) instead of toward it
    eq1_sign: bool = False
    per_coordinate_epsilon: bool = False

    def __post_init__(self):
        if self.swarm_size < 2:
            raise ConfigError(f"swarm_size must be >= 2, got {self.swarm_size}")
        if self.max_generations < 1:
            raise ConfigError(f"max_generations must be >= 1, got {self.max_generations}")
        p = self.switch_probability
        if not (0.0 <= p <= 1.0):
            raise ConfigError(f"switch_probability must lie in [0, 1], got {p}")
        g = self.global_step_scale
        if not (g > 0.0 and math.isfinite(g)):
            raise ConfigError(f"global_step_scale must be > 0, got {g}")
        mantegna_sigma(self.levy_exponent)
        make_rng(self.seed, self.stream)

    @property
    def dimension(self) -> int:
        return self.objective.dimension

    def echo(self) -> dict:
        """Every parameter that shapes a run, as plain JSON-ready values."""
        return {
            "function": self.objective.name,
            "dimension": self.dimension,
            "literal_himmelblau": self.objective.literal_form,
            "swarm_size": self.swarm_size,
            "max_generations": self.max_generations,
            "switch_probability": self.switch_probability,
            "levy_exponent": self.levy_exponent,
            "global_step_scale": self.global_step_scale,
            "seed": self.seed,
            "stream": self.stream,
            "eq1_sign": self.eq1_sign,
            "per_coordinate_epsilon": self.per_coordinate_epsilon,
        }


@dataclass(frozen=True)
class SwitchProbabilitySchedule:
    """Map from problem dimension to switch probability.

    Dimensions between anchors take the nearest anchor's value; an exact
    midpoint goes to the lower-dimension anchor. Below the first anchor or
    above the last, the end anchor applies.
    """

    anchors: tuple = ((10, 0.5), (30, 0.2), (50, 0.1))

    def __post_init__(self):
        pairs = tuple(sorted((int(d), float(p)) for d, p in dict(self.anchors).items()))
        if not pairs:
            raise ConfigError("schedule needs at least one anchor")
        for d, p in pairs:
            if d < 1:
                raise ConfigError(f"schedule anchor dimension must be >= 1, got {d}")
            if not (0.0 < p <= 1.0):
                raise ConfigError(f"schedule probability for dimension {d} must lie in (0, 1], got {p}")
        for (d0, p0), (d1, p1) in zip(pairs, pairs[1:]):
            if p1 > p0:
                raise ConfigError(
                    f"schedule must be non-increasing in dimension: {d0}->{p0} then {d1}->{p1}"
                )
        object.__setattr__(self, "anchors", pairs)

    @classmethod
    def parse(cls, text: str) -> "SwitchProbabilitySchedule":
        """Parse ``"10:0.5,30:0.2,50:0.1"``."""
        pairs = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            try:
                d, p = item.split(":")
                pairs.append((int(d), float(p)))
            except ValueError:
                raise ConfigError(f"bad schedule entry {item!r}; expected DIM:P") from None
        return cls(tuple(pairs))

    @classmethod
    def constant(cls, dimension: int, p: float) -> "SwitchProbabilitySchedule":
        return cls(((dimension, p),))

    def for_dimension(self, dimension: int) -> float:
        if dimension < 1:
            raise ConfigError(f"dimension must be >= 1, got {dimension}")
        best_d, best_p = self.anchors[0]
        for d, p in self.anchors[1:]:
            # strict < keeps midpoints on the lower anchor
            if abs(d - dimension) < abs(best_d - dimension):
                best_d, best_p = d, p
        return best_p

    def __str__(self) -> str:
        return ",".join(f"{d}:{p:g}" for d, p in self.anchors)


DEFAULT_SCHEDULE = SwitchProbabilitySchedule()


def switch_probability_for(dimension: int, schedule: SwitchProbabilitySchedule = DEFAULT_SCHEDULE) -> float:
    return schedule.for_dimension(dimension)


@dataclass
class RunResult:
    best_fitness: float
    best_position: np.ndarray
    fitness_trace: np.ndarray
    evaluations_used: int
    global_moves: int
    config: dict
    algorithm: str = "original"

    def to_record(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "best_fitness": self.best_fitness,
            "best_position": [float(v) for v in self.best_position],
            "evaluations_used": self.evaluations_used,
            "global_moves": self.global_moves,
            "config": dict(self.config),
        }


@dataclass
class GenerationDraws:
    switch: np.ndarray
    epsilon: np.ndarray
    peer_j: np.ndarray
    peer_k: np.ndarray
    steps: np.ndarray


def draw_generation(rng: np.random.Generator, cfg: FpaConfig) -> GenerationDraws:
    n, d = cfg.swarm_size, cfg.dimension
    switch = rng.random(n)
    epsilon = rng.random((n, d) if cfg.per_coordinate_epsilon else n)
    peer_j, peer_k = pick_two_distinct(rng, n, size=n)
    steps = levy_step(rng, LevyConfig(cfg.levy_exponent, d), size=n)
    return GenerationDraws(switch, epsilon, peer_j, peer_k, steps)


def _initial_positions(rng: np.random.Generator, cfg: FpaConfig) -> np.ndarray:
    b = cfg.objective.bounds
    return rng.uniform(b.lower, b.upper, (cfg.swarm_size, cfg.dimension))


# -- member-level operations ------------------------------------------------


def initialize_population(cfg: FpaConfig, rng: np.random.Generator, objective=None) -> Population:
    objective = cfg.objective if objective is None else objective
    members = [Pollen(row) for row in _initial_positions(rng, cfg)]
    for m in members:
        m.evaluate(objective)
    return Population(members)


def global_pollination(
    current: Pollen,
    best: Pollen,
    cfg: FpaConfig,
    rng: Optional[np.random.Generator] = None,
    step: Optional[np.ndarray] = None,
) -> Pollen:
    """Levy move relative to the best: ``x + gamma * L * (g* - x)``, clamped.

    ``step`` supplies a pre-drawn Levy vector; otherwise one is drawn from
    ``rng``.
    """
    if current.dimension != best.dimension:
        raise DimensionError(f"current has d={current.dimension}, best has d={best.dimension}")
    if step is None:
        step = levy_step(rng, LevyConfig(cfg.levy_exponent, current.dimension))
    x = current.position
    direction = x - best.position if cfg.eq1_sign else best.position - x
    return current.moved_to(clamp(x + cfg.global_step_scale * step * direction, cfg.objective.bounds))


def local_pollination(
    current: Pollen,
    peer_j: Pollen,
    peer_k: Pollen,
    cfg: FpaConfig,
    rng: Optional[np.random.Generator] = None,
    epsilon=None,
) -> Pollen:
    """Difference move between two peers: ``x + eps * (x_j - x_k)``, clamped."""
    if peer_j is peer_k:
        raise ValueError("local pollination needs two distinct peers (j == k)")
    if not current.dimension == peer_j.dimension == peer_k.dimension:
        raise DimensionError("current and peers must share a dimension")
    if epsilon is None:
        epsilon = rng.random(current.dimension) if cfg.per_coordinate_epsilon else rng.random()
    x = current.position
    return current.moved_to(clamp(x + epsilon * (peer_j.position - peer_k.position), cfg.objective.bounds))


def step_generation(pop: Population, cfg: FpaConfig, rng: np.random.Generator, objective=None) -> int:
    """Advance ``pop`` in place by one generation; return the number of global moves."""
    objective = cfg.objective if objective is None else objective
    draws = draw_generation(rng, cfg)
    best = pop.best
    global_moves = 0
    for i in range(len(pop)):
        current = pop.members[i]
        if draws.switch[i] < cfg.switch_probability:
            global_moves += 1
            candidate = global_pollination(current, best, cfg, step=draws.steps[i])
        else:
            j, k = draws.peer_j[i], draws.peer_k[i]
            candidate = local_pollination(
                current, pop.members[j], pop.members[k], cfg, epsilon=draws.epsilon[i]
            )
        # strict: ties keep the incumbent
        if candidate.evaluate(objective) < current.fitness:
            pop.members[i] = candidate
    pop.refresh_best()
    return global_moves


def reference_run(cfg: FpaConfig, algorithm: str = "original") -> RunResult:
    """Member-by-member run; slow, kept as the readable oracle for :func:`run_many`."""
    rng = make_rng(cfg.seed, cfg.stream)
    objective = CountingObjective(cfg.objective)
    pop = initialize_population(cfg, rng, objective)
    trace = np.empty(cfg.max_generations)
    global_moves = 0
    for t in range(cfg.max_generations):
        global_moves += step_generation(pop, cfg, rng, objective)
        trace[t] = pop.best.fitness
    return RunResult(
        best_fitness=float(pop.best.fitness),
        best_position=pop.best.position.copy(),
        fitness_trace=trace,
        evaluations_used=objective.calls,
        global_moves=global_moves,
        config=cfg.echo(),
        algorithm=algorithm,
    )


# -- vectorized path ----------------------------------------------------------


def run_many(cfg: FpaConfig, streams: Sequence[Optional[int]], algorithm: str = "original") -> list:
    """Run one independent search per stream index, vectorized across runs.

    Each run reads only its own generator, so a run's result does not depend
    on which other streams share the batch.
    """
    streams = list(streams)
    if not streams:
        return []
    rngs = [make_rng(cfg.seed, s) for s in streams]
    r, n = len(rngs), cfg.swarm_size
    bounds = cfg.objective.bounds
    objective = CountingObjective(cfg.objective)
    rows = np.arange(r)
    p, gamma = cfg.switch_probability, cfg.global_step_scale

    pos = np.stack([_initial_positions(rng, cfg) for rng in rngs])
    fit = np.stack([objective(pos[a]) for a in range(r)])
    best_idx = np.argmin(fit, axis=1)
    best = pos[rows, best_idx].copy()
    trace = np.empty((r, cfg.max_generations))
    global_moves = np.zeros(r, dtype=np.int64)

    for t in range(cfg.max_generations):
        draws = [draw_generation(rng, cfg) for rng in rngs]
        take_global = np.stack([dr.switch for dr in draws]) < p
        eps = np.stack([dr.epsilon for dr in draws])
        if not cfg.per_coordinate_epsilon:
            eps = eps[:, :, None]
        pj = np.stack([dr.peer_j for dr in draws])
        pk = np.stack([dr.peer_k for dr in draws])
        steps = np.stack([dr.steps for dr in draws])
        global_moves += take_global.sum(axis=1)

        for i in range(n):
            x = pos[:, i]
            direction = x - best if cfg.eq1_sign else best - x
            cand = np.where(
                take_global[:, i, None],
                x + gamma * steps[:, i] * direction,
                x + eps[:, i] * (pos[rows, pj[:, i]] - pos[rows, pk[:, i]]),
            )
            cand = clamp(cand, bounds)
            cand_fit = objective(cand)
            better = cand_fit < fit[:, i]
            pos[better, i] = cand[better]
            fit[better, i] = cand_fit[better]

        best_idx = np.argmin(fit, axis=1)
        best = pos[rows, best_idx].copy()
        trace[:, t] = fit[rows, best_idx]

    evaluations = objective.calls // r
    echo = cfg.echo()
    return [
        RunResult(
            best_fitness=float(trace[a, -1]),
            best_position=best[a].copy(),
            fitness_trace=trace[a].copy(),
            evaluations_used=evaluations,
            global_moves=int(global_moves[a]),
            config={**echo, "stream": s},
            algorithm=algorithm,
        )
        for a, s in enumerate(streams)
    ]


def run(cfg: FpaConfig, algorithm: str = "original") -> RunResult:
    return run_many(cfg, [cfg.stream], algorithm)[0]


def run_improved(
    cfg: FpaConfig, schedule: SwitchProbabilitySchedule = DEFAULT_SCHEDULE
) -> RunResult:
    """Run with ``p`` taken from ``schedule`` at the objective's dimension.

    ``cfg.switch_probability`` is ignored.
    """
    p = switch_probability_for(cfg.dimension, schedule)
    result = run(replace(cfg, switch_probability=p), algorithm="proposed")
    result.config["schedule"] = str(schedule)
    return result
