"""Benchmark objectives and their registry.

All evaluators accept a single point of shape ``(d,)`` or a batch of shape
``(m, d)`` and reduce over the last axis. Coordinate indices inside the
formulas (Griewank's ``sqrt(i)``, Zakharov's ``0.5 * i``) are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .core import Bounds, DimensionError, UnknownFunctionError

__all__ = [
    "BenchmarkFunction",
    "FUNCTION_NAMES",
    "griewank",
    "himmelblau_literal",
    "himmelblau_variant",
    "registry_lookup",
    "rosenbrock",
    "sphere",
    "step_fn",
    "zakharov",
]


def _as_points(x, min_dim: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] < min_dim:
        got = 0 if x.ndim == 0 else x.shape[-1]
        raise DimensionError(f"objective needs at least {min_dim} coordinate(s), got {got}")
    return x


def _result(value):
    return float(value) if np.ndim(value) == 0 else value


def sphere(x):
    x = _as_points(x)
    return _result(np.sum(x * x, axis=-1))


def griewank(x):
    x = _as_points(x)
    root_i = np.sqrt(np.arange(1, x.shape[-1] + 1, dtype=float))
    return _result(1.0 + np.sum(x * x, axis=-1) / 4000.0 - np.prod(np.cos(x / root_i), axis=-1))


def step_fn(x):
    x = _as_points(x)
    return _result(np.sum(np.floor(x + 0.5) ** 2, axis=-1))


def rosenbrock(x):
    x = _as_points(x, min_dim=2)
    head, tail = x[..., :-1], x[..., 1:]
    return _result(np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2, axis=-1))


def zakharov(x):
    x = _as_points(x)
    half_i = 0.5 * np.arange(1, x.shape[-1] + 1, dtype=float)
    s = np.sum(half_i * x, axis=-1)
    return _result(np.sum(x * x, axis=-1) + s**2 + s**4)


def _quartic_mean(x, weight):
    # Terms reach ~600 in magnitude with both signs, so sums near zero lose
    # relative accuracy in double precision; accumulate in extended precision
    # (80-bit on x86-64) and round once. Where longdouble is plain double this
    # degrades gracefully to ordinary float64 accuracy.
    xl = x.astype(np.longdouble)
    x2 = xl * xl
    total = np.sum(weight * x2 * x2 - 16 * x2 + 5 * xl, axis=-1) / x.shape[-1]
    return _result(np.asarray(total, dtype=float))


def himmelblau_variant(x):
    """Mean over coordinates of ``t**4 - 16 t**2 + 5 t``."""
    return _quartic_mean(_as_points(x), 1)


def himmelblau_literal(x):
    """The form with an index weight on the quartic term: mean of ``i t**4 - 16 t**2 + 5 t``.

    Opt-in only; the weight makes each coordinate's minimum depend on ``i``.
    """
    x = _as_points(x)
    return _quartic_mean(x, np.arange(1, x.shape[-1] + 1, dtype=np.longdouble))


@lru_cache(maxsize=None)
def _quartic_minimizer(weight: float, lower: float, upper: float) -> tuple:
    """Global minimizer of ``weight t**4 - 16 t**2 + 5 t`` on ``[lower, upper]``."""

    def g(t):
        return weight * t**4 - 16.0 * t**2 + 5.0 * t

    # the quartic has two wells, one on each side of zero
    candidates = []
    for lo, hi in ((lower, 0.0), (0.0, upper)):
        res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        candidates.append((float(res.fun), float(res.x)))
    value, t = min(candidates)
    return t, value


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    number: int
    display_name: str
    evaluator: Callable
    bounds: Bounds
    dimension: int
    modality: str
    known_minimum_value: Optional[float]
    known_minimizer: Optional[np.ndarray]
    literal_form: bool = False

    def __call__(self, x):
        return self.evaluator(x)


# name -> (number, display name, evaluator, bounds, modality, min dimension)
_TABLE = {
    "himmelblau": (1, "Himmelblau", himmelblau_variant, (-5.0, 5.0), "multimodal", 1),
    "griewank": (2, "Griewank", griewank, (-600.0, 600.0), "multimodal", 1),
    "step": (3, "Step", step_fn, (-100.0, 100.0), "multimodal", 1),
    "sphere": (4, "Sphere", sphere, (-5.12, 5.12), "unimodal", 1),
    "rosenbrock": (5, "Rosenbrock", rosenbrock, (-15.0, 15.0), "unimodal", 2),
    "zakharov": (6, "Zakharov", zakharov, (-5.0, 10.0), "unimodal", 1),
}

FUNCTION_NAMES = tuple(_TABLE)


def _known_optimum(name: str, dimension: int, bounds: Bounds, literal: bool):
    if name == "rosenbrock":
        return 0.0, np.ones(dimension)
    if name != "himmelblau":
        return 0.0, np.zeros(dimension)
    if not literal:
        t, _ = _quartic_minimizer(1.0, bounds.lower, bounds.upper)
        minimizer = np.full(dimension, t)
        return himmelblau_variant(minimizer), minimizer
    minimizer = np.array(
        [_quartic_minimizer(float(i), bounds.lower, bounds.upper)[0] for i in range(1, dimension + 1)]
    )
    return himmelblau_literal(minimizer), minimizer


def registry_lookup(name: str, dimension: int, literal_himmelblau: bool = False) -> BenchmarkFunction:
    """Build the named benchmark at ``dimension``.

    Raises :class:`UnknownFunctionError` for unregistered names and
    :class:`DimensionError` for a dimension the function cannot take.
    """
    if name not in _TABLE:
        raise UnknownFunctionError(
            f"unknown function {name!r}; valid names: {', '.join(FUNCTION_NAMES)}"
        )
    number, display, evaluator, (lo, hi), modality, min_dim = _TABLE[name]
    if isinstance(dimension, bool) or int(dimension) != dimension or dimension < min_dim:
        raise DimensionError(f"{name} needs dimension >= {min_dim}, got {dimension}")
    dimension = int(dimension)
    if name == "himmelblau" and literal_himmelblau:
        evaluator = himmelblau_literal
        display = "Himmelblau (literal)"
    bounds = Bounds(lo, hi)
    value, minimizer = _known_optimum(name, dimension, bounds, literal_himmelblau)
    return BenchmarkFunction(
        name=name,
        number=number,
        display_name=display,
        evaluator=evaluator,
        bounds=bounds,
        dimension=dimension,
        modality=modality,
        known_minimum_value=float(value),
        known_minimizer=minimizer,
        literal_form=name == "himmelblau" and literal_himmelblau,
    )


def describe_registry() -> list:
    rows = []
    for name, (number, display, _, (lo, hi), modality, min_dim) in _TABLE.items():
        rows.append(
            {
                "name": name,
                "number": number,
                "display_name": display,
                "bounds": [lo, hi],
                "modality": modality,
                "min_dimension": min_dim,
            }
        )
    return rows

