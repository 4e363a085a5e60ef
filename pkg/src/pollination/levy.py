"""Heavy-tailed step vectors for global pollination (Mantegna's algorithm).

Each coordinate is ``u / |v| ** (1 / lam)`` with ``u ~ N(0, sigma_u**2)``
and ``v ~ N(0, 1)``. For large ``|s|`` the density falls off as
``|s| ** -(1 + lam)``, so the survival function has log-log slope ``-lam``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass

import numpy as np

from .core import ConfigError

__all__ = ["LevyConfig", "mantegna_sigma", "levy_step", "TINY_DENOMINATOR"]

# |v| below this is redrawn so the ratio stays finite
TINY_DENOMINATOR = 1e-300


def _check_exponent(lam: float) -> None:
    if not (0.0 < lam <= 2.0) or not math.isfinite(lam):
        raise ConfigError(f"levy exponent lambda must satisfy 0 < lambda <= 2, got {lam}")


@lru_cache(maxsize=None)
def mantegna_sigma(lam: float) -> float:
    """Scale of the numerator normal variate in Mantegna's construction."""
    _check_exponent(lam)
    num = math.gamma(1.0 + lam) * math.sin(math.pi * lam / 2.0)
    den = math.gamma((1.0 + lam) / 2.0) * lam * 2.0 ** ((lam - 1.0) / 2.0)
    return (num / den) ** (1.0 / lam)


@dataclass(frozen=True)
class LevyConfig:
    exponent: float = 1.5
    dimension: int = 1

    def __post_init__(self):
        _check_exponent(self.exponent)
        if self.dimension < 1:
            raise ConfigError(f"levy dimension must be >= 1, got {self.dimension}")

    @property
    def sigma(self) -> float:
        return mantegna_sigma(self.exponent)


def levy_step(rng: np.random.Generator, cfg: LevyConfig, size=None) -> np.ndarray:
    """Draw one step vector of length ``cfg.dimension``, or ``size`` of them.

    The numerator block is drawn first, then the denominator block; any
    denominator with ``|v| < TINY_DENOMINATOR`` is redrawn from the same
    stream, in index order, until none remain.
    """
    shape = (cfg.dimension,) if size is None else (size, cfg.dimension)
    u = cfg.sigma * rng.standard_normal(shape)
    v = np.abs(rng.standard_normal(shape))
    tiny = v < TINY_DENOMINATOR
    while tiny.any():
        v[tiny] = np.abs(rng.standard_normal(int(tiny.sum())))
        tiny = v < TINY_DENOMINATOR
    return u / v ** (1.0 / cfg.exponent)
