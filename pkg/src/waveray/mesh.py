"""Uniform 1D grids and wave-number fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidGridError


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on ``[a, b]`` with ``n`` nodes ``x_i = a + i*h``."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise InvalidGridError(f"a grid needs at least 3 nodes, got {self.n}")
        if not self.b > self.a:
            raise InvalidGridError(f"empty interval [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n)

    @property
    def can_coarsen(self) -> bool:
        return (self.n - 1) % 2 == 0 and (self.n - 1) // 2 + 1 >= 3

    def coarsen(self) -> Grid1D:
        """The 2:1 coarsening; every other node is kept."""
        if (self.n - 1) % 2:
            raise InvalidGridError(f"grid with {self.n} nodes cannot be coarsened 2:1")
        return Grid1D(self.a, self.b, (self.n - 1) // 2 + 1)

    def refine(self) -> Grid1D:
        return Grid1D(self.a, self.b, 2 * (self.n - 1) + 1)

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        """Index of the node at ``x``; raises if ``x`` is not a node."""
        t = (x - self.a) / self.h
        i = int(round(t))
        if abs(t - i) > tol or not 0 <= i < self.n:
            raise InvalidGridError(f"x = {x} is not a node of {self}")
        return i

    @classmethod
    def dyadic(cls, levels: int, a: float = 0.0, b: float = 1.0) -> Grid1D:
        """Grid with ``2**levels`` intervals."""
        return cls(a, b, 2**levels + 1)


class WaveNumberField:
    """Base class for the coefficient ``k(x) > 0``."""

    def __call__(self, x):
        raise NotImplementedError

    def k_min(self, a: float, b: float) -> float:
        raise NotImplementedError

    def k_max(self, a: float, b: float) -> float:
        raise NotImplementedError

    def carrier(self) -> float:
        """Wave number of the exponential basis functions for this field."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantK(WaveNumberField):
    k: float

    def __post_init__(self):
        if not self.k >= 0:
            raise ConfigurationError(f"wave number must be non-negative, got {self.k}")

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.k)

    def k_min(self, a, b):
        return float(self.k)

    def k_max(self, a, b):
        return float(self.k)

    def carrier(self):
        return float(self.k)


@dataclass(frozen=True)
class CosineK(WaveNumberField):
    """``k(x) = k0 * sqrt(1 + alpha * cos(beta * x))`` with ``|alpha| < 1``."""

    k0: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.k0 > 0:
            raise ConfigurationError(f"k0 must be positive, got {self.k0}")
        if not abs(self.alpha) < 1:
            raise ConfigurationError(f"|alpha| must be < 1, got {self.alpha}")

    def modulation(self, x):
        return self.alpha * np.cos(self.beta * np.asarray(x, dtype=float))

    def __call__(self, x):
        return self.k0 * np.sqrt(1.0 + self.modulation(x))

    def _cos_range(self, a, b):
        # exact range of cos(beta*x) over [a, b]
        lo, hi = sorted((self.beta * a, self.beta * b))
        ends = (math.cos(lo), math.cos(hi))
        cmax = 1.0 if math.floor(hi / (2 * math.pi)) * 2 * math.pi >= lo else max(ends)
        cmin = -1.0 if math.floor((hi - math.pi) / (2 * math.pi)) * 2 * math.pi + math.pi >= lo else min(ends)
        return cmin, cmax

    def k_min(self, a, b):
        cmin, cmax = self._cos_range(a, b)
        m = self.alpha * (cmin if self.alpha >= 0 else cmax)
        return self.k0 * math.sqrt(1.0 + m)

    def k_max(self, a, b):
        cmin, cmax = self._cos_range(a, b)
        m = self.alpha * (cmax if self.alpha >= 0 else cmin)
        return self.k0 * math.sqrt(1.0 + m)

    def carrier(self):
        return float(self.k0)


@dataclass(frozen=True)
class PiecewiseConstantK(WaveNumberField):
    """``k1`` for ``x <= xbar`` and ``k2`` beyond, with ``k1 >= k2 > 0``."""

    k1: float
    k2: float
    xbar: float

    def __post_init__(self):
        if not self.k1 >= self.k2 > 0:
            raise ConfigurationError(f"need k1 >= k2 > 0, got k1={self.k1}, k2={self.k2}")

    @property
    def gamma(self) -> float:
        return self.k2 / self.k1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.xbar, self.k1, self.k2).astype(float)

    def k_min(self, a, b):
        return float(self.k2) if b > self.xbar else float(self.k1)

    def k_max(self, a, b):
        return float(self.k1) if a <= self.xbar else float(self.k2)

    def carrier(self):
        return float(self.k1)
