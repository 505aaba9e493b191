"""Relaxation schemes: Gauss-Seidel, Kaczmarz and directional Gauss-Seidel.

All sweeps update ``x`` in place and also return it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError
from .operators import BandedOperator


def _check(A: BandedOperator, f, x):
    if x.dtype != complex or not x.flags.c_contiguous:
        raise TypeError("x must be a contiguous complex array (relaxation is in place)")
    if f.shape[0] != A.n or x.shape[0] != A.n:
        raise DimensionError(f"sizes {f.shape[0]}, {x.shape[0]} do not match operator of size {A.n}")
    return np.ascontiguousarray(f, dtype=complex)


def gauss_seidel_sweep(A: BandedOperator, f, x, order: str = "forward"):
    """Lexicographic Gauss-Seidel; ``order`` is ``"forward"`` or ``"backward"``."""
    if order not in ("forward", "backward"):
        raise ValueError(f"unknown sweep order {order!r}")
    f = _check(A, f, x)
    kernels.gs_sweep(A.data, A.w, f, x, order == "backward")
    return x


def kaczmarz_sweep(A: BandedOperator, f, x):
    """Sequential row projections ``x += conj(a_i) (f_i - a_i x) / |a_i|^2``."""
    f = _check(A, f, x)
    kernels.kaczmarz_sweep(A.data, A.w, f, x, False)
    return x


def directional_gs(A: BandedOperator, f, x, direction: str):
    """Gauss-Seidel marching along the propagation direction.

    ``"positive"`` visits nodes in ascending order, ``"negative"`` descending.
    """
    if direction == "positive":
        return gauss_seidel_sweep(A, f, x, "forward")
    if direction == "negative":
        return gauss_seidel_sweep(A, f, x, "backward")
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class RelaxScheme:
    """A relaxation method with its per-application sweep count."""

    kind: str  # "gauss_seidel" or "kaczmarz"
    sweeps: int = 1
    order: str = "forward"

    def __post_init__(self):
        if self.kind not in ("gauss_seidel", "kaczmarz"):
            raise ValueError(f"unknown relaxation {self.kind!r}")
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")

    @classmethod
    def gauss_seidel(cls, sweeps: int = 1, order: str = "forward") -> RelaxScheme:
        return cls("gauss_seidel", sweeps, order)

    @classmethod
    def kaczmarz(cls, sweeps: int = 2) -> RelaxScheme:
        return cls("kaczmarz", sweeps)

    def apply(self, A: BandedOperator, f, x):
        for _ in range(self.sweeps):
            if self.kind == "kaczmarz":
                kaczmarz_sweep(A, f, x)
            else:
                gauss_seidel_sweep(A, f, x, self.order)
        return x
