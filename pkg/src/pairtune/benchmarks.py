"""Closed-form synthetic performance surfaces on ``[0, 1]^d``.

They stand in for a system under tune in tests and desk-scale experiments.
All are maximized and deterministic. Each accepts one point of shape ``(d,)``
or a stack of shape ``(n, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _frac_sequence(d: int) -> np.ndarray:
    # low-discrepancy positions, fixed per dimension count
    return np.mod(np.arange(1, d + 1) * _GOLDEN, 1.0)


def _weights(d: int) -> np.ndarray:
    return 1.0 + np.arange(d) / max(d - 1, 1)


def monotone(x: np.ndarray) -> np.ndarray:
    """Weighted sum of concave saturating curves; strictly increasing per axis.

    Optimum at the all-ones corner. Diminishing returns imitate buffer or pool
    sizes whose benefit flattens out.
    """
    d = x.shape[-1]
    curve = np.log1p(20.0 * x) / np.log1p(20.0)
    return curve @ _weights(d) / d


CLIFF_AT = 0.8


def plateau_cliff(x: np.ndarray) -> np.ndarray:
    """Stepped plateaus in overall progress with a cliff on the first axis.

    Progress is the mean coordinate, quantized into 10 plateaus. Beyond
    ``x[0] = 0.8`` performance collapses by 0.8 (a resource limit overrun).
    """
    progress = np.floor(10.0 * np.mean(x, axis=-1)) / 10.0
    return 1.0 + progress - 0.8 * (x[..., 0] > CLIFF_AT)


BUMP_HEIGHTS = np.array([1.0, 0.8, 0.7, 0.6])


def bump_centers(d: int) -> np.ndarray:
    """Fixed bump positions, one row per bump, kept 0.15 away from the faces."""
    rows = np.arange(1, BUMP_HEIGHTS.size + 1)[:, None]
    cols = np.arange(1, d + 1)[None, :]
    return 0.15 + 0.7 * np.mod(rows * _GOLDEN + cols * np.sqrt(2.0), 1.0)


def multimodal(x: np.ndarray) -> np.ndarray:
    """Four Gaussian bumps of unequal height at fixed positions.

    Bump width grows with ``sqrt(d)`` so bumps stay distinguishable from a
    few dozen samples in any dimension.
    """
    d = x.shape[-1]
    centers = bump_centers(d)
    width = 2.0 * (0.1 * np.sqrt(d)) ** 2
    sq = np.sum((x[..., None, :] - centers) ** 2, axis=-1)
    return np.exp(-sq / width) @ BUMP_HEIGHTS


def workload_shift(x: np.ndarray) -> np.ndarray:
    """Smooth peak at an off-center optimum with a pairwise interaction term."""
    d = x.shape[-1]
    center = 0.7 - 0.4 * _frac_sequence(d)
    dist = np.sum((x - center) ** 2, axis=-1) / d
    interaction = 0.1 * np.sin(3.0 * np.pi * x[..., 0]) * x[..., -1]
    return np.exp(-6.0 * dist) + interaction


def _monotone_optimum(d):
    return np.ones(d)


def _cliff_optimum(d):
    point = np.ones(d)
    point[0] = CLIFF_AT
    return point


def _multimodal_optimum(d):
    # the tallest bump's center; neighbouring bump tails shift the true
    # maximizer slightly, so this is a reference point, not the argmax
    return bump_centers(d)[0]


@dataclass(frozen=True)
class SyntheticBenchmark:
    name: str
    dimension: int
    objective: Callable[[np.ndarray], np.ndarray]
    optimum_fn: Callable[[int], np.ndarray] | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(f"{self.name} expects {self.dimension} coordinates")
        value = self.objective(x)
        return float(value) if np.ndim(value) == 0 else value

    @property
    def optimum(self) -> np.ndarray | None:
        """A maximizer in normalized coordinates, if known in closed form."""
        return None if self.optimum_fn is None else self.optimum_fn(self.dimension)


_REGISTRY = {
    "monotone": (monotone, _monotone_optimum),
    "plateau-cliff": (plateau_cliff, _cliff_optimum),
    "multimodal": (multimodal, _multimodal_optimum),
    "workload-shift": (workload_shift, None),
}

NAMES = tuple(_REGISTRY)


def get_benchmark(name: str, d: int) -> SyntheticBenchmark:
    if name not in _REGISTRY:
        raise ValueError(f"unknown benchmark {name!r}; choose from {', '.join(NAMES)}")
    if d < 1:
        raise ValueError("benchmark dimension must be positive")
    objective, optimum = _REGISTRY[name]
    return SyntheticBenchmark(name, d, objective, optimum)
