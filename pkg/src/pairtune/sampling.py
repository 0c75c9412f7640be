"""Seeded Latin hypercube sampling on the unit cube and on boxes inside it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BELOW_ONE = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower, upper]`` inside the unit cube."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("box bounds must be 1-d vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound")
        if np.any(lower < 0.0) or np.any(upper > 1.0):
            raise ValueError("box must lie inside the unit cube")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @classmethod
    def unit(cls, d: int) -> "Box":
        return cls(np.zeros(d), np.ones(d))

    def contains(self, point) -> bool:
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))

    def __eq__(self, other):
        if not isinstance(other, Box):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    __hash__ = None


def lhs(d: int, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` Latin hypercube points in ``[0, 1)^d``.

    Each dimension gets its own stratum permutation, drawn in dimension order
    from a single generator; the position inside a stratum is uniform.

    :param d: number of dimensions.
    :param n: number of points, also the number of strata per dimension.
    :param seed: any non-negative integer.
    :return: array of shape ``(n, d)``.
    """
    if d < 1 or n < 1:
        raise ValueError("lhs needs d >= 1 and n >= 1")
    rng = np.random.default_rng(seed)
    points = np.empty((n, d))
    for j in range(d):
        strata = rng.permutation(n)
        points[:, j] = (strata + rng.random(n)) / n
    return np.minimum(points, _BELOW_ONE)


def lhs_in_box(box: Box, n: int, seed: int) -> np.ndarray:
    """Latin hypercube points rescaled into ``box``.

    Zero-width dimensions yield the constant lower bound.
    """
    unit = lhs(box.dimension, n, seed)
    widths = box.widths
    points = box.lower + unit * widths
    # rounding in the affine map must not reach a non-degenerate upper edge
    top = np.where(widths > 0, np.nextafter(box.upper, box.lower), box.upper)
    return np.minimum(points, top)
