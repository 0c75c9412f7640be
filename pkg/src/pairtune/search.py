"""Locating promising subspaces from classifier-predicted winners.

The pool of candidates is compared against the pivot; the predicted winners
are clustered (elbow-selected ``k``, k-means++ seeded Lloyd iterations) and
each cluster center gets a box bounded by the nearest evaluated coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import ComparisonClassifier
from .induction import induce_pair
from .sampling import Box, lhs

DEFAULT_POOL_FACTOR = 1000
MIN_POOL_FACTOR = 100
WIDEN = 0.01
# knee distance to the chord (scaled axes) below which a curve counts as elbow-free
MIN_KNEE = 0.4


def pool_size(d: int, pool_factor: int = DEFAULT_POOL_FACTOR) -> int:
    """Smallest pool strictly larger than ``pool_factor * d``."""
    return pool_factor * d + 1


def generate_pool(d: int, n: int | None = None, seed: int = 0,
                  pool_factor: int = DEFAULT_POOL_FACTOR) -> np.ndarray:
    """Latin hypercube candidate pool of shape ``(n, d)``.

    :param n: pool size; defaults to ``pool_factor * d + 1``.
    :raises ValueError: if ``n < 100 * d``.
    """
    if n is None:
        n = pool_size(d, pool_factor)
    if n < MIN_POOL_FACTOR * d:
        raise ValueError(f"pool of {n} points is below the floor of {MIN_POOL_FACTOR * d}")
    return lhs(d, n, seed)


def find_winners(clf: ComparisonClassifier, pool, pivot, batch: int = 65536) -> np.ndarray:
    """Pool points predicted to beat ``pivot``, in pool order."""
    pool = np.asarray(pool, dtype=float)
    keep = np.zeros(pool.shape[0], dtype=bool)
    for start in range(0, pool.shape[0], batch):
        chunk = pool[start:start + batch]
        keep[start:start + batch] = clf.predict(induce_pair(chunk, pivot)) == 1
    return pool[keep]


@dataclass
class ClusterModel:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    history: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _sq_dists(points, centers):
    return ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)


def _plusplus(points, k, rng):
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # all remaining mass sits on chosen points; take any unchosen index
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        closest = np.minimum(closest, ((points - points[nxt]) ** 2).sum(axis=1))
    return points[chosen].copy()


def kmeans(points, k: int, seed: int = 0, tol: float = 1e-6, max_iter: int = 300) -> ClusterModel:
    """k-means++ seeding followed by Lloyd iterations.

    Stops once no center moves more than ``tol`` or after ``max_iter``
    iterations. A center whose cluster empties keeps its position.
    ``history`` records the within-cluster sum of squares after every
    assignment step.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must lie in [1, {n}]")
    rng = np.random.default_rng(seed)
    centers = _plusplus(points, k, rng)
    history = []
    for _ in range(max_iter):
        dist = _sq_dists(points, centers)
        labels = np.argmin(dist, axis=1)
        history.append(float(dist[np.arange(n), labels].sum()))
        moved = centers.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                moved[c] = points[members].mean(axis=0)
        shift = np.sqrt(((moved - centers) ** 2).sum(axis=1)).max()
        centers = moved
        if shift < tol:
            break
    dist = _sq_dists(points, centers)
    labels = np.argmin(dist, axis=1)
    inertia = float(dist[np.arange(n), labels].sum())
    history.append(inertia)
    return ClusterModel(centers, labels, inertia, history)


def wcss_curve(points, k_max: int = 10, seed: int = 0) -> np.ndarray:
    """Within-cluster sum of squares for ``k = 1 .. min(k_max, n)``."""
    points = np.asarray(points, dtype=float)
    top = min(k_max, points.shape[0])
    return np.array([kmeans(points, k, seed).inertia for k in range(1, top + 1)])


def elbow(curve, min_drop: float = MIN_KNEE) -> int:
    """Knee of a decreasing curve by maximum distance to its end-to-end chord.

    Both axes are scaled to ``[0, 1]`` first. Returns a 1-based ``k``; ties
    go to the smaller ``k``. If the best knee lies closer to the chord than
    ``min_drop`` (scaled units), the curve has no elbow and 1 is returned.
    """
    curve = np.asarray(curve, dtype=float)
    top = curve.shape[0]
    if top < 3 or curve[0] <= 0.0:
        return 1
    x = np.arange(top) / (top - 1)
    y = (curve - curve[-1]) / (curve[0] - curve[-1]) if curve[0] > curve[-1] else np.zeros(top)
    # chord from (0, 1) to (1, 0): distance is (1 - x - y) / sqrt(2)
    dist = (1.0 - x - y) / np.sqrt(2.0)
    best = int(np.argmax(dist))
    # rounding leaves straight curves a hair off the chord
    if dist[best] <= max(min_drop, 1e-9):
        return 1
    return best + 1


def best_cluster_num(winners, k_max: int = 10, seed: int = 0,
                     min_drop: float = MIN_KNEE) -> tuple[int, bool]:
    """Elbow-selected cluster count for the winners.

    :return: ``(k, degenerate)`` where ``degenerate`` flags fewer than two
        winners (``k`` is then 1).
    """
    winners = np.asarray(winners, dtype=float)
    if winners.shape[0] < 2:
        return 1, True
    if np.all(winners == winners[0]):
        return 1, False
    return elbow(wcss_curve(winners, k_max, seed), min_drop), False


@dataclass
class PromisingSubspace:
    center: np.ndarray
    box: Box
    size: int = 0

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "lower": self.box.lower.tolist(),
            "upper": self.box.upper.tolist(),
            "winners": self.size,
        }


def bound_subspace(center, evaluated, domain: Box | None = None,
                   widen: float = WIDEN) -> PromisingSubspace:
    """Box around ``center`` bounded per axis by the nearest evaluated values.

    On each axis the lower edge is the largest evaluated coordinate not above
    the center and the upper edge the smallest not below it; the domain edge
    is used when there is none. A zero-width axis is widened by ``widen`` on
    both sides and clamped to the domain.
    """
    center = np.asarray(center, dtype=float)
    evaluated = np.atleast_2d(np.asarray(evaluated, dtype=float))
    d = center.shape[0]
    domain = domain or Box.unit(d)
    lower = domain.lower.copy()
    upper = domain.upper.copy()
    if evaluated.size:
        below = np.where(evaluated <= center, evaluated, -np.inf).max(axis=0)
        above = np.where(evaluated >= center, evaluated, np.inf).min(axis=0)
        lower = np.where(np.isfinite(below), below, lower)
        upper = np.where(np.isfinite(above), above, upper)
    flat = lower == upper
    lower = np.where(flat, np.maximum(lower - widen, domain.lower), lower)
    upper = np.where(flat, np.minimum(upper + widen, domain.upper), upper)
    return PromisingSubspace(center.copy(), Box(lower, upper))
