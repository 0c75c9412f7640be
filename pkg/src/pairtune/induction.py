"""Turning ordered pairs of settings into labeled training vectors.

A pair ``(x1, x2)`` of normalized settings becomes one ``d``-dimensional vector:
on every axis the two coordinates are quantized to ``BITS``-bit codes and their
bits interleaved (z-order), first argument leading. The resulting ``2 * BITS``
bit code is scaled into ``[0, 1)``. With ``BITS = 26`` the code fits a float64
significand, so the map is lossless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionError, RulesFormatError
from .sampling import lhs
from .space import ConfigSpace, snap

BITS = 26

INCREASING = "increasing-improves"
DECREASING = "decreasing-improves"

_SPREAD_MASKS = (
    (16, 0x0000FFFF0000FFFF),
    (8, 0x00FF00FF00FF00FF),
    (4, 0x0F0F0F0F0F0F0F0F),
    (2, 0x3333333333333333),
    (1, 0x5555555555555555),
)


def quantize(v, bits: int = BITS):
    """Map values in ``[0, 1]`` to integer codes ``floor(v * (2**bits - 1))``."""
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
        raise ValueError("quantize expects values in [0, 1]")
    codes = np.floor(v * float((1 << bits) - 1)).astype(np.uint64)
    return codes if codes.ndim else int(codes)


def _spread(x: np.ndarray) -> np.ndarray:
    # move bit k of a 32-bit value to bit 2k
    x = x & np.uint64(0xFFFFFFFF)
    for shift, mask in _SPREAD_MASKS:
        x = (x | (x << np.uint64(shift))) & np.uint64(mask)
    return x


def _compact(z: np.ndarray) -> np.ndarray:
    # gather even bits back into the low 32 bits
    z = z & np.uint64(0x5555555555555555)
    z = (z ^ (z >> np.uint64(1))) & np.uint64(0x3333333333333333)
    z = (z ^ (z >> np.uint64(2))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    z = (z ^ (z >> np.uint64(4))) & np.uint64(0x00FF00FF00FF00FF)
    z = (z ^ (z >> np.uint64(8))) & np.uint64(0x0000FFFF0000FFFF)
    z = (z ^ (z >> np.uint64(16))) & np.uint64(0x00000000FFFFFFFF)
    return z


def interleave(a, b):
    """Interleave the bits of two codes of at most 32 bits, ``a`` leading.

    Reading the result from its most significant end, bits come in pairs
    ``(a_k, b_k)``. Works elementwise on arrays.
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    z = (_spread(a) << np.uint64(1)) | _spread(b)
    return int(z) if scalar else z


def deinterleave(z):
    """Inverse of :func:`interleave`; returns the pair ``(a, b)``."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=np.uint64)
    a = _compact(z >> np.uint64(1))
    b = _compact(z)
    if scalar:
        return int(a), int(b)
    return a, b


def induce_pair(x1, x2, bits: int = BITS) -> np.ndarray:
    """Induced vector of the ordered pair ``(x1, x2)``.

    Accepts single settings of shape ``(d,)`` or stacks of shape ``(n, d)``;
    a single setting broadcasts against a stack. Each coordinate is the
    z-code of the two quantized values divided by ``2**(2 * bits)``.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape[-1] != x2.shape[-1]:
        raise DimensionError(f"pair dimensions differ: {x1.shape[-1]} vs {x2.shape[-1]}")
    if not 1 <= bits <= BITS:
        raise ValueError(f"bits must lie in [1, {BITS}]")
    z = interleave(quantize(x1, bits), quantize(x2, bits))
    return np.asarray(z, dtype=np.float64) / float(1 << (2 * bits))


def is_self_pair(v, bits: int = BITS) -> np.ndarray:
    """True for induced vectors whose two settings decode to the same codes.

    A setting never strictly beats itself, so such vectors always carry
    label 0. Vectors that are not exact z-codes are never self pairs.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    z = v * float(1 << (2 * bits))
    exact = (z == np.floor(z)) & (z >= 0) & (z < float(1 << (2 * bits)))
    a, b = deinterleave(np.where(exact, z, 0.0).astype(np.uint64))
    return np.all(exact & (a == b), axis=1)


@dataclass
class PairSet:
    """Induced training vectors and their comparison labels."""

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.inputs.ndim != 2 or self.inputs.shape[0] != self.labels.shape[0]:
            raise ValueError("inputs must be (n, d) with one label per row")

    def __len__(self):
        return self.labels.shape[0]

    def __add__(self, other: "PairSet") -> "PairSet":
        return PairSet(np.vstack([self.inputs, other.inputs]),
                       np.concatenate([self.labels, other.labels]))


def ordered_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays of all ordered pairs ``(i, j)``, ``i != j``, sorted by ``(i, j)``."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = i != j
    return i[keep], j[keep]


def build_training_set(settings, performance, encode=induce_pair) -> PairSet:
    """All ``n (n - 1)`` ordered pairs of the samples with their labels.

    Label of ``(i, j)`` is 1 when sample ``i`` performs strictly better than
    sample ``j``, else 0; tied performances give two 0 labels.

    :param settings: normalized settings, shape ``(n, d)``.
    :param performance: scores to maximize, shape ``(n,)``.
    :param encode: pair encoder; swapped out only by comparison experiments.
    """
    settings = np.asarray(settings, dtype=float)
    performance = np.asarray(performance, dtype=float)
    if settings.ndim != 2 or settings.shape[0] != performance.shape[0]:
        raise DimensionError("need one performance value per setting")
    n = settings.shape[0]
    if n < 2:
        raise ValueError("building comparison pairs needs at least 2 samples")
    i, j = ordered_pairs(n)
    labels = (performance[i] > performance[j]).astype(np.int8)
    return PairSet(encode(settings[i], settings[j]), labels)


@dataclass(frozen=True)
class ExperienceRule:
    param: str
    direction: str

    def __post_init__(self):
        if self.direction not in (INCREASING, DECREASING):
            raise RulesFormatError(f"unknown rule direction {self.direction!r}")


def parse_rules(text: str) -> list[ExperienceRule]:
    """Parse ``<param> <increasing-improves|decreasing-improves>`` lines."""
    rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise RulesFormatError(f"line {lineno}: expected '<param> <direction>'")
        rules.append(ExperienceRule(parts[0], parts[1]))
    return rules


def load_rules(path, space: ConfigSpace | None = None) -> list[ExperienceRule]:
    rules = parse_rules(Path(path).read_text(encoding="utf-8"))
    if space is not None:
        check_rules(rules, space)
    return rules


def check_rules(rules: Sequence[ExperienceRule], space: ConfigSpace) -> None:
    for rule in rules:
        if rule.param not in space:
            raise RulesFormatError(f"rule names unknown parameter {rule.param!r}")


def generate_from_rules(rules: Sequence[ExperienceRule], count: int, space: ConfigSpace,
                        seed: int, encode=induce_pair) -> PairSet:
    """Labeled pairs synthesized from monotone experience rules.

    Base settings come from Latin hypercube batches over the whole cube. For
    each base point and rule, the rule's coordinate is moved by a uniform
    step in ``(0, 0.5]`` in the improving direction (or the base point is
    moved the other way when the step would leave the cube). Both orderings
    are emitted: improved-first labeled 1, base-first labeled 0. Pairs that
    collapse after snapping to the space's grid are skipped.
    """
    if not rules:
        raise ValueError("generate_from_rules needs at least one rule")
    if count < 1:
        raise ValueError("count must be positive")
    check_rules(rules, space)
    d = space.dimension
    rng = np.random.default_rng(seed)
    better, worse = [], []
    per_batch = max(1, math.ceil(count / (2 * len(rules))))
    batch = 0
    while 2 * len(better) < count:
        if batch > 1000:
            raise ValueError("rules cannot produce distinct pairs in this space")
        base = lhs(d, per_batch, int(rng.integers(0, 2**63)))
        batch += 1
        for point in base:
            for rule in rules:
                axis = space.index(rule.param)
                step = 0.5 * (1.0 - rng.random())
                lo, hi = point.copy(), point.copy()
                if point[axis] + step <= 1.0:
                    hi[axis] = point[axis] + step
                else:
                    lo[axis] = point[axis] - step
                lo, hi = snap(space, lo), snap(space, hi)
                if lo[axis] == hi[axis]:
                    continue
                if rule.direction == INCREASING:
                    better.append(hi), worse.append(lo)
                else:
                    better.append(lo), worse.append(hi)
    better = np.array(better)
    worse = np.array(worse)
    # interleave orderings so trimming keeps both labels balanced
    firsts = np.empty((2 * len(better), d))
    seconds = np.empty_like(firsts)
    firsts[0::2], seconds[0::2] = better, worse
    firsts[1::2], seconds[1::2] = worse, better
    labels = np.tile(np.array([1, 0], dtype=np.int8), len(better))
    return PairSet(encode(firsts[:count], seconds[:count]), labels[:count])
