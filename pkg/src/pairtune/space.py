"""Tunable parameter spaces and their mapping onto the unit hypercube.

Every parameter occupies one axis of ``[0, 1]^d``. Numeric parameters map
affinely; categorical parameters map level ``i`` of ``L`` onto ``i / (L - 1)``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .errors import DimensionError, InvalidSettingError, SpaceFormatError

CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"
KINDS = (CONTINUOUS, INTEGER, CATEGORICAL)

_PARAM_FIELDS = {"name", "kind", "min", "max", "levels", "default"}


@dataclass(frozen=True)
class Violation:
    name: str
    value: Any
    reason: str


def _is_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


@dataclass(frozen=True)
class ParamSpec:
    """One tunable parameter.

    :param name: identifier, unique within a space.
    :param kind: ``continuous``, ``integer`` or ``categorical``.
    :param min: lower bound for numeric kinds.
    :param max: upper bound for numeric kinds.
    :param levels: ordered values for the categorical kind.
    :param default: default value; falls back to ``min`` or the first level.
    """

    name: str
    kind: str = CONTINUOUS
    min: float | None = None
    max: float | None = None
    levels: tuple = ()
    default: Any = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.isidentifier():
            raise SpaceFormatError(f"parameter name {self.name!r} is not an identifier")
        if self.kind not in KINDS:
            raise SpaceFormatError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            object.__setattr__(self, "levels", tuple(self.levels))
            if self.min is not None or self.max is not None:
                raise SpaceFormatError(f"{self.name}: categorical parameters take levels, not min/max")
            if len(set(map(_level_key, self.levels))) != len(self.levels) or len(self.levels) < 2:
                raise SpaceFormatError(f"{self.name}: need at least 2 distinct levels")
            if self.default is None:
                object.__setattr__(self, "default", self.levels[0])
        else:
            if self.levels:
                raise SpaceFormatError(f"{self.name}: numeric parameters take min/max, not levels")
            if not (_is_number(self.min) and _is_number(self.max)):
                raise SpaceFormatError(f"{self.name}: min and max must be numbers")
            if self.kind == INTEGER:
                if not (float(self.min).is_integer() and float(self.max).is_integer()):
                    raise SpaceFormatError(f"{self.name}: integer bounds must be integral")
                object.__setattr__(self, "min", int(self.min))
                object.__setattr__(self, "max", int(self.max))
            else:
                object.__setattr__(self, "min", float(self.min))
                object.__setattr__(self, "max", float(self.max))
            if not self.min < self.max:
                raise SpaceFormatError(f"{self.name}: min must be below max")
            if self.default is None:
                object.__setattr__(self, "default", self.min)
        problem = self.check(self.default)
        if problem is not None:
            raise SpaceFormatError(f"{self.name}: default {self.default!r} {problem}")

    def check(self, value) -> str | None:
        """Return a reason string if ``value`` is not valid, else None."""
        if self.kind == CATEGORICAL:
            if _level_index(self.levels, value) is None:
                return "is not one of the levels"
            return None
        if not _is_number(value) or not math.isfinite(float(value)):
            return "is not a finite number"
        if self.kind == INTEGER and not float(value).is_integer():
            return "is not integral"
        if not self.min <= value <= self.max:
            return f"is outside [{self.min}, {self.max}]"
        return None

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind}
        if self.kind == CATEGORICAL:
            out["levels"] = list(self.levels)
        else:
            out["min"] = self.min
            out["max"] = self.max
        out["default"] = self.default
        return out


def _level_key(level):
    return (type(level).__name__, level)


def _level_index(levels, value):
    for i, level in enumerate(levels):
        # bool is an int subclass; keep True distinct from 1
        if type(level) is type(value) and level == value:
            return i
        if _is_number(level) and _is_number(value) and level == value:
            return i
    return None


@dataclass(frozen=True)
class ConfigSpace:
    params: tuple[ParamSpec, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise SpaceFormatError("a space needs at least one parameter")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise SpaceFormatError("parameter names must be unique")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def dimension(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name) -> bool:
        return name in self._index

    def default_setting(self) -> tuple:
        return tuple(p.default for p in self.params)

    def to_dict(self) -> dict:
        return {"params": [p.to_dict() for p in self.params]}

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form of the definition."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, doc) -> "ConfigSpace":
        if not isinstance(doc, dict):
            raise SpaceFormatError("space document must be a mapping")
        extra = set(doc) - {"params"}
        if extra:
            raise SpaceFormatError(f"unknown top-level fields: {sorted(extra)}")
        entries = doc.get("params")
        if not isinstance(entries, list):
            raise SpaceFormatError("space document needs a 'params' list")
        params = []
        for entry in entries:
            if not isinstance(entry, dict):
                raise SpaceFormatError("each parameter entry must be a mapping")
            unknown = set(entry) - _PARAM_FIELDS
            if unknown:
                raise SpaceFormatError(f"unknown parameter fields: {sorted(unknown)}")
            if "name" not in entry:
                raise SpaceFormatError("parameter entry without a name")
            params.append(ParamSpec(
                name=entry["name"],
                kind=entry.get("kind", CONTINUOUS),
                min=entry.get("min"),
                max=entry.get("max"),
                levels=tuple(entry.get("levels") or ()),
                default=entry.get("default"),
            ))
        return cls(tuple(params))

    @classmethod
    def unit(cls, d: int, prefix: str = "x") -> "ConfigSpace":
        """A space of ``d`` continuous parameters on ``[0, 1]``."""
        return cls(tuple(ParamSpec(f"{prefix}{i}", CONTINUOUS, 0.0, 1.0) for i in range(d)))


def load_space(path) -> ConfigSpace:
    """Read a space definition file (YAML or JSON)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpaceFormatError(f"cannot parse {path}: {exc}") from exc
    return ConfigSpace.from_dict(doc)


def save_space(space: ConfigSpace, path) -> None:
    Path(path).write_text(yaml.safe_dump(space.to_dict(), sort_keys=False), encoding="utf-8")


def validate(space: ConfigSpace, setting: Sequence) -> list[Violation]:
    """Check a raw setting against the space.

    :return: an empty list when the setting is valid, otherwise one
        :class:`Violation` per offending parameter.
    :raises DimensionError: if the setting length differs from the space dimension.
    """
    if len(setting) != space.dimension:
        raise DimensionError(f"setting has {len(setting)} values, space has {space.dimension}")
    violations = []
    for spec, value in zip(space.params, setting):
        reason = spec.check(value)
        if reason is not None:
            violations.append(Violation(spec.name, value, reason))
    return violations


def normalize(space: ConfigSpace, setting: Sequence) -> np.ndarray:
    violations = validate(space, setting)
    if violations:
        raise InvalidSettingError(violations)
    coords = np.empty(space.dimension)
    for i, (spec, value) in enumerate(zip(space.params, setting)):
        if spec.kind == CATEGORICAL:
            coords[i] = _level_index(spec.levels, value) / (len(spec.levels) - 1)
        else:
            coords[i] = (float(value) - spec.min) / (spec.max - spec.min)
    return coords


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def denormalize(space: ConfigSpace, coords) -> tuple:
    """Map unit-cube coordinates back to a raw setting.

    Integer parameters round half up and clamp; categorical parameters pick
    the level at ``round(c * (L - 1))``.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (space.dimension,):
        raise DimensionError(f"expected {space.dimension} coordinates, got shape {coords.shape}")
    if np.any(coords < 0.0) or np.any(coords > 1.0) or not np.all(np.isfinite(coords)):
        raise ValueError("normalized coordinates must lie in [0, 1]")
    values = []
    for spec, c in zip(space.params, coords):
        c = float(c)
        if spec.kind == CATEGORICAL:
            values.append(spec.levels[_round_half_up(c * (len(spec.levels) - 1))])
        elif spec.kind == INTEGER:
            v = _round_half_up(spec.min + c * (spec.max - spec.min))
            values.append(min(max(v, spec.min), spec.max))
        else:
            values.append(min(max(spec.min + c * (spec.max - spec.min), spec.min), spec.max))
    return tuple(values)


def snap(space: ConfigSpace, coords) -> np.ndarray:
    """Project coordinates onto the representable grid of the space."""
    return normalize(space, denormalize(space, coords))
