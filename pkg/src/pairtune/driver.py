"""Measuring settings on the system under tune and keeping the sample database.

External protocol: the command receives the path of a settings file holding
``name=value`` lines with raw values and must print one finite number on
standard output. Synthetic mode evaluates a built-in benchmark instead.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write_text
from .benchmarks import get_benchmark
from .errors import (DataFormatError, EvaluationError, FingerprintError,
                     InvalidSettingError)
from .space import CATEGORICAL, INTEGER, ConfigSpace, normalize, validate

EXTERNAL = "external-command"
SYNTHETIC = "synthetic"
MAXIMIZE = "maximize"
MINIMIZE = "minimize"
AGGREGATIONS = {"median": np.median, "mean": np.mean, "min": np.min, "max": np.max}
SETTINGS_PLACEHOLDER = "{settings}"


def to_score(performance: float, sense: str) -> float:
    """Maximize-sense score of a raw performance value."""
    return performance if sense == MAXIMIZE else -performance


@dataclass(frozen=True)
class DriverSpec:
    """How to obtain one performance number for a setting.

    :param command: argv list for external mode; every ``{settings}`` token
        is replaced by the settings-file path, which is appended when no
        token is present.
    :param retries: extra attempts after a failed evaluation.
    """

    mode: str = SYNTHETIC
    command: tuple = ()
    benchmark: str = ""
    timeout: float = 600.0
    repetitions: int = 1
    aggregation: str = "median"
    sense: str = MAXIMIZE
    retries: int = 0
    units: str = ""

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(self.command))
        if self.mode not in (EXTERNAL, SYNTHETIC):
            raise ValueError(f"unknown driver mode {self.mode!r}")
        if self.mode == EXTERNAL and not self.command:
            raise ValueError("external mode needs a command")
        if self.mode == SYNTHETIC:
            get_benchmark(self.benchmark, 1)
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"unknown sense {self.sense!r}")
        if self.retries < 0:
            raise ValueError("retries must be non-negative")

    def score(self, performance: float) -> float:
        return to_score(performance, self.sense)


@dataclass(frozen=True)
class Sample:
    """One evaluated setting.

    ``performance`` is the raw measured value; ``score`` is the same value in
    maximize sense (negated for minimized metrics).
    """

    setting: tuple
    normalized: tuple
    performance: float
    score: float
    spread: tuple = (math.nan, math.nan)

    def __post_init__(self):
        if not math.isfinite(self.performance):
            raise ValueError("sample performance must be finite")

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        # NaN spreads compare equal to each other
        return (self.setting == other.setting and self.normalized == other.normalized
                and self.performance == other.performance and self.score == other.score
                and np.array_equal(self.spread, other.spread, equal_nan=True))

    __hash__ = None


def make_sample(space: ConfigSpace, driver: DriverSpec, setting, values: Sequence[float]) -> Sample:
    perf = float(AGGREGATIONS[driver.aggregation](np.asarray(values, dtype=float)))
    return Sample(
        setting=tuple(setting),
        normalized=tuple(float(c) for c in normalize(space, setting)),
        performance=perf,
        score=driver.score(perf),
        spread=(float(min(values)), float(max(values))),
    )


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_settings_file(space: ConfigSpace, setting, path) -> None:
    lines = [f"{name}={format_value(v)}" for name, v in zip(space.names, setting)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_once(driver: DriverSpec, settings_path: str) -> float:
    args = [a.replace(SETTINGS_PLACEHOLDER, settings_path) for a in driver.command]
    if not any(SETTINGS_PLACEHOLDER in a for a in driver.command):
        args.append(settings_path)
    try:
        proc = subprocess.run(args, capture_output=True, text=True, timeout=driver.timeout,
                              env=os.environ.copy())
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout or ""
        if isinstance(out, bytes):
            out = out.decode("utf-8", "replace")
        raise EvaluationError(f"command timed out after {driver.timeout}s", out) from exc
    except OSError as exc:
        raise EvaluationError(f"cannot run command: {exc}") from exc
    if proc.returncode != 0:
        raise EvaluationError(f"command exited with status {proc.returncode}",
                              proc.stdout + proc.stderr)
    text = proc.stdout.strip()
    try:
        value = float(text)
    except ValueError:
        raise EvaluationError("command output is not a single number", proc.stdout) from None
    if not math.isfinite(value):
        raise EvaluationError("command printed a non-finite value", proc.stdout)
    return value


def _measure_external(driver: DriverSpec, space: ConfigSpace, setting) -> list[float]:
    with tempfile.TemporaryDirectory(prefix="pairtune-") as tmp:
        path = os.path.join(tmp, "settings.conf")
        write_settings_file(space, setting, path)
        return [_run_once(driver, path) for _ in range(driver.repetitions)]


def evaluate(driver: DriverSpec, space: ConfigSpace, setting) -> Sample:
    """Measure one raw setting.

    :raises InvalidSettingError: if the setting is outside the space.
    :raises EvaluationError: once all ``1 + retries`` attempts have failed.
    """
    setting = tuple(setting)
    violations = validate(space, setting)
    if violations:
        raise InvalidSettingError(violations)
    if driver.mode == SYNTHETIC:
        bench = get_benchmark(driver.benchmark, space.dimension)
        value = bench(normalize(space, setting))
        return make_sample(space, driver, setting, [value] * driver.repetitions)
    error = None
    for _ in range(driver.retries + 1):
        try:
            return make_sample(space, driver, setting, _measure_external(driver, space, setting))
        except EvaluationError as exc:
            error = exc
    raise error


@dataclass
class SampleDatabase:
    space: ConfigSpace
    sense: str = MAXIMIZE
    units: str = ""
    rows: list = field(default_factory=list)

    @property
    def fingerprint(self) -> str:
        return self.space.fingerprint()

    def __len__(self):
        return len(self.rows)

    def append(self, sample: Sample) -> None:
        self.rows.append(sample)

    def settings(self) -> np.ndarray:
        return np.array([s.normalized for s in self.rows], dtype=float).reshape(-1, self.space.dimension)

    def scores(self) -> np.ndarray:
        return np.array([s.score for s in self.rows], dtype=float)


def _meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def save_db(db: SampleDatabase, path) -> None:
    """Write the rows as CSV plus a ``<path>.meta.json`` sidecar.

    The CSV header lists the parameter names, then ``performance``,
    ``performance_min`` and ``performance_max``; values are raw.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(db.space.names + ["performance", "performance_min", "performance_max"])
    for s in db.rows:
        writer.writerow([format_value(v) for v in s.setting]
                        + [repr(s.performance), repr(s.spread[0]), repr(s.spread[1])])
    meta = {
        "fingerprint": db.fingerprint,
        "sense": db.sense,
        "units": db.units,
        "space": db.space.to_dict(),
        "rows": len(db.rows),
    }
    atomic_write_text(path, buf.getvalue())
    atomic_write_text(_meta_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _parse_value(spec, text: str):
    if spec.kind == CATEGORICAL:
        for level in spec.levels:
            if format_value(level) == text:
                return level
        raise DataFormatError(f"{spec.name}: {text!r} is not a level")
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"{spec.name}: {text!r} is not a number") from None
    if spec.kind == INTEGER:
        if not value.is_integer():
            raise DataFormatError(f"{spec.name}: {text!r} is not an integer")
        return int(value)
    return value


def load_db(path, space: ConfigSpace) -> SampleDatabase:
    """Read a database written by :func:`save_db`.

    :raises FingerprintError: if it was recorded for a different space.
    :raises DataFormatError: if either file is malformed.
    """
    try:
        meta = json.loads(_meta_path(path).read_text(encoding="utf-8"))
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"cannot read sample database {path}: {exc}") from exc
    if not isinstance(meta, dict) or "fingerprint" not in meta:
        raise DataFormatError(f"{path}: metadata lacks a fingerprint")
    if meta["fingerprint"] != space.fingerprint():
        raise FingerprintError(f"{path} was recorded for a different parameter space")
    sense = meta.get("sense", MAXIMIZE)
    if sense not in (MAXIMIZE, MINIMIZE):
        raise DataFormatError(f"{path}: unknown sense {sense!r}")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    expected = space.names + ["performance", "performance_min", "performance_max"]
    if header != expected:
        raise DataFormatError(f"{path}: unexpected header {header}")
    db = SampleDatabase(space, sense, meta.get("units", ""))
    for lineno, row in enumerate(reader, 2):
        if len(row) != len(expected):
            raise DataFormatError(f"{path}:{lineno}: expected {len(expected)} fields")
        d = space.dimension
        setting = tuple(_parse_value(spec, cell) for spec, cell in zip(space.params, row[:d]))
        try:
            perf, lo, hi = (float(c) for c in row[d:])
            db.append(Sample(setting, tuple(float(c) for c in normalize(space, setting)),
                             perf, to_score(perf, sense), (lo, hi)))
        except (ValueError, InvalidSettingError) as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return db
