"""End-to-end tuning: sample, model comparisons, search promising subspaces.

One round only: ``n`` Latin hypercube settings are measured, a comparison
classifier is trained on all ordered pairs, a large candidate pool is
filtered down to predicted winners against the best sample, the winners are
clustered, and ``m`` validation settings are spread over neighbor-bounded
boxes around the cluster centers. The best measured setting wins.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._io import atomic_write_text
from .classifier import GBT, ComparisonClassifier, GbtHyperParams, fit_samples
from .driver import DriverSpec, Sample, evaluate
from .errors import ConfigError, DataFormatError, DegenerateTrainingError, EvaluationError
from .induction import check_rules, generate_from_rules
from .sampling import lhs, lhs_in_box
from .search import (DEFAULT_POOL_FACTOR, MIN_POOL_FACTOR, best_cluster_num,
                     bound_subspace, find_winners, generate_pool, kmeans, pool_size)
from .space import ConfigSpace, denormalize

log = logging.getLogger(__name__)

REPORT_FORMAT = "pairtune-report"
REPORT_VERSION = 1

# phase tags for derived seeds
_INITIAL, _RULES, _TRAIN, _POOL, _CLUSTER, _RESAMPLE, _REPLACE = range(7)


def child_seed(seed: int, *tags: int) -> int:
    """Independent 63-bit seed derived from ``seed`` and phase tags."""
    ss = np.random.SeedSequence([seed, *tags])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class TuningConfig:
    """Budget split and search knobs.

    ``init_samples`` and ``validate_samples`` default to half the budget
    each (``n`` rounds down). ``rule_pairs`` defaults to ``n (n - 1) / 2``
    when rules are given.
    """

    budget: int = 100
    init_samples: int | None = None
    validate_samples: int | None = None
    pool_factor: int = DEFAULT_POOL_FACTOR
    k_max: int = 10
    seed: int = 0
    kind: str = GBT
    hyper: GbtHyperParams = field(default_factory=GbtHyperParams)
    rules: tuple = ()
    rule_pairs: int | None = None
    max_failures: int = 10

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.budget < 1:
            raise ConfigError("budget must be positive")
        n = self.budget // 2 if self.init_samples is None else self.init_samples
        m = self.budget - n if self.validate_samples is None else self.validate_samples
        object.__setattr__(self, "init_samples", n)
        object.__setattr__(self, "validate_samples", m)
        if n < 2:
            raise ConfigError("need at least 2 initial samples")
        if m < 1:
            raise ConfigError("need at least 1 validation sample")
        if n + m > self.budget:
            raise ConfigError(f"init ({n}) + validate ({m}) samples exceed the budget of {self.budget}")
        if self.pool_factor < MIN_POOL_FACTOR:
            raise ConfigError(f"pool factor must be at least {MIN_POOL_FACTOR}")
        if self.k_max < 1:
            raise ConfigError("k_max must be positive")


@dataclass
class TuningResult:
    best: Sample
    history: list
    timings: dict
    subspaces: list = field(default_factory=list)
    winners: int = 0
    k: int = 0
    fallback: bool = False
    train_accuracy: float = math.nan
    failures: list = field(default_factory=list)
    classifier: ComparisonClassifier | None = None
    method: str = "comparison"

    @property
    def best_performance(self) -> float:
        return self.best.performance


def best_of(history: Sequence[Sample]) -> Sample:
    """Highest-score sample; the earliest one wins ties."""
    scores = np.array([s.score for s in history])
    return history[int(np.argmax(scores))]


class _Evaluator:
    """Measures settings, keeps history and the failure log."""

    def __init__(self, space, driver, max_failures, progress):
        self.space = space
        self.driver = driver
        self.max_failures = max_failures
        self.progress = progress
        self.history: list[Sample] = []
        self.failures: list[dict] = []
        self.seconds = 0.0

    def measure(self, coords, replacement: Callable[[int], np.ndarray]) -> Sample:
        attempt = 0
        while True:
            setting = denormalize(self.space, coords)
            start = time.perf_counter()
            try:
                sample = evaluate(self.driver, self.space, setting)
            except EvaluationError as exc:
                self.seconds += time.perf_counter() - start
                self.failures.append({"setting": list(setting), "error": str(exc),
                                      "output": exc.raw_output})
                if len(self.failures) > self.max_failures:
                    raise
                log.warning("evaluation failed (%s); drawing a replacement", exc)
                attempt += 1
                coords = replacement(attempt)
                continue
            self.seconds += time.perf_counter() - start
            self.history.append(sample)
            if self.progress:
                self.progress(f"eval {len(self.history)}: performance={sample.performance!r}")
            return sample


def split_counts(m: int, sizes: Sequence[int]) -> list[int]:
    """Spread ``m`` evaluations over clusters.

    Every cluster gets ``ceil(m / k)``; the surplus is taken back one at a
    time, round robin, starting from the cluster with the fewest winners.
    """
    k = len(sizes)
    counts = [math.ceil(m / k)] * k
    surplus = sum(counts) - m
    order = sorted(range(k), key=lambda c: (sizes[c], -c))
    i = 0
    while surplus > 0:
        c = order[i % k]
        if counts[c] > 0:
            counts[c] -= 1
            surplus -= 1
        i += 1
    return counts


def _initial_phase(ev: _Evaluator, n: int, seed: int, initial: Sequence[Sample]) -> None:
    d = ev.space.dimension
    ev.history.extend(initial)
    fresh = max(0, n - len(initial))
    if fresh:
        points = lhs(d, fresh, child_seed(seed, _INITIAL))
        for i, point in enumerate(points):
            ev.measure(point, lambda a, i=i: lhs(d, 1, child_seed(seed, _REPLACE, 0, i, a))[0])


def sample_initial(space: ConfigSpace, driver: DriverSpec, n: int, seed: int = 0,
                   initial: Sequence[Sample] = (), max_failures: int = 10,
                   progress: Callable[[str], None] | None = None) -> list[Sample]:
    """Top ``initial`` up to ``n`` samples with Latin hypercube settings.

    Uses the same draws as the sampling phase of :func:`tune`, so a database
    filled here and passed back as ``initial`` gives the same run.
    """
    if n < 1:
        raise ConfigError("sample count must be positive")
    ev = _Evaluator(space, driver, max_failures, progress)
    _initial_phase(ev, n, seed, initial)
    return ev.history


def tune(space: ConfigSpace, driver: DriverSpec, cfg: TuningConfig,
         initial: Sequence[Sample] = (), progress: Callable[[str], None] | None = None
         ) -> TuningResult:
    """Run one sample-model-search round.

    :param initial: samples measured earlier on the same space; they count
        toward the ``n`` initial samples and are not measured again.
    :param progress: optional callback receiving one-line status messages.
    """
    d = space.dimension
    n, m = cfg.init_samples, cfg.validate_samples
    if cfg.rules:
        check_rules(cfg.rules, space)
    ev = _Evaluator(space, driver, cfg.max_failures, progress)
    timings = {}

    # sampling
    start = time.perf_counter()
    _initial_phase(ev, n, cfg.seed, initial)
    timings["sampling"] = time.perf_counter() - start
    training = list(ev.history)

    # modeling
    start = time.perf_counter()
    X = np.array([s.normalized for s in training], dtype=float)
    y = np.array([s.score for s in training], dtype=float)
    extra = None
    if cfg.rules:
        count = cfg.rule_pairs or len(training) * (len(training) - 1) // 2
        extra = generate_from_rules(cfg.rules, count, space, child_seed(cfg.seed, _RULES))
    try:
        clf = fit_samples(X, y, cfg.kind, cfg.hyper, child_seed(cfg.seed, _TRAIN), extra)
    except DegenerateTrainingError:
        # every initial sample performed the same; nothing to learn
        clf = None
    timings["modeling"] = time.perf_counter() - start

    # searching
    start = time.perf_counter()
    best_idx = int(np.argmax(y))
    pivot = X[best_idx]
    winners = np.empty((0, d))
    if clf is not None:
        pool = generate_pool(d, pool_size(d, cfg.pool_factor), child_seed(cfg.seed, _POOL))
        winners = find_winners(clf, pool, pivot)
    if progress:
        progress(f"winners: {winners.shape[0]}")
    fallback = winners.shape[0] == 0
    if fallback:
        others = np.delete(X, best_idx, axis=0)
        sub = bound_subspace(pivot, others)
        subspaces = [sub]
        k = 1
    else:
        k, _ = best_cluster_num(winners, cfg.k_max, child_seed(cfg.seed, _CLUSTER))
        clusters = kmeans(winners, k, child_seed(cfg.seed, _CLUSTER))
        subspaces = []
        for center, size in zip(clusters.centers, clusters.sizes()):
            sub = bound_subspace(center, X)
            sub.size = int(size)
            subspaces.append(sub)
    counts = split_counts(m, [s.size for s in subspaces])
    candidates = []
    for c, (sub, count) in enumerate(zip(subspaces, counts)):
        if count:
            candidates.extend((c, p) for p in lhs_in_box(sub.box, count,
                                                         child_seed(cfg.seed, _RESAMPLE, c)))
    timings["searching"] = time.perf_counter() - start

    # validation
    ev.seconds = 0.0
    for j, (c, point) in enumerate(candidates):
        box = subspaces[c].box
        ev.measure(point, lambda a, c=c, j=j, box=box:
                   lhs_in_box(box, 1, child_seed(cfg.seed, _REPLACE, 1, j, a))[0])
    timings["validation"] = ev.seconds

    return TuningResult(
        best=best_of(ev.history),
        history=ev.history,
        timings=timings,
        subspaces=subspaces,
        winners=int(winners.shape[0]),
        k=k,
        fallback=fallback,
        train_accuracy=math.nan if clf is None else clf.train_accuracy,
        failures=ev.failures,
        classifier=clf,
    )


def random_search(space: ConfigSpace, driver: DriverSpec, budget: int, seed: int = 0,
                  progress: Callable[[str], None] | None = None) -> TuningResult:
    """Baseline: measure ``budget`` Latin hypercube settings, keep the best."""
    if budget < 1:
        raise ConfigError("budget must be positive")
    d = space.dimension
    ev = _Evaluator(space, driver, 10, progress)
    start = time.perf_counter()
    for i, point in enumerate(lhs(d, budget, child_seed(seed, _INITIAL))):
        ev.measure(point, lambda a, i=i: lhs(d, 1, child_seed(seed, _REPLACE, 0, i, a))[0])
    timings = {"sampling": time.perf_counter() - start, "modeling": 0.0,
               "searching": 0.0, "validation": 0.0}
    return TuningResult(best=best_of(ev.history), history=ev.history, timings=timings,
                        failures=ev.failures, method="random")


def _sample_dict(s: Sample) -> dict:
    return {
        "setting": list(s.setting),
        "normalized": list(s.normalized),
        "performance": s.performance,
        "score": s.score,
        "spread": list(s.spread),
    }


def report_dict(result: TuningResult, space: ConfigSpace, include_timings: bool = True) -> dict:
    doc = {
        "format": REPORT_FORMAT,
        "version": REPORT_VERSION,
        "method": result.method,
        "params": space.names,
        "best": _sample_dict(result.best),
        "best_index": next(i for i, s in enumerate(result.history) if s is result.best),
        "evaluations": len(result.history),
        "history": [_sample_dict(s) for s in result.history],
        "subspaces": [s.to_dict() for s in result.subspaces],
        "winners": result.winners,
        "clusters": result.k,
        "fallback": result.fallback,
        "train_accuracy": None if math.isnan(result.train_accuracy) else result.train_accuracy,
        "failures": result.failures,
    }
    if include_timings:
        doc["timings"] = dict(result.timings)
    return doc


def emit_report(result: TuningResult, space: ConfigSpace, path, timings: str = "inline") -> None:
    """Write the run report as JSON.

    :param timings: ``"inline"`` stores phase timings in the report;
        ``"sidecar"`` writes them to ``<path>.timings.json`` instead so the
        report itself stays byte-identical across reruns.
    """
    if timings not in ("inline", "sidecar"):
        raise ValueError("timings must be 'inline' or 'sidecar'")
    doc = report_dict(result, space, include_timings=timings == "inline")
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
    if timings == "sidecar":
        atomic_write_text(f"{path}.timings.json", json.dumps(result.timings, indent=2) + "\n")


def load_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"cannot read report {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != REPORT_FORMAT:
        raise DataFormatError(f"{path} is not a tuning report")
    sidecar = f"{path}.timings.json"
    if "timings" not in doc:
        try:
            with open(sidecar, encoding="utf-8") as fh:
                doc["timings"] = json.load(fh)
        except OSError:
            pass
        except ValueError as exc:
            raise DataFormatError(f"cannot read {sidecar}: {exc}") from exc
    return doc
