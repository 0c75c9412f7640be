"""Command-line entry point.

Subcommands share the file formats of the library: a YAML/JSON space file,
the CSV sample database with its metadata sidecar, the JSON model file and
the JSON run report. Progress goes to standard error; failures print one
``pairtune: <category>: <reason>`` line there and exit with

* 0 on success,
* 1 on usage or configuration errors,
* 2 when the system under tune fails,
* 3 on unreadable or mismatched data files.
"""
from __future__ import annotations

import argparse
import json
import os
import shlex
import sys

import numpy as np

from . import __version__
from ._io import atomic_write_text
from .benchmarks import NAMES as BENCHMARKS
from .classifier import KINDS, GBT, GbtHyperParams, fit_samples, save_model
from .driver import (AGGREGATIONS, EXTERNAL, MAXIMIZE, MINIMIZE, SYNTHETIC, DriverSpec,
                     SampleDatabase, load_db, save_db)
from .errors import (ConfigError, DataFormatError, DegenerateTrainingError, DimensionError,
                     EvaluationError, FingerprintError, InvalidSettingError, ModelFormatError,
                     RulesFormatError, SpaceFormatError)
from .induction import generate_from_rules, load_rules
from .search import DEFAULT_POOL_FACTOR
from .space import ConfigSpace, load_space
from .tuner import (TuningConfig, emit_report, load_report, random_search, sample_initial,
                    tune)

DEFAULT_DB = "pairtune-samples.csv"
DEFAULT_MODEL = "pairtune-model.json"
DEFAULT_REPORT = "pairtune-report.json"

EXIT_OK, EXIT_USAGE, EXIT_EVALUATION, EXIT_DATA = 0, 1, 2, 3

_CATEGORIES = (
    ((EvaluationError,), "evaluation", EXIT_EVALUATION),
    ((DataFormatError, FingerprintError, SpaceFormatError, RulesFormatError, ModelFormatError,
      DegenerateTrainingError), "data", EXIT_DATA),
    ((ConfigError, InvalidSettingError, DimensionError, ValueError), "config", EXIT_USAGE),
    ((OSError,), "io", EXIT_DATA),
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route it through our contract
    def error(self, message):
        raise UsageError(message)


def _add_space(p, required=False):
    p.add_argument("--space", required=required, help="parameter space file (YAML or JSON)")
    p.add_argument("--dims", type=int, help="unit-cube dimension when no space file is given")


def _add_driver(p):
    g = p.add_argument_group("system under tune")
    g.add_argument("--driver-cmd", help="command measuring one settings file; "
                   "{settings} is replaced by its path, otherwise the path is appended")
    g.add_argument("--benchmark", choices=BENCHMARKS, help="built-in synthetic objective")
    g.add_argument("--minimize", action="store_true", help="lower performance is better")
    g.add_argument("--timeout", type=float, default=600.0, help="seconds per command run")
    g.add_argument("--repetitions", type=int, default=1)
    g.add_argument("--aggregation", choices=sorted(AGGREGATIONS), default="median")
    g.add_argument("--retries", type=int, default=0, help="extra attempts per failed setting")
    g.add_argument("--units", default="", help="performance units, recorded in the database")


def _add_model(p):
    p.add_argument("--classifier", choices=KINDS, default=GBT)
    p.add_argument("--rules", help="experience rules file")
    p.add_argument("--seed", type=int, default=0)


def _add_budget(p):
    p.add_argument("--budget", type=int, default=100, help="total tuning tests")
    p.add_argument("--init-samples", type=int, help="initial samples n (default budget/2)")
    p.add_argument("--validate-samples", type=int, help="validation samples m (default budget - n)")
    p.add_argument("--pool-factor", type=int, default=DEFAULT_POOL_FACTOR,
                   help="candidate pool holds pool-factor * d + 1 points")
    p.add_argument("--kmax", type=int, default=10, help="largest cluster count tried")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairtune", description="Comparison-classifier configuration tuner.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="no progress lines")
    # -q also after the subcommand; SUPPRESS keeps it from resetting the global value
    quiet = _Parser(add_help=False)
    quiet.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[quiet], help="measure Latin hypercube settings into a database")
    _add_space(p)
    _add_driver(p)
    _add_budget(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--db", default=DEFAULT_DB, help="database to create or top up")

    p = sub.add_parser("train", parents=[quiet], help="fit a comparison classifier on a database")
    _add_space(p)
    _add_model(p)
    p.add_argument("--db", required=True, help="sample database to learn from")
    p.add_argument("--model-out", default=DEFAULT_MODEL)

    p = sub.add_parser("tune", parents=[quiet], help="run one sample-model-search round")
    _add_space(p)
    _add_driver(p)
    _add_budget(p)
    _add_model(p)
    p.add_argument("--db", help="sample database; existing rows are reused as initial samples "
                   f"(written to {DEFAULT_DB} when omitted)")
    p.add_argument("--model-out", default=DEFAULT_MODEL)
    p.add_argument("--report-out", default=DEFAULT_REPORT)

    p = sub.add_parser("bench", parents=[quiet], help="compare against random search on a synthetic objective")
    p.add_argument("--benchmark", choices=BENCHMARKS, required=True)
    p.add_argument("--dims", type=int, default=5)
    _add_budget(p)
    _add_model(p)
    p.add_argument("--seeds", type=int, default=10, help="runs per method; seeds are seed .. seed+seeds-1")
    p.add_argument("--report-out", help="also write per-seed results as JSON")

    p = sub.add_parser("report", parents=[quiet], help="print a run report")
    p.add_argument("path", nargs="?", default=DEFAULT_REPORT)
    p.add_argument("--json", action="store_true", help="print the raw JSON")
    return parser


def _progress(args):
    if args.quiet:
        return None
    return lambda line: print(line, file=sys.stderr, flush=True)


def _space(args) -> ConfigSpace:
    if args.space:
        space = load_space(args.space)
        if args.dims is not None and args.dims != space.dimension:
            raise UsageError(f"--dims {args.dims} disagrees with the space dimension {space.dimension}")
        return space
    if args.dims is None:
        raise UsageError("give --space or --dims")
    if args.dims < 1:
        raise UsageError("--dims must be positive")
    return ConfigSpace.unit(args.dims)


def _driver(args) -> DriverSpec:
    if bool(args.driver_cmd) == bool(args.benchmark):
        raise UsageError("give exactly one of --driver-cmd and --benchmark")
    common = dict(timeout=args.timeout, repetitions=args.repetitions,
                  aggregation=args.aggregation, retries=args.retries, units=args.units,
                  sense=MINIMIZE if args.minimize else MAXIMIZE)
    if args.driver_cmd:
        return DriverSpec(mode=EXTERNAL, command=shlex.split(args.driver_cmd), **common)
    return DriverSpec(mode=SYNTHETIC, benchmark=args.benchmark, **common)


def _config(args, space: ConfigSpace | None = None) -> TuningConfig:
    rules = ()
    if getattr(args, "rules", None):
        rules = tuple(load_rules(args.rules, space))
    return TuningConfig(
        budget=args.budget, init_samples=args.init_samples,
        validate_samples=args.validate_samples, pool_factor=args.pool_factor,
        k_max=args.kmax, seed=args.seed, kind=getattr(args, "classifier", GBT),
        hyper=GbtHyperParams(), rules=rules,
    )


def _load_existing(path, space, driver):
    if not path or not os.path.exists(path):
        return []
    db = load_db(path, space)
    if db.sense != driver.sense:
        raise FingerprintError(f"{path} was recorded with sense {db.sense}, not {driver.sense}")
    return db.rows


def cmd_sample(args) -> int:
    space = _space(args)
    driver = _driver(args)
    cfg = _config(args)
    rows = _load_existing(args.db, space, driver)
    history = sample_initial(space, driver, cfg.init_samples, cfg.seed, rows,
                             progress=_progress(args))
    save_db(SampleDatabase(space, driver.sense, driver.units, history), args.db)
    print(f"{len(history)} samples in {args.db}")
    return EXIT_OK


def cmd_train(args) -> int:
    space = _space(args)
    db = load_db(args.db, space)
    if len(db) < 2:
        raise DataFormatError(f"{args.db} holds {len(db)} samples; training needs at least 2")
    extra = None
    if args.rules:
        rules = load_rules(args.rules, space)
        count = len(db) * (len(db) - 1) // 2
        extra = generate_from_rules(rules, count, space, args.seed)
    clf = fit_samples(db.settings(), db.scores(), args.classifier, GbtHyperParams(),
                      args.seed, extra)
    save_model(clf, args.model_out)
    print(f"{args.classifier} trained on {len(db)} samples, "
          f"training accuracy {clf.train_accuracy:.4f}, model in {args.model_out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    space = _space(args)
    driver = _driver(args)
    cfg = _config(args, space)
    initial = _load_existing(args.db, space, driver)
    db_path = args.db or DEFAULT_DB
    progress = _progress(args)
    result = tune(space, driver, cfg, initial, progress)
    save_db(SampleDatabase(space, driver.sense, driver.units, result.history), db_path)
    if result.classifier is not None:
        save_model(result.classifier, args.model_out)
    elif progress:
        progress("all initial samples performed the same; no model written")
    # timings vary run to run, so they live next to the report
    emit_report(result, space, args.report_out, timings="sidecar")
    best = result.best
    print(json.dumps({"best": dict(zip(space.names, best.setting)),
                      "performance": best.performance}))
    return EXIT_OK


def _summary(values) -> dict:
    values = np.asarray(values, dtype=float)
    return {"median": float(np.median(values)), "mean": float(values.mean()),
            "min": float(values.min()), "max": float(values.max())}


def cmd_bench(args) -> int:
    if args.dims < 1:
        raise UsageError("--dims must be positive")
    if args.seeds < 1:
        raise UsageError("--seeds must be positive")
    space = ConfigSpace.unit(args.dims)
    driver = DriverSpec(mode=SYNTHETIC, benchmark=args.benchmark)
    progress = _progress(args)
    rows = []
    for seed in range(args.seed, args.seed + args.seeds):
        args.seed = seed
        cfg = _config(args, space)
        tuned = tune(space, driver, cfg)
        base = random_search(space, driver, args.budget, seed)
        initial_best = max(s.performance for s in tuned.history[:cfg.init_samples])
        rows.append({"seed": seed, "comparison": tuned.best_performance,
                     "random": base.best_performance, "initial_best": initial_best,
                     "clusters": tuned.k, "winners": tuned.winners})
        if progress:
            progress(f"seed {seed}: comparison={tuned.best_performance:.6g} "
                     f"random={base.best_performance:.6g}")
    methods = ("comparison", "random", "initial_best")
    summary = {m: _summary([r[m] for r in rows]) for m in methods}
    print(f"benchmark {args.benchmark}  d={args.dims}  budget={args.budget}  seeds={args.seeds}")
    print(f"{'method':<14}{'median':>12}{'mean':>12}{'min':>12}{'max':>12}")
    for m in methods:
        s = summary[m]
        print(f"{m:<14}{s['median']:>12.6g}{s['mean']:>12.6g}{s['min']:>12.6g}{s['max']:>12.6g}")
    if args.report_out:
        doc = {"benchmark": args.benchmark, "dims": args.dims, "budget": args.budget,
               "runs": rows, "summary": summary}
        atomic_write_text(args.report_out, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def cmd_report(args) -> int:
    doc = load_report(args.path)
    if args.json:
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    best = doc["best"]
    print(f"method        {doc['method']}")
    print(f"evaluations   {doc['evaluations']}  (best is #{doc['best_index'] + 1})")
    print(f"performance   {_fmt(best['performance'])}")
    acc = doc.get("train_accuracy")
    print(f"train acc     {'n/a' if acc is None else format(acc, '.4f')}")
    print(f"winners       {doc['winners']}  clusters {doc['clusters']}"
          f"{'  (fallback box around the pivot)' if doc['fallback'] else ''}")
    if doc.get("failures"):
        print(f"failures      {len(doc['failures'])}")
    print("best setting")
    width = max(len(n) for n in doc["params"])
    for name, raw, c in zip(doc["params"], best["setting"], best["normalized"]):
        print(f"  {name:<{width}}  {_fmt(raw):>14}  ({c:.4f})")
    for i, sub in enumerate(doc["subspaces"]):
        lo = " ".join(f"{v:.3f}" for v in sub["lower"])
        hi = " ".join(f"{v:.3f}" for v in sub["upper"])
        print(f"subspace {i}: {sub['winners']} winners  lower [{lo}]  upper [{hi}]")
    timings = doc.get("timings")
    if timings:
        print("timings (s)   " + "  ".join(f"{k}={v:.3f}" for k, v in timings.items()))
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "train": cmd_train, "tune": cmd_tune,
            "bench": cmd_bench, "report": cmd_report}


def _fail(category: str, message, code: int) -> int:
    text = " ".join(str(message).split()) or "unknown error"
    print(f"pairtune: {category}: {text}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except KeyboardInterrupt:
        return _fail("interrupted", "stopped by user", EXIT_USAGE)
    except Exception as exc:
        for types, category, code in _CATEGORIES:
            if isinstance(exc, types):
                return _fail(category, exc, code)
        raise


if __name__ == "__main__":
    sys.exit(main())
