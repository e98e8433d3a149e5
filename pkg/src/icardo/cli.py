"""Command-line front end.

Settings resolve as: command-line flag, then ``--config`` JSON file, then the
``ICARDO_SEED`` environment variable (seed only), then built-in defaults.
Exit codes: 0 success, 2 usage or input error, 3 numerical or internal failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .data import load_any, save_dataset
from .errors import ConvergenceError, IcardoError, NumericalError, TrainingError
from .featureset import SelectorKind
from .harness import (
    VALIDATION_SEEDS,
    GridConfig,
    GridReport,
    default_jobs,
    prepare,
    rank_models,
    run_grid,
    selector_config_from_dict,
    train_pipeline,
    validate_combined,
)
from .learners import ClassifierKind, TrainedModel, predict_record
from .metrics import percent
from .report import FORMATS, emit_report
from .selectors import DEFAULT_SIZES

DEFAULTS = {
    "schema": "alizadeh56",
    "seed": 42,
    "test_fraction": 0.30,
    "positive": "minority",
    "selector": "chi2",
    "k": 10,
    "classifier": "svm",
    "rfe_k": 10,
    "jobs": None,  # None -> available parallelism
    "formats": list(FORMATS),
    "out": "out",
    "timings": False,
    "drop_incomplete": False,
    "ignore_columns": [],
    "sizes": list(DEFAULT_SIZES),
    "selectors": [s.value for s in SelectorKind],
    "classifiers": [c.value for c in ClassifierKind],
    "hyperparams": {},
    "selector_config": {},
    "sweep": False,
}
SEED_ENV = "ICARDO_SEED"


class UsageError(Exception):
    pass


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _formats(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in items if t not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown formats {bad}; choose from {','.join(FORMATS)}")
    return items


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="JSON file of settings (flags take precedence)")
    p.add_argument("--seed", type=_u64, help=f"random seed, unsigned 64-bit (default: ${SEED_ENV} or 42)")
    p.add_argument("--schema", choices=["alizadeh56", "uci13"], help="column schema (default: alizadeh56)")
    p.add_argument("--test-fraction", type=_fraction, help="held-out fraction (default: 0.30)")
    p.add_argument("--positive", choices=["minority", "cad"],
                   help="class scored as positive in precision/recall (default: minority)")
    p.add_argument("--drop-incomplete", action="store_true", default=None,
                   help="skip rows with missing cells instead of failing (default: off)")
    p.add_argument("--ignore-column", action="append", dest="ignore_columns", metavar="NAME",
                   help="extra CSV column to ignore; repeatable (default: none)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icardo", description="Feature selection and classifier grid "
                                     "for tabular heart-disease data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="parse and encode a CSV, print a summary, cache the result")
    p.add_argument("data", help="CSV file")
    _common(p)
    p.add_argument("--out", help="cache file to write (default: out/dataset.json)")

    p = sub.add_parser("select", help="run one selector on the training rows and print the feature set")
    p.add_argument("data", help="CSV or cached dataset JSON")
    _common(p)
    p.add_argument("--selector", choices=[s.value for s in SelectorKind], help="selector (default: chi2)")
    p.add_argument("--k", type=int, help="number of features (default: 10)")
    p.add_argument("--out", help="also write the feature set JSON here (default: stdout only)")

    p = sub.add_parser("grid", help="evaluate every selector x size x classifier cell")
    p.add_argument("data", help="CSV or cached dataset JSON")
    _common(p)
    p.add_argument("--jobs", type=_positive_int, help="worker processes (default: available parallelism)")
    p.add_argument("--formats", type=_formats, help=f"comma list from {','.join(FORMATS)} (default: all)")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--timings", action="store_true", default=None,
                   help="record per-cell wall time; makes reports run-dependent (default: off)")

    p = sub.add_parser("validate", help="SVM on all columns versus an RFE subset")
    p.add_argument("data", help="CSV or cached dataset JSON (13-column table)")
    _common(p)
    p.add_argument("--rfe-k", type=int, help="RFE subset size (default: 10)")
    p.add_argument("--sweep", action="store_true", default=None,
                   help=f"repeat over seeds {','.join(map(str, VALIDATION_SEEDS))} (default: off)")
    p.add_argument("--out", help="directory for validation.json (default: out)")

    p = sub.add_parser("train", help="fit one classifier on one feature set and save the model")
    p.add_argument("data", help="CSV or cached dataset JSON")
    _common(p)
    p.add_argument("--classifier", choices=[c.value for c in ClassifierKind], help="classifier (default: svm)")
    p.add_argument("--selector", choices=[s.value for s in SelectorKind] + ["none"],
                   help="selector, or none for every column (default: chi2)")
    p.add_argument("--k", type=int, help="number of features (default: 10)")
    p.add_argument("--out", help="model file (default: out/model.json)")

    p = sub.add_parser("predict", help="score one raw record with a saved model")
    p.add_argument("model", help="model JSON written by 'train'")
    p.add_argument("--record", help="JSON object, or path to a JSON file, mapping column to value")
    p.add_argument("--csv", dest="csv_path", help="CSV file with a header; scores the row given by --row")
    p.add_argument("--row", type=int, default=1, help="1-based data row of --csv (default: 1)")

    p = sub.add_parser("report", help="re-render an existing report.json")
    p.add_argument("report", help="report.json from 'grid'")
    p.add_argument("--formats", type=_formats, help=f"comma list from {','.join(FORMATS)} (default: all)")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--config", metavar="FILE", help="JSON file of settings (flags take precedence)")
    return parser


def resolve(args: argparse.Namespace, environ=os.environ) -> dict:
    """Merge flags over the config file over the environment over defaults."""
    conf = dict(DEFAULTS)
    env_seed = environ.get(SEED_ENV)
    if env_seed:
        try:
            conf["seed"] = _u64(env_seed)
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    path = getattr(args, "config", None)
    if path:
        try:
            file_conf = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(file_conf, dict):
            raise UsageError(f"config file {path} must hold a JSON object")
        unknown = set(file_conf) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"config file {path} has unknown keys {sorted(unknown)}")
        conf.update(file_conf)
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            conf[key] = value
    if conf["jobs"] is None:
        conf["jobs"] = default_jobs()
    return conf


def grid_config(conf: dict) -> GridConfig:
    try:
        return GridConfig(
            seed=int(conf["seed"]), test_fraction=float(conf["test_fraction"]), sizes=tuple(conf["sizes"]),
            selectors=tuple(conf["selectors"]), classifiers=tuple(conf["classifiers"]),
            hyperparams=dict(conf["hyperparams"]), positive=conf["positive"],
            selector_config=selector_config_from_dict(conf["selector_config"]),
            record_timing=bool(conf["timings"]),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _load(conf: dict, path: str):
    return load_any(path, conf["schema"], ignore_columns=conf["ignore_columns"],
                    drop_incomplete=conf["drop_incomplete"])


def _print_config(command: str, conf: dict) -> None:
    print(f"# {command} config: " + json.dumps(conf, sort_keys=True), file=sys.stderr)


def _check_k(k: int, n: int, flag: str = "--k") -> None:
    if not 1 <= k <= n:
        raise UsageError(f"{flag} must lie in [1, {n}], got {k}")


def cmd_ingest(args, conf) -> int:
    ds = _load(conf, args.data)
    print(ds.summary())
    for f in ds.schema.features:
        extra = f" {json.dumps(f.encoding, sort_keys=True)}" if f.encoding else ""
        print(f"  {f.symbol:>4} {f.name}: {f.kind.value}{extra}")
    out = Path(args.out or Path(conf["out"]) / "dataset.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out)
    print(f"cached encoded dataset to {out}")
    return 0


def cmd_select(args, conf) -> int:
    ds = _load(conf, args.data)
    k = int(conf["k"])
    _check_k(k, ds.n_features)
    cfg = grid_config(conf)
    prep_cfg = GridConfig(seed=cfg.seed, test_fraction=cfg.test_fraction, sizes=(k,),
                          selectors=(conf["selector"],), selector_config=cfg.selector_config)
    prep = prepare(ds, prep_cfg)
    if prep.selector_errors:
        raise TrainingError("; ".join(prep.selector_errors.values()))
    fs = prep.feature_sets[0]
    payload = {**fs.to_dict(), "symbols": fs.symbols, "seed": cfg.seed, "split_digest": prep.split.digest()}
    text = json.dumps(payload, sort_keys=True, indent=2)
    for name in fs.feature_names:
        print(name)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_grid(args, conf) -> int:
    ds = _load(conf, args.data)
    cfg = grid_config(conf)
    report = run_grid(ds, cfg, jobs=int(conf["jobs"]))
    paths = emit_report(report, conf["formats"], conf["out"])
    failed = sum(not r.ok for r in report.records)
    print(f"{len(report.records)} cells evaluated, {failed} failed, split {report.provenance['split_digest']}")
    top = rank_models(report)[0]
    if top.ok:
        print(f"top cell: {top.set_id} {top.classifier.label} accuracy {percent(top.metrics.accuracy)}%")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_validate(args, conf) -> int:
    ds = _load(conf, args.data)
    k = int(conf["rfe_k"])
    _check_k(k, ds.n_features, "--rfe-k")
    cfg = grid_config(conf)
    seeds = VALIDATION_SEEDS if conf["sweep"] else (cfg.seed,)
    results = [validate_combined(ds, rfe_k=k, seed=s, test_fraction=cfg.test_fraction,
                                 svm_params=cfg.hyperparams.get("svm"), positive=cfg.positive,
                                 rfe_config=cfg.selector_config.rfe) for s in seeds]
    for r in results:
        print(f"seed {r.seed}: baseline {percent(r.baseline.accuracy)}%, "
              f"rfe-{k} {percent(r.improved.accuracy)}%, delta {percent(r.delta)} points "
              f"[{', '.join(r.feature_set.feature_names)}]")
    out = Path(conf["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "validation.json").write_text(json.dumps([r.to_dict() for r in results], sort_keys=True, indent=2) + "\n")
    return 0


def cmd_train(args, conf) -> int:
    ds = _load(conf, args.data)
    selector = None if conf["selector"] == "none" else conf["selector"]
    k = int(conf["k"])
    if selector is not None:
        _check_k(k, ds.n_features)
    model, split = train_pipeline(ds, conf["classifier"], selector, k, grid_config(conf))
    out = Path(args.out or Path(conf["out"]) / "model.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(model.to_json() + "\n")
    mask = model.feature_mask.feature_names if model.feature_mask else ds.schema.names
    print(f"trained {model.kind.label} on {len(split.train_indices)} rows, features: {', '.join(mask)}")
    print(f"converged: {str(model.converged).lower()}; wrote {out}")
    return 0


def _read_record(args) -> dict:
    if bool(args.record) == bool(args.csv_path):
        raise UsageError("give exactly one of --record or --csv")
    if args.record:
        text = args.record
        if not text.lstrip().startswith("{"):
            try:
                text = Path(text).read_text()
            except OSError as exc:
                raise UsageError(f"cannot read record file {args.record}: {exc.strerror}") from None
        try:
            record = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"record is not valid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise UsageError("record must be a JSON object")
        return record
    try:
        with open(args.csv_path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {args.csv_path}: {exc.strerror}") from None
    if not 1 <= args.row <= len(rows):
        raise UsageError(f"--row must lie in [1, {len(rows)}]")
    return rows[args.row - 1]


def cmd_predict(args, conf) -> int:
    try:
        model = TrainedModel.from_json(Path(args.model).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read model {args.model}: {exc.strerror}") from None
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.model} is not a model file: {exc}") from None
    label, score = predict_record(model, _read_record(args))
    print(json.dumps({"label": label, "score": score}))
    return 0


def cmd_report(args, conf) -> int:
    try:
        report = GridReport.from_json(Path(args.report).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.report}: {exc.strerror}") from None
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.report} is not a grid report: {exc}") from None
    for p in emit_report(report, conf["formats"], conf["out"]):
        print(f"wrote {p}")
    return 0


COMMANDS = {"ingest": cmd_ingest, "select": cmd_select, "grid": cmd_grid, "validate": cmd_validate,
            "train": cmd_train, "predict": cmd_predict, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        conf = resolve(args)
        _print_config(args.command, conf)
        return COMMANDS[args.command](args, conf)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, NumericalError, ArithmeticError, TrainingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (IcardoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # last resort: report, never dump a traceback on the user
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
