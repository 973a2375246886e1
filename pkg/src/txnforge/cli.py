"""Command-line entry point: ``txnforge generate|features|detect|compare|plot|graph``.

Exit codes: 0 success, 2 usage/config/data problems, 3 I/O failures.
Seed precedence: ``--seed`` flag, then the config file, then the
``TXNFORGE_SEED`` environment variable, then 42.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io_export
from .abm import DEFAULT_SEED, Label, ModelKind, SimRun, TransactionEvent, load_config, run
from .errors import ConfigError, DataError, ParameterError, UnsupportedOperationError
from .features import FeatureMatrix, FeatureSet, class_means, extract_features, select_columns
from .metrics import ks_two_sample
from .report import ALGORITHMS, run_detector

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3
SEED_ENV = "TXNFORGE_SEED"
FEATURE_SET_CHOICES = ("time", "all", "in_degree", "out_degree")


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def cmd_generate(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else (config.seed if config.seed is not None else _env_seed())
    config = config.with_overrides(model_kind=ModelKind(args.model), seed=seed)
    sim = run(config)
    io_export.write_run(sim, args.out)
    n_susp = sum(1 for e in sim.events if e.sender_label is Label.SUSPICIOUS)
    frac = n_susp / len(sim.events) if sim.events else 0.0
    print(
        f"{config.model_kind.value}: agents={len(sim.agents)} events={len(sim.events)} "
        f"suspicious_fraction={frac:.4f} seed={seed} -> {args.out}"
    )
    return EXIT_OK


def cmd_features(args) -> int:
    sim = io_export.read_run(args.input)
    rows = extract_features(sim, circular=args.circular)
    io_export.write_features(rows, args.out)
    print(f"{len(rows)} agents -> {args.out}")
    for label, means in class_means(rows).items():
        parts = " ".join(f"{k}={'-' if v is None else f'{v:.3f}'}" for k, v in means.items())
        print(f"  {label}: {parts}")
    return EXIT_OK


def _event_matrix_from_csv(path: Path) -> FeatureMatrix:
    text = path.read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise DataError(f"{path} has no transactions")
    X = np.array([[float(r["step"])] for r in rows])
    y = np.array([int(r["sender_label"] == Label.SUSPICIOUS.value) for r in rows])
    return FeatureMatrix(X=X, y=y, ids=np.arange(len(rows)), columns=("step",))


def _load_design(path: Path, feature_set: str) -> tuple[FeatureMatrix, str]:
    if not path.is_file():
        raise io_export.MissingArtifactError(f"missing features file {path}")
    with path.open(encoding="utf-8") as fh:
        header = tuple(next(csv.reader(fh), ()))
    if header == io_export.TRANSACTIONS_HEADER:
        if feature_set != "time":
            raise DataError("transaction files carry only the step column; use --feature-set time")
        return _event_matrix_from_csv(path), "event"
    return select_columns(io_export.read_features(path), FeatureSet.parse(feature_set)), "agent"


def cmd_detect(args) -> int:
    path = Path(args.features)
    fm, granularity = _load_design(path, args.feature_set)
    seed = args.seed if args.seed is not None else _env_seed()
    params = {
        "dtree": {"max_depth": args.max_depth},
        "gmm": {"n_components": args.components, "n_init": args.n_init},
        "iforest": {
            "n_trees": args.n_trees,
            "subsample_size": args.subsample,
            "contamination": args.contamination,
        },
    }[args.algo]
    report = run_detector(
        fm, args.algo, params, seed=seed, feature_set=args.feature_set, granularity=granularity
    )
    report.input_sha256 = io_export.file_sha256(path)
    out = Path(args.out)
    try:
        out.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise io_export.ArtifactIOError(f"cannot write {out}: {exc.strerror or exc}") from exc
    cm = report.confusion
    print(f"{args.algo} on {args.feature_set} ({granularity}, {len(report.ids)} rows)")
    print("              pred_normal  pred_suspicious")
    print(f"normal        {cm.tn:>11d}  {cm.fp:>15d}")
    print(f"suspicious    {cm.fn:>11d}  {cm.tp:>15d}")
    print(f"mcc={report.metrics.mcc:.4f} accuracy={report.metrics.accuracy:.4f} -> {out}")
    return EXIT_OK


def _read_column(path: Path, column: str) -> list[float]:
    if not path.is_file():
        raise io_export.MissingArtifactError(f"missing input file {path}")
    reader = csv.DictReader(io.StringIO(path.read_text(encoding="utf-8")))
    if column not in (reader.fieldnames or ()):
        raise DataError(f"{path} has no column {column!r}")
    values = []
    for r in reader:
        if r[column] != "":
            try:
                values.append(float(r[column]))
            except ValueError as exc:
                raise DataError(f"{path}: non-numeric value {r[column]!r} in {column!r}") from exc
    return values


def cmd_compare(args) -> int:
    a = _read_column(Path(args.a), args.column)
    b = _read_column(Path(args.b), args.column)
    res = ks_two_sample(a, b)
    if args.json:
        print(json.dumps({"column": args.column, "D": res.statistic, "pvalue": res.pvalue,
                          "n_a": res.n_a, "n_b": res.n_b}))
    else:
        print(f"KS {args.column}: D={res.statistic:.6f} p={res.pvalue:.6g} (n_a={res.n_a}, n_b={res.n_b})")
    return EXIT_OK


def cmd_plot(args) -> int:
    sim = io_export.read_run(args.input)
    io_export.plot_histogram_svg(sim, args.out, bin_hours=args.bin_hours)
    print(f"histogram ({len(sim.events)} events) -> {args.out}")
    return EXIT_OK


def cmd_graph(args) -> int:
    sim = io_export.read_run(args.input)
    io_export.export_graph_dot(sim, args.out, window_start_hour=args.window)
    print(f"graph -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="txnforge", description="Synthetic transaction generator and detector benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate one day and write run artifacts")
    g.add_argument("--model", choices=[k.value for k in ModelKind], required=True)
    g.add_argument("--config", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", default="run")
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("features", help="per-agent features from a run directory")
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--circular", action="store_true", help="circular mean for txn_mean_time")
    f.set_defaults(func=cmd_features)

    d = sub.add_parser("detect", help="run one detector and write a JSON report")
    d.add_argument("--algo", choices=ALGORITHMS, required=True)
    d.add_argument("--features", required=True, help="features.csv, or transactions.csv for per-event detection")
    d.add_argument("--feature-set", choices=FEATURE_SET_CHOICES, required=True)
    d.add_argument("--seed", type=int)
    d.add_argument("--out", default="report.json")
    d.add_argument("--max-depth", type=int, default=1)
    d.add_argument("--components", type=int, default=2)
    d.add_argument("--n-init", type=int, default=10)
    d.add_argument("--contamination", type=float, default=0.1)
    d.add_argument("--n-trees", type=int, default=100)
    d.add_argument("--subsample", type=int, default=256)
    d.set_defaults(func=cmd_detect)

    c = sub.add_parser("compare", help="two-sample KS test on one CSV column")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--column", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_compare)

    pl = sub.add_parser("plot", help="hourly per-class histogram as SVG")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--bin-hours", type=int, default=1)
    pl.set_defaults(func=cmd_plot)

    gr = sub.add_parser("graph", help="export the transaction graph as DOT")
    gr.add_argument("--in", dest="input", required=True)
    gr.add_argument("--out", required=True)
    gr.add_argument("--window", type=int, help="keep only the hour starting at this hour")
    gr.set_defaults(func=cmd_graph)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, DataError, UnsupportedOperationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
