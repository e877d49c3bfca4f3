"""Command-line entry points: generate, train, evaluate, compare, gradcheck."""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .baselines import fit_cart, fit_linear, fit_mlp, predict_baseline
from .data import (
    INDICATOR_NAMES,
    FeatureSpec,
    assemble_features,
    generate_synthetic,
    load_csv,
    split,
    write_csv,
    write_truth_csv,
)
from .exceptions import ConfigError, PavesageError
from .experiment import KNOWN_MODELS, EvalReport, ExperimentConfig, cell_seed, run_experiment
from .gradsuite import gradient_suite
from .metrics import compute_metrics
from .params_io import load_model, save_model
from .report import emit_report
from .sage import SageConfig, predict, train

GRAD_TOLERANCE = 1e-4


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}")


def _parse_fanouts(text: str) -> tuple[int | None, ...]:
    out: list[int | None] = []
    for p in text.split(","):
        p = p.strip()
        if not p:
            continue
        if p.lower() in ("all", "full", "inf"):
            out.append(None)
        else:
            try:
                out.append(int(p))
            except ValueError:
                raise ConfigError(f"bad fanout {p!r}: use an integer or 'all'")
    return tuple(out)


def _file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_records(path):
    records, report = load_csv(path)
    if report.n_dropped:
        print(
            f"warning: dropped {report.n_dropped}/{report.n_rows} rows from {path}",
            file=sys.stderr,
        )
        for line_num, msg in report.issues[:10]:
            print(f"  line {line_num}: {msg}", file=sys.stderr)
        if len(report.issues) > 10:
            print(f"  ... and {len(report.issues) - 10} more", file=sys.stderr)
    if not records:
        raise ConfigError(f"{path}: no usable records")
    return records


def _build_dataset(records, indicator, test_fraction, split_seed, per_treatment=False):
    spec = FeatureSpec(target_indicator=indicator, per_treatment_dummies=per_treatment)
    return split(assemble_features(records, spec), test_fraction, split_seed)


def cmd_generate(args) -> int:
    records, truth = generate_synthetic(args.nodes, args.routes, args.rho, args.seed)
    write_csv(args.out, records)
    truth_out = args.truth_out or f"{args.out}.truth.csv"
    write_truth_csv(truth_out, records, truth)
    print(f"wrote {len(records)} sections to {args.out} (ground truth: {truth_out})")
    return 0


def _sage_config_from_args(args, seed: int) -> SageConfig:
    return SageConfig(
        hidden_dims=_parse_dims(args.hidden),
        fanouts=_parse_fanouts(args.fanouts),
        learning_rate=args.lr_rate,
        epochs=args.epochs,
        rng_seed=seed,
        batch_size=args.batch_size,
        patience=args.patience if args.patience >= 0 else None,
    )


def cmd_train(args) -> int:
    records = _load_records(args.data)
    dataset = _build_dataset(records, args.indicator, args.test_fraction, args.seed)
    mask = dataset.train_mask
    x_tr, y_tr = dataset.x[mask], dataset.y[mask]
    meta = {
        "indicator": args.indicator,
        "split_seed": args.seed,
        "test_fraction": args.test_fraction,
        "data_checksum": _file_checksum(args.data),
    }
    if args.model == "sage":
        config = _sage_config_from_args(args, args.seed)
        params, history = train(dataset.graph, dataset.x, dataset.y, mask, config)
        preds = predict(dataset.graph, dataset.x, params)[~mask]
        meta["config"] = {
            "hidden_dims": list(config.hidden_dims),
            "fanouts": list(config.fanouts),
            "learning_rate": config.learning_rate,
            "epochs": config.epochs,
            "batch_size": config.batch_size,
            "patience": config.patience,
        }
        meta["epochs_run"] = len(history)
        model = params
    elif args.model == "lr":
        model = fit_linear(x_tr, y_tr)
        preds = predict_baseline(model, dataset.x[~mask])
    elif args.model == "cart":
        model = fit_cart(
            x_tr, y_tr, max_depth=args.cart_max_depth, min_samples_leaf=args.cart_min_leaf
        )
        preds = predict_baseline(model, dataset.x[~mask])
    elif args.model == "nn":
        model = fit_mlp(x_tr, y_tr, epochs=args.epochs, learning_rate=args.lr_rate,
                        rng_seed=args.seed)
        preds = predict_baseline(model, dataset.x[~mask])
    else:
        raise ConfigError(f"unknown model {args.model!r}")

    metrics = compute_metrics(dataset.y[~mask], preds)
    print(
        f"{args.indicator} / {args.model}: "
        f"r2={metrics.r2:.4f} mse={metrics.mse:.4f} mae={metrics.mae:.4f} (test split)"
    )
    if args.params_out:
        save_model(args.params_out, model, meta)
        print(f"saved parameters to {args.params_out}")
    return 0


def cmd_evaluate(args) -> int:
    model, meta = load_model(args.params)
    indicator = meta.get("indicator")
    if indicator is None:
        raise ConfigError(f"{args.params}: container lacks an indicator echo")
    records = _load_records(args.data)
    dataset = _build_dataset(
        records, indicator, meta.get("test_fraction", 0.2), meta.get("split_seed", 0)
    )
    mask = dataset.train_mask
    if meta.get("kind") == "sage":
        preds = predict(dataset.graph, dataset.x, model)[~mask]
    else:
        preds = predict_baseline(model, dataset.x[~mask])
    metrics = compute_metrics(dataset.y[~mask], preds)
    line = (
        f"{indicator},{meta.get('kind')},"
        f"{metrics.r2!r},{metrics.mse!r},{metrics.mae!r}"
    )
    print(f"indicator,model,r2,mse,mae\n{line}")
    if args.out:
        Path(args.out).write_text(
            f"indicator,model,r2,mse,mae\r\n{line}\r\n", encoding="utf-8"
        )
        print(f"wrote metrics to {args.out}")
    return 0


def cmd_compare(args) -> int:
    records = _load_records(args.data)
    indicators = (
        list(INDICATOR_NAMES)
        if args.indicators == "all"
        else [p.strip() for p in args.indicators.split(",") if p.strip()]
    )
    models = (
        list(KNOWN_MODELS)
        if args.models == "all"
        else [p.strip() for p in args.models.split(",") if p.strip()]
    )
    sage_cfg = _sage_config_from_args(args, 0)
    config = ExperimentConfig(
        master_seed=args.seed,
        sage=sage_cfg,
        mlp_epochs=args.epochs,
        mlp_learning_rate=args.lr_rate,
        jobs=args.jobs,
    )
    datasets = {
        ind: _build_dataset(records, ind, args.test_fraction,
                            cell_seed(args.seed, ind, "split"))
        for ind in indicators
    }
    report = run_experiment(datasets, models, config)
    report.run_info.update(
        {
            "data_path": str(args.data),
            "dataset_checksum": _file_checksum(args.data),
            "test_fraction": args.test_fraction,
            # deliberately excludes --jobs: parallelism must not change the report
            "configs": {
                "sage": {k: (list(v) if isinstance(v, tuple) else v)
                         for k, v in asdict(sage_cfg).items()},
                "mlp": {"epochs": args.epochs, "learning_rate": args.lr_rate},
                "cart": {"max_depth": None, "min_samples_leaf": 1},
            },
        }
    )
    written = emit_report(report, args.out_dir, figures=not args.no_figures)
    for (ind, m) in sorted(report.errors):
        print(f"cell {ind}/{m} failed: {report.errors[(ind, m)]}", file=sys.stderr)
    for ind in indicators:
        for m in models:
            cell = report.cells.get((ind, m))
            if cell:
                print(f"{ind:>22} {m:>5}  r2={cell.r2:+.4f}  mse={cell.mse:.4f}  mae={cell.mae:.4f}")
    print(f"wrote {len(written)} files to {args.out_dir}")
    return 0


def cmd_gradcheck(args) -> int:
    results = gradient_suite(rng_seed=args.seed, n_points=args.points)
    worst = max(results.values())
    for name, err in results.items():
        status = "ok" if err <= GRAD_TOLERANCE else "FAIL"
        print(f"{name:>12}: max relative error {err:.3e}  [{status}]")
    print(f"overall max relative error: {worst:.3e}")
    return 0 if worst <= GRAD_TOLERANCE else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pavesage",
        description="Pavement deterioration models over a road-network graph",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic section inventory CSV")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--routes", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.8, help="spatial correlation strength in [0,1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", default=None)
    p.set_defaults(func=cmd_generate)

    def add_model_flags(p, with_model=True):
        p.add_argument("--epochs", type=int, default=400)
        p.add_argument("--fanouts", default="25,10")
        p.add_argument("--hidden", default="256,256")
        p.add_argument("--lr-rate", type=float, default=0.01)
        p.add_argument("--batch-size", type=int, default=128)
        p.add_argument("--patience", type=int, default=50,
                       help="early-stop patience on test R2; negative disables")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--test-fraction", type=float, default=0.2)

    p = sub.add_parser("train", help="train one model for one indicator")
    p.add_argument("--data", required=True)
    p.add_argument("--indicator", required=True, choices=INDICATOR_NAMES)
    p.add_argument("--model", required=True, choices=KNOWN_MODELS)
    add_model_flags(p)
    p.add_argument("--cart-max-depth", type=int, default=None)
    p.add_argument("--cart-min-leaf", type=int, default=1)
    p.add_argument("--params-out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score saved parameters on a dataset's test split")
    p.add_argument("--data", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="train all requested models and emit a report")
    p.add_argument("--data", required=True)
    p.add_argument("--indicators", default="all")
    p.add_argument("--models", default="all")
    add_model_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="run the finite-difference gradient suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=100)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PavesageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
