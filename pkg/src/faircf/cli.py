"""``faircf`` command line: synth, train, explain, experiment.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .data import SyntheticSpec, generate_synthetic, fit_standardizer, load_csv, save_csv
from .errors import DimensionMismatch, FairCFError
from .explain import CfConfig, Method, closest_counterfactual, plausible_counterfactual
from .fairness import FairCfConfig, disadvantaged_pool, fair_counterfactual, load_pools, sample_z
from .harness import FAIR_SCOPES, ExperimentConfig, emit_report, run_experiment, write_outputs
from .model import TRAINERS, TrainConfig, accuracy, load_model, save_model, train

log = logging.getLogger("faircf")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="faircf", description="Group-fair counterfactual explanations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset CSV (label column y, group column g)")
    p.add_argument("--n-per-cell", type=int, default=100, help="samples per (group, class) cell")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--separation", type=float, default=2.0)
    p.add_argument("--disparity", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("train", help="train a classifier and save it as JSON")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--clf", required=True, choices=sorted(TRAINERS))
    p.add_argument("--label-col", default="y")
    p.add_argument("--group-col", default="g")
    p.add_argument("--no-standardize", action="store_true", help="train on raw feature units")
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("explain", help="compute one counterfactual and print it as JSON")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--input", required=True, help="comma-separated feature values")
    p.add_argument("--mode", choices=["closest", "plausible"], default="closest")
    p.add_argument("--candidates", type=Path, help="CSV of candidate samples (plausible mode)")
    p.add_argument("--label-col", default="y")
    p.add_argument("--group-col", default="g")
    p.add_argument("--fair", action="store_true", help="compute a group-fair counterfactual")
    p.add_argument("--pools", type=Path, help="group_id,cost CSV of per-group counterfactual costs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c0", type=float, default=100.0)
    p.add_argument("--c1", type=float, default=10.0)
    p.add_argument("--margin", type=float, default=0.05)

    p = sub.add_parser("experiment", help="run the cross-validated fairness experiment")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="numeric CSV dataset")
    src.add_argument("--synth-spec", help="e.g. n_per_cell=100,dim=5,separation=2,disparity=3,seed=0")
    p.add_argument("--clf", required=True, choices=sorted(TRAINERS))
    p.add_argument("--mode", choices=["closest", "plausible"], default="closest")
    p.add_argument("--c0", type=float, default=100.0)
    p.add_argument("--c1", type=float, default=10.0)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--fair-scope", choices=list(FAIR_SCOPES), default="all",
                   help="which explained samples receive fair CFs (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--label-col", default="y")
    p.add_argument("--group-col", default="g")
    std = p.add_mutually_exclusive_group()
    std.add_argument("--standardize", dest="standardize", action="store_true", default=None)
    std.add_argument("--no-standardize", dest="standardize", action="store_false")
    p.add_argument("--workers", type=int, help="worker processes (default: $FAIRCF_THREADS or CPU count)")
    p.add_argument("--no-figure", action="store_true", help="skip the PNG histogram")
    p.add_argument("--out-dir", required=True, type=Path)
    return parser


def cmd_synth(args) -> int:
    spec = SyntheticSpec(args.n_per_cell, args.dim, args.separation, args.disparity, args.seed)
    data = generate_synthetic(spec)
    save_csv(data, args.out)
    log.info("wrote %d rows to %s", data.n, args.out)
    return 0


def cmd_train(args) -> int:
    data = load_csv(args.data, args.label_col, args.group_col)
    std = None if args.no_standardize else fit_standardizer(data)
    if std is not None:
        data = std.apply(data)
    config = TrainConfig(learning_rate=args.lr, epochs=args.epochs, max_depth=args.max_depth,
                         min_leaf=args.min_leaf)
    model = train(args.clf, data, config)
    save_model(args.out, model, std)
    print(json.dumps({"model": str(args.out), "kind": model.kind, "train_accuracy": accuracy(model, data)}))
    return 0


def cmd_explain(args) -> int:
    model, std = load_model(args.model)
    try:
        x = np.array([float(v) for v in args.input.split(",")], dtype=float)
    except ValueError:
        raise FairCFError(f"--input must be comma-separated numbers, got {args.input!r}") from None
    if x.shape[0] != model.dim:
        raise DimensionMismatch(f"input has {x.shape[0]} features, model expects {model.dim}")
    to_model = std.transform if std else (lambda v: np.asarray(v, dtype=float))
    to_raw = std.inverse if std else (lambda v: np.asarray(v, dtype=float))
    x_model = to_model(x)

    candidates = None
    if args.mode == "plausible":
        if args.candidates is None:
            raise FairCFError("plausible mode needs --candidates")
        candidates = to_model(load_csv(args.candidates, args.label_col, args.group_col).X)

    base = CfConfig(loss_weight=args.c0, margin=args.margin)
    out = {}
    if args.fair:
        if args.pools is None:
            raise FairCFError("--fair needs --pools")
        p0, p1 = load_pools(args.pools)
        pool = disadvantaged_pool(p0, p1) if len(p0) and len(p1) else (p0 if len(p0) else p1)
        z = sample_z(pool, np.random.default_rng(args.seed))
        cfg = FairCfConfig(c0=args.c0, c1=args.c1, seed=args.seed, base=base)
        result = fair_counterfactual(model, x_model, z, cfg, Method(args.mode), candidates)
        out["z"] = z
    elif args.mode == "plausible":
        result = plausible_counterfactual(model, x_model, candidates)
    else:
        result = closest_counterfactual(model, x_model, base)

    doc = {
        "x_orig": [float(v) for v in x],
        "x_cf": [float(v) for v in to_raw(result.x_cf)],
        "y_cf": result.y_cf,
        "cost": result.cost,
        "valid": bool(result.valid),
        "method": result.method.value,
        **out,
    }
    print(json.dumps(doc))
    return 0


def cmd_experiment(args) -> int:
    source = args.data if args.data is not None else SyntheticSpec.parse(args.synth_spec)
    config = ExperimentConfig(
        classifier=args.clf,
        mode=Method(args.mode),
        folds=args.folds,
        fair=FairCfConfig(c0=args.c0, c1=args.c1, seed=args.seed),
        source=source,
        seed=args.seed,
        standardize=args.standardize,
        label_column=args.label_col,
        group_column=args.group_col,
        workers=args.workers,
        fair_scope=args.fair_scope,
    )
    report = run_experiment(config)
    paths = write_outputs(report, args.out_dir, figure=not args.no_figure)
    sys.stdout.write(emit_report(report, "markdown"))
    log.info("wrote %s", ", ".join(str(p) for p in paths.values()))
    return 0


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "explain": cmd_explain, "experiment": cmd_experiment}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (FairCFError, OSError, ValueError) as e:
        print(f"faircf: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
