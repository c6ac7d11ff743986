"""Command-line front end: experiments, training, decisions, real data.

Subcommands
-----------
simulate     Run a replicated synthetic experiment and write a report.
train        Train a generator (synthetic corpus or Dataset CSV) and save it.
decide       Load a saved generator and print a decision — no retraining,
             no historical data required.
real-data    Run the real-data protocol on a weekly meal-demand CSV.
convergence  Probe the decision gap at increasing training sizes.

Configuration comes from an optional TOML or JSON file (``--config``) with
CLI flags taking precedence; unknown config keys are rejected.  Every
artifact embeds the effective configuration and the package version.  The
output directory defaults to ``$GENVENDOR_OUT`` or the working directory.

Exit codes: 0 success, 64 bad flags, 65 bad config, 70 runtime failure,
74 I/O failure.  Errors print one line to stderr in the form
``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .cdgm import Generator, TrainConfig, load, save, train
from .data import Dataset
from .decisions import CostParams, build_price_grid, inventory_decision, joint_decision
from .dgp import KINDS, PRICE_RANGES, make_corpus, make_oracle
from .harness import (
    INVENTORY_METHODS,
    JOINT_METHODS,
    ExperimentConfig,
    ExperimentReport,
    convergence_probe,
    run_inventory_experiment,
    run_joint_experiment,
    write_report,
)
from .ingest import FeatureSpec, build_dataset, load_csv, run_real_data
from .numerics import RngStream

__all__ = ["run", "main"]

_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}
_SIMULATE_KEYS = {
    "experiment",
    "dgp",
    "mode",
    "n",
    "n_test",
    "reps",
    "methods",
    "M",
    "grid_J",
    "window",
    "seed",
    "text",
    "format",
    "train",
}
_TRAIN_CMD_KEYS = {"dgp", "mode", "n", "seed", "format", "train", "data"}
_REAL_KEYS = {"csv", "meals", "split_week", "seed", "methods", "format", "train"}
_CONVERGENCE_KEYS = {"dgp", "n_list", "reps", "n_test", "M", "seed", "format", "train"}


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: D102 - argparse hook
        raise _ArgError(message)


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    if p.suffix == ".toml":
        return tomllib.loads(p.read_text())
    if p.suffix == ".json":
        payload = json.loads(p.read_text())
        if not isinstance(payload, dict):
            raise ValueError(f"config file {p} must contain a JSON object")
        return payload
    raise ValueError(f"config file must end in .toml or .json, got {p.suffix!r}")


def _check_keys(cfg: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ValueError(f"unknown {where} config keys {unknown}; allowed: {sorted(allowed)}")


def _train_config(cfg: dict) -> TrainConfig:
    _check_keys(cfg, _TRAIN_KEYS, "train")
    coerced = dict(cfg)
    for key in ("hidden", "clip"):
        if key in coerced and coerced[key] is not None:
            coerced[key] = tuple(coerced[key])
    return TrainConfig(**coerced)


def _merge(file_cfg: dict, flag_values: dict) -> dict:
    merged = dict(file_cfg)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value
    return merged


def _methods_tuple(value) -> tuple[str, ...]:
    if isinstance(value, str):
        return tuple(m.strip() for m in value.split(",") if m.strip())
    return tuple(value)


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get("GENVENDOR_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(report: ExperimentReport, out: Path, stem: str, fmt: str) -> list[Path]:
    fmt = fmt or "csv"
    if fmt not in ("csv", "json", "both"):
        raise ValueError(f"unknown report format {fmt!r}; expected csv, json, or both")
    written = []
    for f in ("csv", "json"):
        if fmt in (f, "both"):
            path = out / f"{stem}.{f}"
            write_report(report, path, format=f)
            written.append(path)
    return written


def _parse_x(arg: str | None) -> np.ndarray:
    if not arg:
        return np.zeros(0)
    return np.array([float(v) for v in arg.split(",")], dtype=float)


def _parse_grid(arg: str) -> list[float]:
    if ":" in arg:
        lo_s, hi_s, j_s = arg.split(":")
        return build_price_grid(interval=(float(lo_s), float(hi_s)), J=int(j_s))
    return build_price_grid(prices=[float(v) for v in arg.split(",")])


def _build_parser() -> _Parser:
    parser = _Parser(prog="genvendor", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"genvendor {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="TOML or JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory (default $GENVENDOR_OUT or cwd)")
        sp.add_argument("--format", choices=("csv", "json", "both"))
        sp.add_argument("--epochs", type=int, help="training epochs override")

    sim = sub.add_parser("simulate", help="run a replicated synthetic experiment")
    common(sim)
    sim.add_argument("--dgp", help=f"DGP kind, one of {KINDS}")
    sim.add_argument("--mode", choices=("discrete", "continuous"))
    sim.add_argument("--experiment", choices=("inventory", "joint"))
    sim.add_argument("--reps", type=int)
    sim.add_argument("--n", type=int)
    sim.add_argument("--n-test", dest="n_test", type=int)
    sim.add_argument("--methods", help="comma-separated method names")
    sim.add_argument("--samples", dest="M", type=int, help="generated demand samples per decision")
    sim.add_argument("--grid-j", dest="grid_J", type=int, help="number of grid prices")
    sim.add_argument("--text", action="store_true", default=None, help="use textual features (kind e)")

    tr = sub.add_parser("train", help="train a generator and save it")
    common(tr)
    tr.add_argument("--dgp", help="synthesize the corpus from this DGP kind")
    tr.add_argument("--data", help="train from a Dataset CSV instead of a DGP")
    tr.add_argument("--mode", choices=("discrete", "continuous"), help="historical price pattern")
    tr.add_argument("--n", type=int, help="corpus size when synthesizing")
    tr.add_argument("--strategy", choices=("energy_score", "adversarial"))

    de = sub.add_parser("decide", help="decide from a saved generator (no data needed)")
    de.add_argument("--model", required=True, help="generator file written by `train`")
    de.add_argument("--price", type=float, help="inventory decision at this price")
    de.add_argument("--grid", help="joint decision over lo:hi:J or p1,p2,...")
    de.add_argument("--x", help="comma-separated numeric features")
    de.add_argument("--text", help="textual features (for text generators)")
    de.add_argument("--cost-c", type=float, default=1.0)
    de.add_argument("--cost-s", type=float, default=0.5)
    de.add_argument("--samples", dest="M", type=int, default=2000)
    de.add_argument("--seed", type=int, default=0)

    rd = sub.add_parser("real-data", help="run the real-data protocol on a demand CSV")
    common(rd)
    rd.add_argument("--csv", help="weekly demand CSV file")
    rd.add_argument("--meals", help="comma-separated meal ids")
    rd.add_argument("--split-week", dest="split_week", type=int)
    rd.add_argument("--methods", help="comma-separated method names")

    cv = sub.add_parser("convergence", help="probe the decision gap vs training size")
    common(cv)
    cv.add_argument("--dgp", help=f"DGP kind, one of {KINDS}")
    cv.add_argument("--n-list", dest="n_list", help="comma-separated training sizes")
    cv.add_argument("--reps", type=int)
    cv.add_argument("--n-test", dest="n_test", type=int)
    cv.add_argument("--samples", dest="M", type=int)
    return parser


def _experiment_config(merged: dict) -> ExperimentConfig:
    train_cfg = _train_config(merged.get("train", {}))
    kwargs = {}
    mapping = {
        "dgp": "kind",
        "mode": "price_mode",
        "n": "n",
        "n_test": "n_test",
        "reps": "replications",
        "M": "M",
        "grid_J": "grid_J",
        "window": "window",
        "seed": "seed",
        "text": "text",
    }
    for src, dst in mapping.items():
        if merged.get(src) is not None:
            kwargs[dst] = merged[src]
    if merged.get("methods") is not None:
        kwargs["methods"] = _methods_tuple(merged["methods"])
    return ExperimentConfig(train=train_cfg, **kwargs)


def _cmd_simulate(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    _check_keys(file_cfg, _SIMULATE_KEYS, "simulate")
    merged = _merge(
        file_cfg,
        {
            "experiment": args.experiment,
            "dgp": args.dgp,
            "mode": args.mode,
            "reps": args.reps,
            "n": args.n,
            "n_test": args.n_test,
            "methods": args.methods,
            "M": args.M,
            "grid_J": args.grid_J,
            "seed": args.seed,
            "text": args.text,
            "format": args.format,
        },
    )
    if args.epochs is not None:
        merged.setdefault("train", {})
        merged["train"] = {**merged["train"], "epochs": args.epochs}
    experiment = merged.pop("experiment", None) or "inventory"
    if experiment not in ("inventory", "joint"):
        raise ValueError(f"unknown experiment {experiment!r}; expected 'inventory' or 'joint'")
    fmt = merged.pop("format", None) or "csv"
    cfg = _experiment_config(merged)
    if experiment == "inventory":
        defaults = tuple(m for m in cfg.methods if m in INVENTORY_METHODS) or cfg.methods
        report = run_inventory_experiment(dataclasses.replace(cfg, methods=defaults) if defaults != cfg.methods else cfg)
    else:
        report = run_joint_experiment(cfg)
    out = _out_dir(args.out)
    written = _emit(report, out, f"report-{experiment}-{cfg.kind}-{cfg.price_mode}", fmt)
    for path in written:
        print(path)
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    _check_keys(file_cfg, _TRAIN_CMD_KEYS, "train")
    merged = _merge(
        file_cfg,
        {"dgp": args.dgp, "data": args.data, "mode": args.mode, "n": args.n, "seed": args.seed},
    )
    train_over = dict(merged.get("train", {}))
    if args.epochs is not None:
        train_over["epochs"] = args.epochs
    if args.strategy is not None:
        train_over["strategy"] = args.strategy
    if merged.get("seed") is not None:
        train_over.setdefault("seed", merged["seed"])
    cfg = _train_config(train_over)

    if merged.get("data"):
        data_path = Path(merged["data"])
        if not data_path.exists():
            raise FileNotFoundError(f"dataset CSV not found: {data_path}")
        data = Dataset.load_csv(data_path)
        tag = data_path.stem
    else:
        kind = merged.get("dgp")
        if kind is None:
            raise ValueError("train needs either --dgp or --data")
        seed = merged.get("seed") or 0
        oracle = make_oracle(kind, seed)
        mode = merged.get("mode") or "discrete"
        n = merged.get("n") or 2000
        price_set = (
            build_price_grid(interval=PRICE_RANGES[kind], J=21) if mode == "discrete" else PRICE_RANGES[kind]
        )
        data = make_corpus(oracle, n, price_set, RngStream(seed, ("cli", "train", "corpus", kind)))
        tag = kind

    gen = train(data, cfg)
    out = _out_dir(args.out)
    path = out / f"generator-{tag}.json"
    path.write_bytes(save(gen))
    print(path)
    return 0


def _cmd_decide(args: argparse.Namespace) -> int:
    model_path = Path(args.model)
    if not model_path.exists():
        raise FileNotFoundError(f"generator file not found: {model_path}")
    gen = load(model_path.read_bytes())
    if (args.price is None) == (args.grid is None):
        raise ValueError("decide needs exactly one of --price (inventory) or --grid (joint)")
    x = args.text if args.text is not None else _parse_x(args.x)
    costs = CostParams(c=args.cost_c, s=args.cost_s, p_max=np.inf)
    rng = RngStream(args.seed, ("cli", "decide"))
    if args.price is not None:
        samples = gen.generate(x, args.price, args.M, rng)
        q = inventory_decision(samples, args.price, costs)
        print(f"q={q:.6g}")
    else:
        grid = _parse_grid(args.grid)
        decision = joint_decision(gen, x, grid, args.M, costs, rng)
        print(f"p={decision.price:.6g} q={decision.quantity:.6g} estimated_profit={decision.estimated_profit:.6g}")
    return 0


def _cmd_real_data(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    _check_keys(file_cfg, _REAL_KEYS, "real-data")
    merged = _merge(
        file_cfg,
        {
            "csv": args.csv,
            "meals": args.meals,
            "split_week": args.split_week,
            "seed": args.seed,
            "methods": args.methods,
            "format": args.format,
        },
    )
    if not merged.get("csv"):
        raise ValueError("real-data needs --csv (or a `csv` config key)")
    if not merged.get("meals"):
        raise ValueError("real-data needs --meals (or a `meals` config key)")
    train_over = dict(merged.get("train", {}))
    if args.epochs is not None:
        train_over["epochs"] = args.epochs
    train_cfg = _train_config(train_over)
    meals = [str(m) for m in _methods_tuple(merged["meals"])]
    methods = _methods_tuple(merged["methods"]) if merged.get("methods") else None
    seed = merged.get("seed") or 0
    split_week = merged.get("split_week") or 120

    loaded = load_csv(merged["csv"])
    if loaded.skipped_count:
        print(f"skipped {loaded.skipped_count} malformed rows (lines {list(loaded.skipped_lines)})", file=sys.stderr)
    all_rows = []
    meal_configs = {}
    for meal in meals:
        spec = FeatureSpec(meal_id=meal, split_week=split_week)
        train_ds, test_ds = build_dataset(loaded.records, spec)
        kwargs = {"meal_label": meal, "train_cfg": train_cfg, "seed": seed}
        if methods:
            kwargs["methods"] = methods
        report = run_real_data(train_ds, test_ds, **kwargs)
        all_rows.extend(report.rows)
        meal_configs[meal] = report.config
    merged_report = ExperimentReport(
        config={
            "experiment": "real-data",
            "csv": str(merged["csv"]),
            "meals": meals,
            "split_week": split_week,
            "seed": seed,
            "skipped_rows": loaded.skipped_count,
            "train": dataclasses.asdict(train_cfg),
        },
        rows=tuple(all_rows),
    )
    out = _out_dir(args.out)
    for path in _emit(merged_report, out, "report-real-data", merged.get("format") or "csv"):
        print(path)
    return 0


def _cmd_convergence(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config) if args.config else {}
    _check_keys(file_cfg, _CONVERGENCE_KEYS, "convergence")
    merged = _merge(
        file_cfg,
        {
            "dgp": args.dgp,
            "n_list": args.n_list,
            "reps": args.reps,
            "n_test": args.n_test,
            "M": args.M,
            "seed": args.seed,
            "format": args.format,
        },
    )
    kind = merged.get("dgp")
    if kind is None:
        raise ValueError("convergence needs --dgp")
    raw_list = merged.get("n_list") or "200,2000"
    n_list = [int(v) for v in (raw_list.split(",") if isinstance(raw_list, str) else raw_list)]
    reps = merged.get("reps") or 3
    train_over = dict(merged.get("train", {}))
    if args.epochs is not None:
        train_over["epochs"] = args.epochs
    base = ExperimentConfig(
        kind=kind,
        methods=("cdgm",),
        replications=reps,
        n_test=merged.get("n_test") or 200,
        M=merged.get("M") or 2000,
        seed=merged.get("seed") or 0,
        train=_train_config(train_over),
    )
    report = convergence_probe(kind, n_list, reps, cfg=base)
    out = _out_dir(args.out)
    for path in _emit(report, out, f"report-convergence-{kind}", merged.get("format") or "csv"):
        print(path)
    return 0


_DISPATCH = {
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "decide": _cmd_decide,
    "real-data": _cmd_real_data,
    "convergence": _cmd_convergence,
}


def run(argv: list[str] | None = None) -> int:
    """Parse argv and execute; returns a process exit code (never raises)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 64
    except SystemExit as exc:  # --help / --version exit through argparse
        return 0 if exc.code in (0, None) else 64
    try:
        return _DISPATCH[args.cmd](args)
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 65
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 74
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps all else to 70
        print(f"error: runtime: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 70


def main() -> None:
    sys.exit(run())
