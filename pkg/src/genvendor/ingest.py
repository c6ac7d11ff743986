"""Real-data pipeline: weekly meal-demand CSV to per-meal profit tables.

The input is the Kaggle food-demand training CSV (user supplied, never
downloaded): one row per (week, fulfillment center, meal) with the number
of orders, base price, checkout price, and two promotion flags.  The
pipeline treats ``num_orders`` as demand and ``checkout_price`` as price,
builds per-meal feature matrices (treatment-coded center indicators, demand
lagged one and two weeks, promotion flags, optional numeric passthrough
columns), splits
train/test chronologically at a configurable week, and evaluates the
inventory methods at the observed test prices over a grid of cost
settings, reporting average realized profit per method per setting.

Rows lacking either lag demand are dropped rather than zero-filled, so at
most the first two observed weeks per center are lost.  Lag construction is
strictly chronological within each (center, meal) series, so no test-week
information can leak into training features.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines
from .cdgm import TrainConfig, generate_batch, train
from .data import Dataset
from .decisions import CostParams, profit, quantile_index, rho
from .harness import ExperimentReport, ReportRow
from .numerics import RngStream, derive_stream, fold_seed

__all__ = [
    "REQUIRED_COLUMNS",
    "REAL_DATA_METHODS",
    "MealRecord",
    "FeatureSpec",
    "LoadResult",
    "load_csv",
    "build_dataset",
    "cost_grid",
    "run_real_data",
]

REQUIRED_COLUMNS = (
    "week",
    "center_id",
    "meal_id",
    "checkout_price",
    "base_price",
    "emailer_for_promotion",
    "homepage_featured",
    "num_orders",
)

#: Same comparison set as the continuous-price inventory study.
REAL_DATA_METHODS = ("saa", "erm_lr", "erm_nn", "ko", "rbe", "cdgm")

#: Numeric record fields that may be passed through as extra features.
_PASSTHROUGH_FIELDS = ("base_price", "week")


@dataclass(frozen=True)
class MealRecord:
    """One weekly observation of a meal at a fulfillment center."""

    week: int
    center_id: str
    meal_id: str
    checkout_price: float
    base_price: float
    emailer_for_promotion: int
    homepage_featured: int
    num_orders: float

    def __post_init__(self) -> None:
        if self.week < 1:
            raise ValueError(f"week must be >= 1, got {self.week}")
        if not (self.checkout_price > 0 and self.base_price > 0):
            raise ValueError("prices must be positive")
        if self.emailer_for_promotion not in (0, 1) or self.homepage_featured not in (0, 1):
            raise ValueError("promotion flags must be binary")
        if not (self.num_orders >= 0 and float(self.num_orders).is_integer()):
            raise ValueError(f"num_orders must be a nonnegative integer, got {self.num_orders}")


@dataclass(frozen=True)
class FeatureSpec:
    """Which meal to model and how to featurize it."""

    meal_id: str
    split_week: int = 120
    numeric_passthrough: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "meal_id", str(self.meal_id))
        bad = [c for c in self.numeric_passthrough if c not in _PASSTHROUGH_FIELDS]
        if bad:
            raise ValueError(f"unknown passthrough columns {bad}; allowed: {list(_PASSTHROUGH_FIELDS)}")
        if self.split_week < 1:
            raise ValueError("split_week must be >= 1")


@dataclass(frozen=True)
class LoadResult:
    """Parsed records plus the 1-based line numbers of skipped rows."""

    records: tuple[MealRecord, ...]
    skipped_lines: tuple[int, ...]

    @property
    def skipped_count(self) -> int:
        return len(self.skipped_lines)


def _parse_record(row: dict[str, str]) -> MealRecord:
    orders = float(row["num_orders"])
    return MealRecord(
        week=int(row["week"]),
        center_id=str(row["center_id"]).strip(),
        meal_id=str(row["meal_id"]).strip(),
        checkout_price=float(row["checkout_price"]),
        base_price=float(row["base_price"]),
        emailer_for_promotion=int(row["emailer_for_promotion"]),
        homepage_featured=int(row["homepage_featured"]),
        num_orders=orders,
    )


def load_csv(path: str | Path) -> LoadResult:
    """Parse the weekly-demand CSV into typed records.

    The header must contain all required columns (any order; extra columns
    such as ``id`` are ignored).  Malformed rows are skipped and reported by
    line number rather than aborting the run.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    records: list[MealRecord] = []
    skipped: list[int] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected a CSV header")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: header is missing required columns {missing}")
        for row in reader:
            try:
                records.append(_parse_record(row))
            except (TypeError, ValueError):
                skipped.append(reader.line_num)
    return LoadResult(records=tuple(records), skipped_lines=tuple(skipped))


def _lagged_rows(records: list[MealRecord]) -> list[tuple[MealRecord, float, float]]:
    """Per-center chronological (record, lag-1 demand, lag-2 demand) triples.

    A row is kept only when the same center has observations exactly one and
    two weeks earlier; this uses week arithmetic, not positional order, so
    gaps in the series drop the rows after the gap rather than mislabeling
    lags.
    """
    by_center: dict[str, dict[int, MealRecord]] = {}
    for rec in records:
        weeks = by_center.setdefault(rec.center_id, {})
        if rec.week in weeks:
            raise ValueError(f"duplicate observation for center {rec.center_id}, week {rec.week}")
        weeks[rec.week] = rec
    out = []
    for center in sorted(by_center):
        weeks = by_center[center]
        for week in sorted(weeks):
            prev1, prev2 = weeks.get(week - 1), weeks.get(week - 2)
            if prev1 is None or prev2 is None:
                continue
            out.append((weeks[week], prev1.num_orders, prev2.num_orders))
    return out


def build_dataset(records, spec: FeatureSpec) -> tuple[Dataset, Dataset]:
    """Per-meal train/test Datasets with the per-meal encoding.

    Features per row: treatment-coded center indicators (sorted ids, first
    center is the all-zeros reference so linear models with an intercept
    stay full rank), lag-1 and lag-2 demand, the two promotion flags, then
    any passthrough columns.  Demand is ``num_orders`` and price is
    ``checkout_price``.  The split is chronological: weeks <=
    ``spec.split_week`` train, later weeks test.
    """
    if isinstance(records, LoadResult):
        records = records.records
    meal_rows = [r for r in records if r.meal_id == spec.meal_id]
    if not meal_rows:
        raise ValueError(f"meal {spec.meal_id!r} not present in the records")
    centers = sorted({r.center_id for r in meal_rows})
    coded_centers = centers[1:]  # centers[0] is the reference level
    lagged = _lagged_rows(meal_rows)
    if not lagged:
        raise ValueError(f"meal {spec.meal_id!r} has no rows with both lag demands available")

    def featurize(rec: MealRecord, lag1: float, lag2: float) -> list[float]:
        onehot = [1.0 if rec.center_id == c else 0.0 for c in coded_centers]
        extras = [float(getattr(rec, col)) for col in spec.numeric_passthrough]
        return onehot + [lag1, lag2, float(rec.emailer_for_promotion), float(rec.homepage_featured)] + extras

    def to_dataset(rows) -> Dataset:
        X = np.array([featurize(rec, l1, l2) for rec, l1, l2 in rows], dtype=float)
        p = np.array([rec.checkout_price for rec, _, _ in rows], dtype=float)
        d = np.array([rec.num_orders for rec, _, _ in rows], dtype=float)
        return Dataset(X, p, d)

    train_rows = [t for t in lagged if t[0].week <= spec.split_week]
    test_rows = [t for t in lagged if t[0].week > spec.split_week]
    if not train_rows or not test_rows:
        side = "training" if not train_rows else "test"
        raise ValueError(f"split week {spec.split_week} leaves the {side} side empty for meal {spec.meal_id!r}")
    return to_dataset(train_rows), to_dataset(test_rows)


def cost_grid() -> tuple[CostParams, ...]:
    """The 12 evaluation cost settings: s in {0,50,100} by c in {150..300}."""
    return tuple(
        CostParams(c=float(c), s=float(s), p_max=math.inf)
        for s in (0.0, 50.0, 100.0)
        for c in (150.0, 200.0, 250.0, 300.0)
    )


def _erm_quantity(model, test: Dataset, costs: CostParams, mean_price: float) -> np.ndarray:
    if mean_price <= costs.c:
        return np.zeros(test.n)
    return np.asarray(model.predict(test.xp_matrix()), dtype=float)


def run_real_data(
    train_data: Dataset,
    test_data: Dataset,
    *,
    meal_label: str,
    methods: tuple[str, ...] = REAL_DATA_METHODS,
    costs: tuple[CostParams, ...] | None = None,
    train_cfg: TrainConfig | None = None,
    seed: int = 0,
) -> ExperimentReport:
    """Inventory decisions at observed test prices, averaged-profit metric.

    Training happens once per method (cost-free); decisions are recomputed
    per cost setting.  Whenever a test price does not exceed the unit cost,
    every method orders zero (stocking anything cannot beat zero profit).
    ERM models follow the real-data protocol: one fit per cost setting at
    the quantile level implied by the mean training price.
    """
    for m in methods:
        if m not in REAL_DATA_METHODS:
            raise ValueError(f"unknown real-data method {m!r}; expected one of {REAL_DATA_METHODS}")
    costs = cost_grid() if costs is None else tuple(costs)
    base_cfg = train_cfg or TrainConfig()
    # Real demand lives on its own scale; the synthetic clip range must not cap it.
    base_cfg = dataclasses.replace(base_cfg, clip=(0.0, math.inf))
    mean_price = float(np.mean(train_data.prices))
    test_prices = test_data.prices
    test_X = test_data.xp_matrix()

    fitted: dict[str, object] = {}
    for m in methods:
        if m == "cdgm":
            fitted[m] = train(train_data, dataclasses.replace(base_cfg, seed=fold_seed(seed, "real", meal_label, m)))
        elif m == "ko":
            fitted[m] = baselines.silverman_bandwidths(train_data)
        elif m == "rbe":
            fitted[m] = baselines.rbe_fit(train_data)

    erm_cache: dict[tuple[str, float], object] = {}

    def quantities(method: str, cp: CostParams) -> np.ndarray:
        feasible = test_prices > cp.c
        out = np.zeros(test_data.n)
        if not feasible.any():
            return out
        idx = np.flatnonzero(feasible)
        if method == "saa":
            for i in idx:
                out[i] = baselines.saa_decide(train_data, None, test_prices[i], cp)
        elif method in ("erm_lr", "erm_nn"):
            if mean_price <= cp.c:
                return out
            level = rho(mean_price, cp)
            key = (method, round(level, 12))
            if key not in erm_cache:
                form = "linear" if method == "erm_lr" else "neural"
                erm_cache[key] = baselines.erm_fit(
                    train_data,
                    level,
                    form,
                    epochs=base_cfg.epochs,
                    batch_size=base_cfg.batch_size,
                    seed=fold_seed(seed, "real", meal_label, method, f"tau-{level:.12g}"),
                )
            out[idx] = np.asarray(erm_cache[key].predict(test_X[idx]), dtype=float)
        elif method == "ko":
            for i in idx:
                out[i] = baselines.ko_decide(train_data, test_data.features[i], test_prices[i], cp, fitted[method])
        elif method == "rbe":
            for i in idx:
                out[i] = baselines.rbe_decide(fitted[method], test_data.features[i], test_prices[i], cp)
        elif method == "cdgm":
            gen = fitted[method]
            rng = RngStream(fold_seed(seed, "real", meal_label, "cdgm-decide"), ("real", "generate"))
            samples = generate_batch(gen, list(test_data.features[idx]), test_prices[idx], 2000, rng)
            levels = [rho(p, cp) for p in test_prices[idx]]
            cols = np.array([quantile_index(samples.shape[1], lv) - 1 for lv in levels])
            out[idx] = np.take_along_axis(samples, cols[:, None], axis=1)[:, 0]
        return out

    rows: list[ReportRow] = []
    for m in methods:
        for cp in costs:
            q = quantities(m, cp)
            avg = float(np.mean(profit(test_data.demands, test_prices, q, cp)))
            rows.append(
                ReportRow(
                    dgp=meal_label,
                    mode="real",
                    method=m,
                    metric=f"avg_profit_c{cp.c:g}_s{cp.s:g}",
                    price="",
                    mean=avg,
                    std=None,
                    reps=1,
                    raw=(avg,),
                )
            )
    config = {
        "experiment": "real-data",
        "meal": meal_label,
        "methods": list(methods),
        "seed": seed,
        "split": {"train_rows": train_data.n, "test_rows": test_data.n},
        "train": dataclasses.asdict(base_cfg),
        "cost_settings": [{"c": cp.c, "s": cp.s} for cp in costs],
    }
    return ExperimentReport(config=config, rows=tuple(rows))
