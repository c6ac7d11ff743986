"""Replicated experiment harness: protocols, metrics, and reports.

Two experiment families, each run over independent replications (fresh
process coefficients, fresh corpus, fresh test data per replication):

- Inventory: every method decides a quantity at given
  prices; the metric is the excess-risk estimate

      L_test(p) = mean_i [ Pi(d_i, p, q*(x_i, p)) - Pi(d_i, p, q_hat(x_i, p)) ]

  against the oracle quantile decision q*, with the realized test demands
  d_i shared across methods.  Discrete mode evaluates n_test fresh feature
  draws at every admissible grid price and reports per-price plus
  price-averaged rows; continuous mode evaluates n_test (feature, uniform
  price) pairs and reports the overall average.

- Joint: methods choose (price, quantity) per test feature;
  realized demand is then drawn at the chosen price, with the same
  demand-noise draw shared across methods per test point (common random
  numbers), and the metric is mean realized profit.

Decision-side price grids exclude prices at or below cost (where the
critical ratio is undefined and ordering nothing is trivially optimal);
corpora still contain such historical prices when the process allows them.

Reports carry per-replication raw values, replication mean/std, the full
config echo and the package version, and serialize byte-identically for
identical config+seed (CSV schema ``dgp,mode,method,metric,price,mean,
std,reps``; JSON mirror with raw arrays).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines
from .cdgm import Generator, TrainConfig, generate_batch, train
from .data import Dataset
from .decisions import CostParams, build_price_grid, profit, quantile_index, rho
from .dgp import KINDS, PRICE_RANGES, OracleModel, demand_from_noise, make_corpus, make_oracle, oracle_quantile, sample_features
from .numerics import RngStream, derive_stream, fold_seed

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "ReportRow",
    "INVENTORY_METHODS",
    "JOINT_METHODS",
    "run_inventory_experiment",
    "run_joint_experiment",
    "convergence_probe",
    "write_report",
    "read_report_csv",
]

from . import __version__ as _VERSION

INVENTORY_METHODS = ("oracle", "saa", "erm_lr", "erm_nn", "ko", "rbe", "cdgm")
JOINT_METHODS = ("oracle", "saa_joint", "rbe", "prescriptive", "cdgm", "cdgm_text")

#: Monte Carlo draws used by the oracle joint policy's expected-profit grid
#: search (a test/benchmark reference, not a competing method).
_ORACLE_JOINT_MC = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration for one experiment (desk-scale defaults).

    ``n_test`` counts test features per price in discrete inventory mode and
    total test points otherwise.  ``M`` is the number of generated demand
    samples behind each cDGM decision; ``grid_J`` the number of grid prices.
    ``window`` restricts SAA to records within that price distance (None =
    the pooled default).  Training hyperparameters live in ``train`` (its
    seed is re-derived per replication and per method).
    """

    kind: str = "a"
    price_mode: str = "discrete"
    n: int = 2000
    n_test: int = 200
    replications: int = 10
    methods: tuple[str, ...] = ("saa", "rbe", "cdgm")
    costs: CostParams = field(default_factory=CostParams)
    M: int = 2000
    grid_J: int = 21
    window: float | None = None
    text: bool = False
    seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown DGP kind {self.kind!r}; expected one of {KINDS}")
        if self.price_mode not in ("discrete", "continuous"):
            raise ValueError(f"price_mode must be 'discrete' or 'continuous', got {self.price_mode!r}")
        if min(self.n, self.n_test, self.replications, self.M, self.grid_J) < 1:
            raise ValueError("n, n_test, replications, M and grid_J must be positive")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        object.__setattr__(self, "methods", tuple(self.methods))

    def price_interval(self) -> tuple[float, float]:
        return PRICE_RANGES[self.kind]

    def full_grid(self) -> list[float]:
        """The historical price set (may include prices at or below cost)."""
        return build_price_grid(interval=self.price_interval(), J=self.grid_J)

    def decision_grid(self) -> list[float]:
        """Grid prices usable for decisions: strictly above cost."""
        grid = [p for p in self.full_grid() if p > self.costs.c]
        if not grid:
            raise ValueError("no grid price exceeds the unit cost")
        return grid

    def corpus_price_set(self):
        return self.full_grid() if self.price_mode == "discrete" else self.price_interval()


@dataclass(frozen=True)
class ReportRow:
    """One aggregate cell: replication mean/std plus the raw values."""

    dgp: str
    mode: str
    method: str
    metric: str
    price: str
    mean: float
    std: float | None
    reps: int
    raw: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated experiment results with full config echo."""

    config: dict
    rows: tuple[ReportRow, ...]
    version: str = _VERSION


def _aggregate(values: list[float]) -> tuple[float, float | None]:
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) >= 2 else None
    return mean, std


def _config_echo(cfg: ExperimentConfig, extra: dict | None = None) -> dict:
    echo = dataclasses.asdict(cfg)
    if extra:
        echo.update(extra)
    return echo


def _train_config_for(cfg: ExperimentConfig, tag: str, rep: int, method: str) -> TrainConfig:
    seed = fold_seed(cfg.seed, tag, cfg.kind, cfg.price_mode, f"rep-{rep}", method)
    return dataclasses.replace(cfg.train, seed=seed)


def _rep_stream(cfg: ExperimentConfig, tag: str, rep: int) -> RngStream:
    return RngStream(cfg.seed, ("harness", tag, cfg.kind, cfg.price_mode, f"rep-{rep}"))


def _make_rep_oracle(cfg: ExperimentConfig, tag: str, rep: int) -> OracleModel:
    return make_oracle(cfg.kind, fold_seed(cfg.seed, tag, cfg.kind, cfg.price_mode, f"rep-{rep}", "oracle"))


def _strip_text(corpus: Dataset) -> Dataset:
    """Feature-free view of a textual corpus (price-only conditioning)."""
    return Dataset(np.zeros((corpus.n, 0)), corpus.prices, corpus.demands)


def _numeric_corpus(cfg: ExperimentConfig, corpus: Dataset) -> Dataset:
    """What non-text methods see: kind (e) text is unreadable to them."""
    return _strip_text(corpus) if corpus.is_text else corpus


# ---------------------------------------------------------------------------
# Inventory experiments
# ---------------------------------------------------------------------------


def _fit_inventory_method(method: str, cfg: ExperimentConfig, corpus: Dataset, tag: str, rep: int):
    """Train/fit one method on the corpus; returns its decision state."""
    numeric = _numeric_corpus(cfg, corpus)
    if method in ("oracle", "saa"):
        return None
    if method == "cdgm":
        return train(corpus if cfg.text else numeric, _train_config_for(cfg, tag, rep, method))
    if method in ("erm_lr", "erm_nn"):
        form = "linear" if method == "erm_lr" else "neural"
        seed = fold_seed(cfg.seed, tag, cfg.kind, cfg.price_mode, f"rep-{rep}", method)
        return baselines.erm_fit_bank(
            numeric, form, epochs=cfg.train.epochs, batch_size=cfg.train.batch_size, seed=seed
        )
    if method == "ko":
        return baselines.silverman_bandwidths(numeric)
    if method == "rbe":
        return baselines.rbe_fit(numeric)
    raise ValueError(f"unknown inventory method {method!r}; expected one of {INVENTORY_METHODS}")


def _inventory_quantities(
    method: str,
    state,
    cfg: ExperimentConfig,
    oracle: OracleModel,
    corpus: Dataset,
    features,
    prices: np.ndarray,
    rng: RngStream,
) -> np.ndarray:
    """Quantities q_hat for each (features[i], prices[i]) test pair."""
    numeric = _numeric_corpus(cfg, corpus)
    n = len(prices)
    window = cfg.window
    if corpus.is_text:
        num_feats = np.zeros((n, 0))
    else:
        num_feats = np.asarray(features, dtype=float).reshape(n, -1)
    if method == "oracle":
        return np.array([oracle_quantile(oracle, features[i], prices[i], rho(prices[i], cfg.costs)) for i in range(n)])
    if method == "saa":
        cache: dict[float, float] = {}
        out = np.empty(n)
        for i, p in enumerate(prices):
            if p not in cache:
                cache[p] = baselines.saa_decide(numeric, None, p, cfg.costs, window=window)
            out[i] = cache[p]
        return out
    if method in ("erm_lr", "erm_nn"):
        rows = np.hstack([num_feats, prices[:, None]])
        levels = np.array([rho(p, cfg.costs) for p in prices])
        taus = np.array([m.tau for m in state])
        pick = np.argmin(np.abs(levels[:, None] - taus[None, :]), axis=1)
        out = np.empty(n)
        for j in np.unique(pick):
            mask = pick == j
            out[mask] = state[j].predict(rows[mask])
        return out
    if method == "ko":
        return np.array([baselines.ko_decide(numeric, num_feats[i], prices[i], cfg.costs, state) for i in range(n)])
    if method == "rbe":
        locs = state.predict(np.hstack([num_feats, prices[:, None]]))
        resid = np.array([state.residual_quantile(rho(p, cfg.costs)) for p in prices])
        return np.maximum(locs + resid, 0.0)
    if method == "cdgm":
        xs = list(features) if (cfg.text and corpus.is_text) else list(num_feats)
        samples = generate_batch(state, xs, prices, cfg.M, rng)
        idx = np.array([quantile_index(cfg.M, rho(p, cfg.costs)) - 1 for p in prices])
        return np.take_along_axis(samples, idx[:, None], axis=1)[:, 0]
    raise ValueError(f"unknown inventory method {method!r}")


def run_inventory_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Inventory benchmark: excess-risk metric L_test per method (and per price).

    Per replication: fresh oracle coefficients, fresh corpus with uniform
    historical prices, one fit/train per method, fresh test data never seen
    by any fit call.  Discrete mode reports one row per admissible grid
    price plus a price-averaged row; continuous mode reports the average
    over uniformly drawn test prices.
    """
    for m in cfg.methods:
        if m not in INVENTORY_METHODS:
            raise ValueError(f"unknown inventory method {m!r}; expected one of {INVENTORY_METHODS}")
    tag = "inventory"
    grid = cfg.decision_grid() if cfg.price_mode == "discrete" else None
    per_price: dict[str, dict[float, list[float]]] = {m: {} for m in cfg.methods}
    averages: dict[str, list[float]] = {m: [] for m in cfg.methods}

    for rep in range(cfg.replications):
        rep_rng = _rep_stream(cfg, tag, rep)
        oracle = _make_rep_oracle(cfg, tag, rep)
        corpus = make_corpus(oracle, cfg.n, cfg.corpus_price_set(), derive_stream(rep_rng, "corpus"))
        states = {m: _fit_inventory_method(m, cfg, corpus, tag, rep) for m in cfg.methods}
        test_rng = derive_stream(rep_rng, "test")

        if cfg.price_mode == "discrete":
            gaps: dict[str, list[float]] = {m: [] for m in cfg.methods}
            for j, p in enumerate(grid):
                feats = sample_features(oracle, derive_stream(test_rng, f"x-{j}"), size=cfg.n_test)
                z = derive_stream(test_rng, f"z-{j}").standard_normal(cfg.n_test)
                prices = np.full(cfg.n_test, p)
                demands = demand_from_noise(oracle, feats, prices, z)
                q_star = _inventory_quantities("oracle", None, cfg, oracle, corpus, feats, prices, test_rng)
                base = profit(demands, prices, q_star, cfg.costs)
                for m in cfg.methods:
                    q = (
                        q_star
                        if m == "oracle"
                        else _inventory_quantities(
                            m, states[m], cfg, oracle, corpus, feats, prices, derive_stream(test_rng, f"gen-{m}-{j}")
                        )
                    )
                    gap = float(np.mean(base - profit(demands, prices, q, cfg.costs)))
                    per_price[m].setdefault(p, []).append(gap)
                    gaps[m].append(gap)
            for m in cfg.methods:
                averages[m].append(float(np.mean(gaps[m])))
        else:
            feats = sample_features(oracle, derive_stream(test_rng, "x"), size=cfg.n_test)
            lo, hi = cfg.price_interval()
            prices = derive_stream(test_rng, "p").uniform(lo, hi, size=cfg.n_test)
            # Uniform draws live in [lo, hi); nudge the measure-zero chance of
            # landing exactly on a price at or below cost.
            prices = np.maximum(prices, np.nextafter(cfg.costs.c, hi))
            z = derive_stream(test_rng, "z").standard_normal(cfg.n_test)
            demands = demand_from_noise(oracle, feats, prices, z)
            q_star = _inventory_quantities("oracle", None, cfg, oracle, corpus, feats, prices, test_rng)
            base = profit(demands, prices, q_star, cfg.costs)
            for m in cfg.methods:
                q = (
                    q_star
                    if m == "oracle"
                    else _inventory_quantities(
                        m, states[m], cfg, oracle, corpus, feats, prices, derive_stream(test_rng, f"gen-{m}")
                    )
                )
                averages[m].append(float(np.mean(base - profit(demands, prices, q, cfg.costs))))

    rows: list[ReportRow] = []
    for m in cfg.methods:
        if cfg.price_mode == "discrete":
            for p in grid:
                mean, std = _aggregate(per_price[m][p])
                rows.append(
                    ReportRow(cfg.kind, cfg.price_mode, m, "L_test", f"{p:.6g}", mean, std, cfg.replications, tuple(per_price[m][p]))
                )
        mean, std = _aggregate(averages[m])
        rows.append(ReportRow(cfg.kind, cfg.price_mode, m, "L_test", "avg", mean, std, cfg.replications, tuple(averages[m])))
    return ExperimentReport(config=_config_echo(cfg, {"experiment": tag}), rows=tuple(rows))


# ---------------------------------------------------------------------------
# Joint experiments
# ---------------------------------------------------------------------------


def _joint_choices_cdgm(gen: Generator, features, grid: list[float], cfg: ExperimentConfig, rng: RngStream):
    """Vectorized joint rule across test rows: per-row (price, quantity)."""
    n = len(features)
    best_est = np.full(n, -np.inf)
    best_p = np.empty(n)
    best_q = np.empty(n)
    for j, p in enumerate(sorted(grid)):
        samples = generate_batch(gen, features, np.full(n, p), cfg.M, derive_stream(rng, f"grid-{j}"))
        q = samples[:, quantile_index(cfg.M, rho(p, cfg.costs)) - 1]
        est = np.mean(profit(samples, p, q[:, None], cfg.costs), axis=1)
        better = est > best_est  # strict: ties keep the earlier (lower) price
        best_est[better] = est[better]
        best_p[better] = p
        best_q[better] = q[better]
    return best_p, best_q


def _joint_choices_oracle(oracle: OracleModel, features, grid: list[float], cfg: ExperimentConfig, rng: RngStream):
    """Oracle joint policy: grid argmax of Monte Carlo expected profit at q*."""
    n = len(features)
    z = rng.standard_normal(_ORACLE_JOINT_MC)
    best_est = np.full(n, -np.inf)
    best_p = np.empty(n)
    best_q = np.empty(n)
    for p in sorted(grid):
        level = rho(p, cfg.costs)
        for i in range(n):
            q = oracle_quantile(oracle, features[i], p, level)
            demands = demand_from_noise(oracle, features[i], p, z)
            est = float(np.mean(profit(demands, p, q, cfg.costs)))
            if est > best_est[i]:
                best_est[i], best_p[i], best_q[i] = est, p, q
    return best_p, best_q


def run_joint_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Joint benchmark: mean realized profit of each method's (price, quantity).

    Every method sees the same test features; realized demand is drawn from
    the true process at the method's chosen price, sharing one demand-noise
    draw per test point across methods.
    """
    for m in cfg.methods:
        if m not in JOINT_METHODS:
            raise ValueError(f"unknown joint method {m!r}; expected one of {JOINT_METHODS}")
    if "cdgm_text" in cfg.methods and cfg.kind != "e":
        raise ValueError("cdgm_text requires the textual DGP (kind 'e')")
    tag = "joint"
    grid = cfg.decision_grid()
    profits: dict[str, list[float]] = {m: [] for m in cfg.methods}

    for rep in range(cfg.replications):
        rep_rng = _rep_stream(cfg, tag, rep)
        oracle = _make_rep_oracle(cfg, tag, rep)
        corpus = make_corpus(oracle, cfg.n, cfg.corpus_price_set(), derive_stream(rep_rng, "corpus"))
        numeric = _numeric_corpus(cfg, corpus)
        window = cfg.window

        test_rng = derive_stream(rep_rng, "test")
        feats = sample_features(oracle, derive_stream(test_rng, "x"), size=cfg.n_test)
        feat_list = list(feats) if oracle.is_text else list(np.asarray(feats, dtype=float))
        z = derive_stream(test_rng, "z").standard_normal(cfg.n_test)

        for m in cfg.methods:
            if m == "cdgm":
                gen = train(
                    _strip_text(corpus) if oracle.is_text else corpus, _train_config_for(cfg, tag, rep, m)
                )
                gen_feats = [np.zeros(0)] * cfg.n_test if oracle.is_text else feat_list
                p_sel, q_sel = _joint_choices_cdgm(gen, gen_feats, grid, cfg, derive_stream(rep_rng, f"decide-{m}"))
            elif m == "cdgm_text":
                gen = train(corpus, _train_config_for(cfg, tag, rep, m))
                p_sel, q_sel = _joint_choices_cdgm(gen, feat_list, grid, cfg, derive_stream(rep_rng, f"decide-{m}"))
            elif m == "oracle":
                p_sel, q_sel = _joint_choices_oracle(oracle, feat_list, grid, cfg, derive_stream(rep_rng, f"decide-{m}"))
            elif m == "saa_joint":
                decision = baselines.saa_joint(numeric, None, grid, cfg.costs, window=window)
                p_sel = np.full(cfg.n_test, decision.price)
                q_sel = np.full(cfg.n_test, decision.quantity)
            elif m == "rbe":
                model = baselines.rbe_fit(numeric)
                pairs = [baselines.rbe_joint(model, x, grid, cfg.costs) for x in _numeric_rows(numeric, feat_list)]
                p_sel = np.array([d.price for d in pairs])
                q_sel = np.array([d.quantity for d in pairs])
            elif m == "prescriptive":
                weights = baselines.silverman_bandwidths(numeric)
                pairs = [
                    baselines.prescriptive_joint(numeric, x, grid, cfg.costs, weights)
                    for x in _numeric_rows(numeric, feat_list)
                ]
                p_sel = np.array([d.price for d in pairs])
                q_sel = np.array([d.quantity for d in pairs])
            demands = demand_from_noise(oracle, feats, p_sel, z)
            profits[m].append(float(np.mean(profit(demands, p_sel, q_sel, cfg.costs))))

    rows = []
    for m in cfg.methods:
        mean, std = _aggregate(profits[m])
        rows.append(ReportRow(cfg.kind, cfg.price_mode, m, "avg_profit", "", mean, std, cfg.replications, tuple(profits[m])))
    return ExperimentReport(config=_config_echo(cfg, {"experiment": tag}), rows=tuple(rows))


def _numeric_rows(numeric: Dataset, feat_list) -> list[np.ndarray]:
    """Numeric feature rows for baseline methods (empty rows for text kinds)."""
    if numeric.k == 0:
        return [np.zeros(0)] * len(feat_list)
    return feat_list


# ---------------------------------------------------------------------------
# Convergence probe (empirical check of consistency in n)
# ---------------------------------------------------------------------------


def convergence_probe(kind: str, n_list, reps: int, cfg: ExperimentConfig | None = None) -> ExperimentReport:
    """Price-averaged cDGM gap at increasing training sizes.

    Corpora are nested across n (same streams, prefix property).  When the
    list spans 200 to 2000, the probe asserts that the replication-average
    gap strictly decreases from n=200 to n=2000.  Single-entry lists yield a
    single row with no assertion.
    """
    n_list = [int(n) for n in n_list]
    if n_list != sorted(n_list):
        raise ValueError("n_list must be ascending")
    base = cfg or ExperimentConfig(kind=kind, methods=("cdgm",))
    base = dataclasses.replace(base, kind=kind, methods=("cdgm",), replications=reps)
    tag = "convergence"
    grid = base.decision_grid()
    gaps: dict[int, list[float]] = {n: [] for n in n_list}

    for rep in range(reps):
        rep_rng = _rep_stream(base, tag, rep)
        oracle = _make_rep_oracle(base, tag, rep)
        test_rng = derive_stream(rep_rng, "test")
        test_feats = {
            j: sample_features(oracle, derive_stream(test_rng, f"x-{j}"), size=base.n_test) for j in range(len(grid))
        }
        test_z = {j: derive_stream(test_rng, f"z-{j}").standard_normal(base.n_test) for j in range(len(grid))}
        for n in n_list:
            corpus = make_corpus(oracle, n, base.corpus_price_set(), derive_stream(rep_rng, "corpus"))
            train_cfg = dataclasses.replace(
                base.train, seed=fold_seed(base.seed, tag, kind, f"rep-{rep}", f"n-{n}", "cdgm")
            )
            gen = train(corpus, train_cfg)
            price_gaps = []
            for j, p in enumerate(grid):
                feats = test_feats[j]
                prices = np.full(base.n_test, p)
                demands = demand_from_noise(oracle, feats, prices, test_z[j])
                level = rho(p, base.costs)
                q_star = np.array([oracle_quantile(oracle, feats[i], p, level) for i in range(base.n_test)])
                samples = generate_batch(
                    gen, list(feats), prices, base.M, derive_stream(rep_rng, f"decide-n{n}-p{j}")
                )
                q_hat = samples[:, quantile_index(base.M, level) - 1]
                diff = profit(demands, prices, q_star, base.costs) - profit(demands, prices, q_hat, base.costs)
                price_gaps.append(float(np.mean(diff)))
            gaps[n].append(float(np.mean(price_gaps)))

    rows = []
    for n in n_list:
        mean, std = _aggregate(gaps[n])
        rows.append(ReportRow(kind, base.price_mode, "cdgm", f"L_test_avg_n{n}", "", mean, std, reps, tuple(gaps[n])))
    report = ExperimentReport(config=_config_echo(base, {"experiment": tag, "n_list": n_list}), rows=tuple(rows))
    if len(n_list) > 1 and 200 in n_list and 2000 in n_list:
        g200, g2000 = float(np.mean(gaps[200])), float(np.mean(gaps[2000]))
        if not g200 > g2000:
            raise RuntimeError(
                f"convergence probe failed: average gap at n=200 ({g200:.4g}) does not exceed n=2000 ({g2000:.4g})"
            )
    return report


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    return f"{v:.6g}"


def _flatten_config(prefix: str, obj, out: list[tuple[str, str]]) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten_config(f"{prefix}.{k}" if prefix else str(k), obj[k], out)
    elif isinstance(obj, (list, tuple)):
        out.append((prefix, json.dumps(list(obj))))
    else:
        out.append((prefix, json.dumps(obj)))


def write_report(report: ExperimentReport, path: str | Path, format: str = "csv") -> None:
    """Write the report as CSV or JSON (stable layout, 6 significant digits).

    The CSV carries the config echo and version as leading ``#`` comment
    lines; the JSON mirror additionally includes per-replication raw arrays.
    Identical reports serialize to identical bytes.
    """
    path = Path(path)
    if format == "csv":
        lines = [f"# version={report.version}"]
        flat: list[tuple[str, str]] = []
        _flatten_config("", report.config, flat)
        lines.extend(f"# config.{k}={v}" for k, v in flat)
        lines.append("dgp,mode,method,metric,price,mean,std,reps")
        for r in report.rows:
            lines.append(
                f"{r.dgp},{r.mode},{r.method},{r.metric},{r.price},{_fmt(r.mean)},{_fmt(r.std)},{r.reps}"
            )
        path.write_text("\n".join(lines) + "\n")
    elif format == "json":
        payload = {
            "version": report.version,
            "config": report.config,
            "rows": [
                {
                    "dgp": r.dgp,
                    "mode": r.mode,
                    "method": r.method,
                    "metric": r.metric,
                    "price": r.price,
                    "mean": float(_fmt(r.mean)),
                    "std": None if r.std is None else float(_fmt(r.std)),
                    "reps": r.reps,
                    "raw": [float(_fmt(v)) for v in r.raw],
                }
                for r in report.rows
            ],
        }
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        raise ValueError(f"unknown report format {format!r}; expected 'csv' or 'json'")


def read_report_csv(path: str | Path) -> list[dict[str, str]]:
    """Parse a report CSV back into row dicts (comments skipped)."""
    rows = []
    lines = Path(path).read_text().splitlines()
    data_lines = [ln for ln in lines if ln and not ln.startswith("#")]
    header = data_lines[0].split(",")
    for ln in data_lines[1:]:
        rows.append(dict(zip(header, ln.split(","))))
    return rows
