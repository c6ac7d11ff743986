"""Synthetic demand-generating processes (a)-(e) with exact oracles.

Each process specifies the conditional law of demand D | (X=x, P=p):

- (a) 100 - 20p + x'beta + eps,               eps ~ N(0, 5)
- (b) 100 - 20p + 4 sin(2 x1) + 3 x2 x3 + eps, eps ~ N(0, 5)
- (c) 130 (4p - 6)^{-1.3} eps + x'beta,        log eps ~ N(0, 0.5)
- (d) 40 (4 - p)^{sin(3 g(x)) + 1.01} + eps,   eps ~ N(0, 4), g(x) = x'1/sqrt(15)
- (e) 40 + 10 x_score - 10p + eps,             eps ~ N(0, 10), textual features

Features for (a)-(d) are 5-dimensional N(0, Omega) with unit variances and
0.5 correlations; beta ~ N(0, 2 I_5) is drawn once per oracle.  The second
argument of N(0, v) is a VARIANCE (sigma = sqrt(v)).  Realized demand is
truncated (clipped) to [0, 200], so conditional quantiles clip too.

Besides samplers, the module exposes the exact conditional quantile, the
conditional mean, and a seeded Monte Carlo estimate of conditional expected
profit — the ground truth that experiments and tests measure against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import Dataset
from .decisions import CostParams, profit
from .numerics import Covariance, RngStream, derive_stream, sample_mvn, std_normal_quantile

__all__ = [
    "KINDS",
    "WORD_SCORES",
    "OracleModel",
    "ProfitEstimate",
    "make_oracle",
    "sample_features",
    "sample_demand",
    "demand_from_noise",
    "text_score",
    "oracle_quantile",
    "oracle_mean_demand",
    "oracle_expected_profit",
    "oracle_sampler",
    "make_corpus",
]

KINDS = ("a", "b", "c", "d", "e")

#: Price interval per process: [2,4] for (a)-(c) and the textual process,
#: [1,4] for (d).
PRICE_RANGES = {"a": (2.0, 4.0), "b": (2.0, 4.0), "c": (2.0, 4.0), "d": (1.0, 4.0), "e": (2.0, 4.0)}

#: Noise scale per process (standard deviation; for (c) the log-scale).
SIGMAS = {"a": math.sqrt(5.0), "b": math.sqrt(5.0), "c": math.sqrt(0.5), "d": 2.0, "e": math.sqrt(10.0)}

#: Word-to-score dictionary for the textual process: three words per score
#: level in {1,...,5}; descriptions average their word scores.
WORD_SCORES = {
    "terrible": 1.0,
    "awful": 1.0,
    "dreadful": 1.0,
    "bad": 2.0,
    "mediocre": 2.0,
    "disappointing": 2.0,
    "okay": 3.0,
    "average": 3.0,
    "fine": 3.0,
    "good": 4.0,
    "recommended": 4.0,
    "solid": 4.0,
    "excellent": 5.0,
    "outstanding": 5.0,
    "superb": 5.0,
}

CLIP_BOUNDS = (0.0, 200.0)

_EMPTY_TEXT_SCORE = 3.0


@dataclass(frozen=True)
class OracleModel:
    """An exactly specified demand process, usable as ground truth."""

    kind: str
    seed: int
    beta: np.ndarray | None
    sigma: float
    price_range: tuple[float, float]
    omega: Covariance | None
    clip: tuple[float, float] = CLIP_BOUNDS
    word_scores: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown DGP kind {self.kind!r}; expected one of {KINDS}")
        if self.sigma <= 0.0:
            raise ValueError("noise scale must be positive")
        lo, hi = self.price_range
        stated = PRICE_RANGES[self.kind]
        if lo < stated[0] - 1e-12 or hi > stated[1] + 1e-12:
            raise ValueError(f"price range {self.price_range} outside stated {stated} for kind {self.kind}")
        if self.clip != CLIP_BOUNDS:
            raise ValueError(f"truncation bounds are fixed at {CLIP_BOUNDS}")

    @property
    def is_text(self) -> bool:
        return self.kind == "e"


def make_oracle(kind: str, seed: int, *, beta: np.ndarray | None = None, sigma: float | None = None) -> OracleModel:
    """Build the process for ``kind``, drawing beta ~ N(0, 2 I_5) from ``seed``.

    The draw is deterministic: the same (kind, seed) always yields the same
    coefficients.  ``beta``/``sigma`` keyword overrides support tests that
    need forced coefficients or shrunken noise.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown DGP kind {kind!r}; expected one of {KINDS}")
    if kind in ("a", "c"):
        if beta is None:
            rng = RngStream(seed, ("dgp", kind, "beta"))
            beta = rng.standard_normal(5) * math.sqrt(2.0)
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (5,):
            raise ValueError(f"beta must be a 5-vector, got shape {beta.shape}")
    else:
        beta = None
    omega = None if kind == "e" else Covariance.equicorrelated(5, 1.0, 0.5)
    return OracleModel(
        kind=kind,
        seed=int(seed),
        beta=beta,
        sigma=float(sigma) if sigma is not None else SIGMAS[kind],
        price_range=PRICE_RANGES[kind],
        omega=omega,
        word_scores=dict(WORD_SCORES) if kind == "e" else None,
    )


# ---------------------------------------------------------------------------
# Feature sampling and text scoring
# ---------------------------------------------------------------------------


def sample_features(model: OracleModel, rng: RngStream, size: int | None = None):
    """Draw features: a 5-vector x ~ N(0, Omega), or a text description.

    Text descriptions have uniform length in {0, 1, 2, 3} with words drawn
    uniformly from the score vocabulary; the empty description is allowed.
    With ``size`` given, returns a (size, 5) matrix / tuple of descriptions.
    """
    if model.kind == "e":
        words = sorted(model.word_scores)
        n = 1 if size is None else int(size)
        lengths = rng.integers(0, 4, size=n)
        texts = []
        for length in lengths:
            picks = rng.integers(0, len(words), size=int(length))
            texts.append(", ".join(words[j] for j in picks))
        return texts[0] if size is None else tuple(texts)
    return sample_mvn(np.zeros(5), model.omega, rng, size=size)


def text_score(model: OracleModel, text: str) -> float:
    """Average word score of a description; empty text scores 3."""
    words = [w.strip().lower() for w in str(text).split(",") if w.strip()]
    scores = [model.word_scores[w] for w in words if w in model.word_scores]
    if not scores:
        return _EMPTY_TEXT_SCORE
    return float(np.mean(scores))


def _feature_scores(model: OracleModel, x) -> np.ndarray:
    """Numeric representation of features: the matrix itself, or text scores."""
    if model.kind == "e":
        if isinstance(x, str):
            return np.array(text_score(model, x))
        return np.array([text_score(model, t) for t in x])
    return np.asarray(x, dtype=float)


def _check_price(model: OracleModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    lo, hi = model.price_range
    if np.any(p < lo - 1e-12) or np.any(p > hi + 1e-12):
        raise ValueError(f"price {p} outside admissible range [{lo}, {hi}] for kind {model.kind}")
    return p


def _location(model: OracleModel, x, p) -> np.ndarray:
    """Deterministic part of demand (the additive location; for (c), x'beta)."""
    p = np.asarray(p, dtype=float)
    if model.kind == "a":
        xb = _feature_scores(model, x) @ model.beta
        return 100.0 - 20.0 * p + xb
    if model.kind == "b":
        xs = np.asarray(x, dtype=float)
        x1 = xs[..., 0]
        x2x3 = xs[..., 1] * xs[..., 2]
        return 100.0 - 20.0 * p + 4.0 * np.sin(2.0 * x1) + 3.0 * x2x3
    if model.kind == "c":
        return _feature_scores(model, x) @ model.beta
    if model.kind == "d":
        xs = np.asarray(x, dtype=float)
        g = xs @ np.ones(5) / math.sqrt(15.0)
        # max(4 - p, 0) guards the float-tolerance sliver above p = 4, where a
        # negative base with fractional exponent would produce NaN.
        return 40.0 * np.power(np.maximum(4.0 - p, 0.0), np.sin(3.0 * g) + 1.01)
    score = _feature_scores(model, x)
    return 40.0 + 10.0 * score - 10.0 * p


def _lognormal_scale(model: OracleModel, p) -> np.ndarray:
    """Multiplier 130 (4p - 6)^{-1.3} of the lognormal factor in kind (c)."""
    p = np.asarray(p, dtype=float)
    return 130.0 * np.power(4.0 * p - 6.0, -1.3)


def demand_from_noise(model: OracleModel, x, p, z) -> np.ndarray:
    """Map standard-normal noise z to realized demand at (x, p), clipped.

    Every process is driven by a single scalar standard normal, which lets
    experiments share the same noise across methods at different prices
    (common random numbers).  Broadcasts over x, p and z.
    """
    p = _check_price(model, p)
    z = np.asarray(z, dtype=float)
    if model.kind == "c":
        raw = _lognormal_scale(model, p) * np.exp(model.sigma * z) + _location(model, x, p)
    else:
        raw = _location(model, x, p) + model.sigma * z
    return np.clip(raw, *model.clip)


def sample_demand(model: OracleModel, x, p, rng: RngStream, size: int | None = None):
    """Draw realized demand at (x, p): fresh noise through the process formula."""
    z = rng.standard_normal(size)
    out = demand_from_noise(model, x, p, z)
    return float(out) if size is None and np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Oracles: conditional quantile, mean, expected profit
# ---------------------------------------------------------------------------


def oracle_quantile(model: OracleModel, x, p, u: float) -> float:
    """Exact conditional u-quantile of clipped demand at (x, p).

    Additive-Gaussian processes: location + sigma * Phi^{-1}(u); the
    lognormal process (c): scale * exp(sigma_log * Phi^{-1}(u)) + location.
    Quantiles of the clipped variable are the clipped raw quantiles.
    """
    p = _check_price(model, p)
    zu = std_normal_quantile(u)  # validates 0 < u < 1
    if model.kind == "c":
        raw = _lognormal_scale(model, p) * math.exp(model.sigma * zu) + _location(model, x, p)
    else:
        raw = _location(model, x, p) + model.sigma * zu
    out = np.clip(raw, *model.clip)
    return float(out) if np.ndim(out) == 0 else out


def oracle_mean_demand(model: OracleModel, x, p) -> float:
    """Conditional mean of raw (unclipped) demand at (x, p).

    Additive processes: the location; process (c): scale * exp(sigma^2/2) +
    location.  Truncation mass is negligible at admissible prices for the
    stated processes, so this doubles as the clipped mean in tests.
    """
    p = _check_price(model, p)
    if model.kind == "c":
        out = _lognormal_scale(model, p) * math.exp(0.5 * model.sigma**2) + _location(model, x, p)
    else:
        out = _location(model, x, p)
    return float(out) if np.ndim(out) == 0 else out


class ProfitEstimate(NamedTuple):
    """A Monte Carlo estimate with its standard error."""

    value: float
    se: float


def oracle_expected_profit(
    model: OracleModel,
    x,
    p: float,
    q: float,
    costs: CostParams,
    mc_n: int = 200_000,
    rng: RngStream | None = None,
) -> ProfitEstimate:
    """Monte Carlo estimate of E[Pi(D, p, q) | x, p] with standard error.

    Uses ``mc_n`` fresh demand draws from a dedicated substream (derived from
    the model seed when ``rng`` is not supplied).
    """
    if q < 0.0:
        raise ValueError("order quantity must be nonnegative")
    if rng is None:
        rng = RngStream(model.seed, ("dgp", model.kind, "oracle-profit"))
    demands = sample_demand(model, x, float(p), rng, size=int(mc_n))
    profits = profit(demands, float(p), float(q), costs)
    value = float(np.mean(profits))
    se = float(np.std(profits, ddof=1) / math.sqrt(mc_n))
    return ProfitEstimate(value, se)


def oracle_sampler(model: OracleModel):
    """Adapt the true process to the joint decision rule's sampler protocol.

    Returns a callable ``(x, p, M, rng) -> ascending demand samples`` so the
    exact process can stand in for a trained generator.
    """

    def draw(x, p, M, rng: RngStream) -> np.ndarray:
        samples = sample_demand(model, x, float(p), rng, size=int(M))
        return np.sort(np.asarray(samples, dtype=float))

    return draw


# ---------------------------------------------------------------------------
# Corpus generation
# ---------------------------------------------------------------------------


def make_corpus(model: OracleModel, n: int, price_set, rng: RngStream) -> Dataset:
    """Draw a training corpus S_n: features, uniform historical prices, demand.

    ``price_set`` is a 2-tuple (lo, hi) for continuous uniform prices, or any
    non-tuple sequence for a discrete set (prices drawn uniformly from it).
    Component substreams are consumed independently, so corpora of different
    sizes from the same stream share a common prefix (nested corpora).
    """
    if n < 1:
        raise ValueError("corpus size must be positive")
    rng_x = derive_stream(rng, "corpus-x")
    rng_p = derive_stream(rng, "corpus-p")
    rng_z = derive_stream(rng, "corpus-noise")
    features = sample_features(model, rng_x, size=n)
    if isinstance(price_set, tuple):
        if len(price_set) != 2:
            raise ValueError("continuous price set must be a (lo, hi) 2-tuple")
        prices = rng_p.uniform(price_set[0], price_set[1], size=n)
    else:
        choices = np.asarray(list(price_set), dtype=float)
        if choices.size == 0:
            raise ValueError("discrete price set must be nonempty")
        prices = choices[rng_p.integers(0, len(choices), size=n)]
    z = rng_z.standard_normal(n)
    demands = demand_from_noise(model, features, prices, z)
    return Dataset(features, prices, demands)
