"""Classical data-driven newsvendor baselines.

Inventory methods (decide a quantity at a given price):

- SAA      — empirical rho(p)-quantile of demands observed at (or near) p;
             ignores features entirely.
- ERM      — quantile regression under pinball loss, linear or neural form,
             trained at a bank of fixed quantile levels; decisions pick the
             bank model whose level is nearest rho(p).
- KO       — kernel-weights optimization: maximize the Nadaraya-Watson
             weighted empirical profit sum_i w_i(x,p) Pi(d_i, p_i, q) over
             q in {d_i}.
- RBE      — residual-based estimation: OLS demand fit on (p, x, 1) plus an
             empirical residual quantile.

Joint methods (decide price and quantity together):

- prescriptive_joint — weighted empirical objective with counterfactual
             price: argmax over (p, q) of sum_i w_i(x,p) Pi(d_i, p, q).
- rbe_joint — RBE quantity per grid price, profit estimated over the fitted
             residual distribution.
- saa_joint — the deliberately "incorrect" full-data estimator
             (1/n) sum_i Pi(d_i, p, q_SAA): it disregards the effect of price
             on demand and therefore drifts toward the maximum price.

Kernel bandwidths default to Silverman's per-dimension rule; trainable
models follow the scikit-learn fit/get_params idiom with the price as the
last design-matrix column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import Dataset
from .decisions import CostParams, JointDecision, profit, quantile_index, rho
from .nets import adam_init, adam_step, backward, forward, init_mlp
from .numerics import RngStream, derive_stream

__all__ = [
    "KernelWeights",
    "PinballModel",
    "RbeModel",
    "DEFAULT_TAU_BANK",
    "silverman_bandwidths",
    "kernel_weights",
    "saa_decide",
    "erm_fit",
    "erm_fit_bank",
    "erm_decide",
    "ko_decide",
    "rbe_fit",
    "rbe_decide",
    "rbe_joint",
    "prescriptive_joint",
    "saa_joint",
]

#: Quantile levels of the ERM model bank; spans the critical ratios of the
#: admissible price range under the default costs (rho([2,4]) = [2/3, 6/7]).
DEFAULT_TAU_BANK = (0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90)

_WEIGHT_GUARD = 1e-12


# ---------------------------------------------------------------------------
# SAA
# ---------------------------------------------------------------------------


def saa_decide(data: Dataset, x_ignored, p: float, costs: CostParams, window: float | None = None) -> float:
    """Empirical rho(p)-quantile of the pooled training demands.

    Features are ignored; only the quantile level rho(p) depends on the
    query price.  (The pooled reading is what reproduces SAA's published
    inventory gaps and the joint-decision pathology: a price-local variant
    would inherit most of the price effect and perform far better than
    reported.)  Pass ``window=w`` to restrict to records with
    ``|p_i - p| <= w`` — ``window=0`` being the exact-price subset
    S_{n,p} — for the price-local variant.  Raises if no record qualifies.
    """
    p = float(p)
    level = rho(p, costs)
    demands = data.demands if window is None else data.demands[np.abs(data.prices - p) <= window]
    if demands.size == 0:
        raise ValueError(f"SAA has no training records within {window} of price {p}")
    demands = np.sort(demands)
    return float(demands[quantile_index(demands.size, level) - 1])


# ---------------------------------------------------------------------------
# ERM: pinball-loss quantile regression (linear / neural)
# ---------------------------------------------------------------------------


class PinballModel(BaseEstimator):
    """Quantile regression f(x, p) trained by Adam under pinball loss.

    ``form="linear"`` fits affine coefficients over (x, p); ``form="neural"``
    fits a small relu network.  ``fit(X, y)`` expects the price as the last
    column of X.  Predictions are floored at zero (order quantities).
    The learning rate decays linearly to 5% of its initial value, which lets
    the nonsmooth objective settle tightly.
    """

    def __init__(
        self,
        tau: float = 0.8,
        form: str = "linear",
        epochs: int = 300,
        batch_size: int = 128,
        lr: float | None = None,
        hidden: tuple[int, ...] = (64, 64),
        seed: int = 0,
    ):
        self.tau = tau
        self.form = form
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.hidden = hidden
        self.seed = seed

    # -- internals ---------------------------------------------------------

    def _standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self._x_mean) / self._x_scale

    def _raw_predict(self, Xs: np.ndarray) -> np.ndarray:
        if self.form == "linear":
            return Xs @ self.coef_ + self.intercept_
        out, _ = forward(self.net_, Xs)
        return out[:, 0]

    def fit(self, X, y) -> "PinballModel":
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.form not in ("linear", "neural"):
            raise ValueError(f"unknown ERM form {self.form!r}")
        X = check_array(X)
        y = np.asarray(y, dtype=float).ravel()
        n, k = X.shape
        self._x_mean = X.mean(axis=0)
        scale = X.std(axis=0)
        self._x_scale = np.where(scale < 1e-12, 1.0, scale)
        self._y_mean = float(y.mean())
        y_scale = float(y.std())
        self._y_scale = y_scale if y_scale >= 1e-12 else 1.0
        Xs = self._standardize(X)
        ys = (y - self._y_mean) / self._y_scale

        rng = RngStream(self.seed, ("erm", self.form, f"tau-{self.tau}"))
        lr0 = self.lr if self.lr is not None else (0.02 if self.form == "linear" else 1e-3)
        if self.form == "linear":
            params = [np.zeros(k), np.zeros(1)]
        else:
            self.net_ = init_mlp((k, *tuple(self.hidden), 1), derive_stream(rng, "init"))
            params = self.net_.parameters()
        state = adam_init(params, lr=lr0)
        shuffle = derive_stream(rng, "shuffle")
        total_steps = self.epochs * max(1, math.ceil(n / self.batch_size))
        step = 0
        for _ in range(self.epochs):
            perm = shuffle.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = perm[start : start + self.batch_size]
                xb, yb = Xs[idx], ys[idx]
                if self.form == "linear":
                    f = xb @ params[0] + params[1][0]
                    # dLoss/df of the pinball loss: -tau below the data, 1-tau above.
                    g = np.where(yb > f, -self.tau, 1.0 - self.tau) / len(idx)
                    grads = [xb.T @ g, np.array([g.sum()])]
                else:
                    out, tape = forward(self.net_, xb)
                    f = out[:, 0]
                    g = np.where(yb > f, -self.tau, 1.0 - self.tau) / len(idx)
                    grads, _ = backward(self.net_, tape, g[:, None])
                state.lr = lr0 * (1.0 - 0.95 * step / total_steps)
                adam_step(params, grads, state)
                step += 1
        if self.form == "linear":
            self.coef_, self.intercept_ = params[0], float(params[1][0])
        self.n_features_in_ = k
        return self

    def predict(self, X) -> np.ndarray:
        """Predicted tau-quantile per row, floored at zero."""
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        raw = self._raw_predict(self._standardize(X)) * self._y_scale + self._y_mean
        return np.maximum(raw, 0.0)

    def training_pinball_loss(self, X, y) -> float:
        """Mean pinball loss of the fitted model on (X, y), original scale."""
        f = self.predict(X)
        y = np.asarray(y, dtype=float).ravel()
        return float(np.mean(np.where(y > f, self.tau * (y - f), (1.0 - self.tau) * (f - y))))


def erm_fit(data: Dataset, tau: float, form: str, **kwargs) -> PinballModel:
    """Fit one pinball model at quantile level ``tau`` on the corpus."""
    model = PinballModel(tau=tau, form=form, **kwargs)
    return model.fit(data.xp_matrix(), data.demands)


def erm_fit_bank(data: Dataset, form: str, taus=DEFAULT_TAU_BANK, **kwargs) -> tuple[PinballModel, ...]:
    """Fit the quantile-level bank used for price-dependent decisions."""
    return tuple(erm_fit(data, tau, form, **kwargs) for tau in taus)


def erm_decide(model_bank, x, p: float, costs: CostParams) -> float:
    """Predict with the bank model whose tau is nearest rho(p), floored at 0."""
    bank = list(model_bank)
    if not bank:
        raise ValueError("ERM bank is empty")
    level = rho(p, costs)
    model = min(bank, key=lambda mdl: abs(mdl.tau - level))
    row = np.concatenate([np.asarray(x, dtype=float).ravel(), [float(p)]])
    return float(model.predict(row[None, :])[0])


# ---------------------------------------------------------------------------
# Kernel weights (shared by KO and the prescriptive joint method)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelWeights:
    """Gaussian product-kernel bandwidths: one per feature, one for price."""

    feature_bandwidths: np.ndarray
    price_bandwidth: float

    def __post_init__(self) -> None:
        if np.any(np.asarray(self.feature_bandwidths) <= 0.0) or self.price_bandwidth <= 0.0:
            raise ValueError("bandwidths must be positive")
        object.__setattr__(self, "feature_bandwidths", np.asarray(self.feature_bandwidths, dtype=float))


def silverman_bandwidths(data: Dataset) -> KernelWeights:
    """Per-dimension Silverman rule 1.06 * sigma_hat * n^(-1/5)."""
    factor = 1.06 * data.n ** (-0.2)
    sig_x = data.features.std(axis=0, ddof=1)
    sig_p = float(data.prices.std(ddof=1))
    return KernelWeights(
        feature_bandwidths=np.maximum(factor * sig_x, 1e-6),
        price_bandwidth=max(factor * sig_p, 1e-6),
    )


def kernel_weights(weights: KernelWeights, data: Dataset, x, p: float) -> np.ndarray:
    """Gaussian product-kernel weights w_i(x, p) over the corpus.

    Returned weights are rescaled so the largest is 1: every consumer
    normalizes by the weight sum, and the raw exponents routinely sit near
    -100 in five feature dimensions, far below float underflow once summed.
    """
    x = np.asarray(x, dtype=float).ravel()
    z2 = (((data.features - x) / weights.feature_bandwidths) ** 2).sum(axis=1)
    z2 = z2 + ((data.prices - float(p)) / weights.price_bandwidth) ** 2
    log_w = -0.5 * z2
    peak = log_w.max()
    if not np.isfinite(peak):
        raise ValueError(f"all kernel weights vanish at (x, p={p}); widen the bandwidths")
    return np.exp(log_w - peak)


def _weighted_quantile(demands: np.ndarray, w: np.ndarray, level: float) -> float:
    """Smallest demand whose cumulative normalized weight reaches ``level``."""
    order = np.argsort(demands, kind="stable")
    cum = np.cumsum(w[order])
    cum /= cum[-1]
    j = int(np.searchsorted(cum, level - _WEIGHT_GUARD, side="left"))
    return float(demands[order[min(j, len(order) - 1)]])


def ko_decide(data: Dataset, x, p: float, costs: CostParams, weights: KernelWeights) -> float:
    """Kernel-weights optimization: argmax over q in {d_i} of the weighted
    empirical profit sum_i w_i(x,p) Pi(d_i, p_i, q).

    The objective is piecewise linear and concave in q (record i's slope
    drops from p_i - c to s - c as q passes d_i), so the maximizer is the
    first observed demand where the weighted slope crosses zero.
    """
    w = kernel_weights(weights, data, x, p)
    total = float(w.sum())
    if total <= _WEIGHT_GUARD:
        raise ValueError(f"all kernel weights vanish at (x, p={p}); widen the bandwidths")
    order = np.argsort(data.demands, kind="stable")
    d_sorted = data.demands[order]
    underage = w[order] * (data.prices[order] - costs.c)  # slope contribution while q < d_i
    overage = w[order] * (costs.c - costs.s)  # slope contribution once q >= d_i
    # Slope just right of d_(j): remaining underage minus accumulated overage.
    slope_right = (underage.sum() - np.cumsum(underage)) - np.cumsum(overage)
    crossing = np.flatnonzero(slope_right <= _WEIGHT_GUARD)
    j = int(crossing[0]) if crossing.size else len(d_sorted) - 1
    return float(d_sorted[j])


# ---------------------------------------------------------------------------
# RBE: residual-based estimation
# ---------------------------------------------------------------------------


class RbeModel(BaseEstimator):
    """OLS demand fit on (p, x, 1) plus the empirical residual distribution.

    ``fit(X, y)`` expects the price as the last column of X.  Fitted
    attributes: ``alpha_`` (price coefficient), ``beta_`` (feature
    coefficients), ``intercept_``, and ``residuals_`` sorted ascending.
    """

    def fit(self, X, y) -> "RbeModel":
        X = check_array(X)
        y = np.asarray(y, dtype=float).ravel()
        n, cols = X.shape
        if n <= cols + 1:
            raise ValueError(f"RBE needs n > k+2 records for least squares, got n={n}, k={cols - 1}")
        design = np.hstack([X[:, -1:], X[:, :-1], np.ones((n, 1))])  # (p, x, 1)
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise np.linalg.LinAlgError("singular design matrix in RBE least squares")
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        self.alpha_ = float(coef[0])
        self.beta_ = coef[1:-1]
        self.intercept_ = float(coef[-1])
        self.residuals_ = np.sort(y - design @ coef)
        self.n_features_in_ = cols
        return self

    def location(self, x, p: float) -> float:
        """Fitted demand alpha*p + beta'x + intercept."""
        check_is_fitted(self, "residuals_")
        x = np.asarray(x, dtype=float).ravel()
        return self.alpha_ * float(p) + float(x @ self.beta_) + self.intercept_

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "residuals_")
        X = check_array(X)
        return X[:, -1] * self.alpha_ + X[:, :-1] @ self.beta_ + self.intercept_

    def residual_quantile(self, level: float) -> float:
        return float(self.residuals_[quantile_index(self.residuals_.size, level) - 1])


def rbe_fit(data: Dataset) -> RbeModel:
    return RbeModel().fit(data.xp_matrix(), data.demands)


def rbe_decide(model: RbeModel, x, p: float, costs: CostParams) -> float:
    """Fitted demand plus the empirical rho(p)-residual-quantile, floored at 0."""
    level = rho(p, costs)
    return max(0.0, model.location(x, p) + model.residual_quantile(level))


def rbe_joint(model: RbeModel, x, grid, costs: CostParams) -> JointDecision:
    """RBE joint decision: grid argmax of the residual-model profit estimate.

    At each grid price the candidate demand law is (fitted location +
    residual), floored at zero; the profit estimate averages Pi over the
    stored residuals at the RBE quantity.
    """
    profile = []
    for p in sorted(float(v) for v in grid):
        q = rbe_decide(model, x, p, costs)
        demands = np.maximum(model.location(x, p) + model.residuals_, 0.0)
        est = float(np.mean(profit(demands, p, q, costs)))
        profile.append((p, q, est))
    return _argmax_profile(profile)


# ---------------------------------------------------------------------------
# Joint baselines
# ---------------------------------------------------------------------------


def _argmax_profile(profile: list[tuple[float, float, float]]) -> JointDecision:
    """Profile argmax with ties broken toward the lowest price."""
    if not profile:
        raise ValueError("no evaluable grid points")
    best = None
    for entry in sorted(profile, key=lambda t: t[0]):
        if best is None or entry[2] > best[2]:
            best = entry
    return JointDecision(price=best[0], quantity=best[1], estimated_profit=best[2], profile=tuple(profile))


def prescriptive_joint(data: Dataset, x, grid, costs: CostParams, weights: KernelWeights) -> JointDecision:
    """Weighted prescriptive joint decision (counterfactual price in Pi).

    For each grid price p: kernel weights w_i(x, p), quantity = weighted
    rho(p)-quantile of observed demands, profit estimate = the normalized
    weighted sum of Pi(d_i, p, q).  Grid points where every weight vanishes
    are skipped; the argmax breaks ties toward the lowest price.
    """
    profile = []
    for p in sorted(float(v) for v in grid):
        if p <= costs.c:
            raise ValueError(f"every grid price must exceed c={costs.c}")
        w = kernel_weights(weights, data, x, p)
        total = float(w.sum())
        if total <= _WEIGHT_GUARD:
            continue
        q = _weighted_quantile(data.demands, w, rho(p, costs))
        est = float(np.dot(w, profit(data.demands, p, q, costs)) / total)
        profile.append((p, q, est))
    if not profile:
        raise ValueError("kernel weights vanish at every grid price; widen the bandwidths")
    return _argmax_profile(profile)


def saa_joint(data: Dataset, x_ignored, grid, costs: CostParams, window: float | None = None) -> JointDecision:
    """The "incorrect" SAA joint decision.

    Estimates profit at price p as the full-data average (1/n) sum_i
    Pi(d_i, p, q_SAA(p)), disregarding the effect of price on demand — with
    demand frozen, (p - c) scales profit upward, so the argmax drifts to the
    maximum grid price.
    """
    if data.n == 0:
        raise ValueError("saa_joint requires a nonempty dataset")
    profile = []
    for p in sorted(float(v) for v in grid):
        q = saa_decide(data, x_ignored, p, costs, window=window)
        est = float(np.mean(profit(data.demands, p, q, costs)))
        profile.append((p, q, est))
    return _argmax_profile(profile)
