"""The decision layer: profit arithmetic, critical ratio, and Algorithms 1-2.

Given demand samples for a condition (x, p) — from the trained generator or
any other sampler — this module computes the sample-based expected-profit
estimator, the order-statistic inventory decision, the grid-argmax joint
price-and-inventory decision, and price grids,
including the epsilon-accuracy grid sizing rule.

Profit convention (unit cost c, salvage s, price p, demand d, order q):

    Pi(d, p, q) = p*min(q, d) + s*max(q - d, 0) - c*q
                = (p - c)*d - (c - s)*(q - d)^+ - (p - c)*(d - q)^+

The critical ratio rho(p) = (p - c)/(p - s) is the demand quantile that
maximizes expected profit at price p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import RngStream, derive_stream

__all__ = [
    "CostParams",
    "JointDecision",
    "profit",
    "rho",
    "estimate_profit",
    "inventory_decision",
    "joint_decision",
    "build_price_grid",
    "quantile_index",
]

#: Slack subtracted before the ceiling in quantile index computations, so a
#: product like 10 * 0.8 = 8.000000000000002 (binary float) still lands on
#: index 8 rather than spilling to 9.
_CEIL_GUARD = 1e-9


@dataclass(frozen=True)
class CostParams:
    """Unit purchase cost, salvage value, and the admissible price ceiling.

    Requires 0 <= s <= c <= p_max; admissible prices satisfy c < p <= p_max
    so the critical ratio stays inside (0, 1).
    """

    c: float = 1.0
    s: float = 0.5
    p_max: float = 4.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.s <= self.c:
            raise ValueError(f"need 0 <= s <= c, got s={self.s}, c={self.c}")
        if not self.c <= self.p_max:
            raise ValueError(f"need c <= p_max, got c={self.c}, p_max={self.p_max}")


@dataclass(frozen=True)
class JointDecision:
    """A joint price-and-inventory decision with its selection profile.

    ``profile`` holds one (price, quantity, estimated profit) triple per
    evaluated grid point; ``price``/``quantity``/``estimated_profit`` echo the
    winning entry (ties broken toward the lowest price).
    """

    price: float
    quantity: float
    estimated_profit: float
    profile: tuple[tuple[float, float, float], ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not any(p == self.price for p, _, _ in self.profile):
            raise ValueError("chosen price must belong to the evaluated grid")
        best = max(e for _, _, e in self.profile)
        if not math.isclose(self.estimated_profit, best, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError("estimated profit at the chosen price must be the profile maximum")


def profit(d, p, q, costs: CostParams):
    """Newsvendor profit Pi(d, p, q); vectorized over any argument."""
    d = np.asarray(d, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = (p - costs.c) * d - (costs.c - costs.s) * np.maximum(q - d, 0.0) - (p - costs.c) * np.maximum(d - q, 0.0)
    return float(out) if out.ndim == 0 else out


def rho(p: float, costs: CostParams) -> float:
    """Critical ratio (p - c)/(p - s), defined for p strictly above cost."""
    p = float(p)
    if p <= costs.c:
        raise ValueError(f"critical ratio requires p > c, got p={p}, c={costs.c}")
    return (p - costs.c) / (p - costs.s)


def estimate_profit(samples, p: float, q: float, costs: CostParams) -> float:
    """Sample-average profit estimate (1/M) sum_m Pi(d_m, p, q)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("estimate_profit requires at least one demand sample")
    return float(np.mean(profit(samples, p, q, costs)))


def quantile_index(m: int, level: float) -> int:
    """1-based ceiling order-statistic index ceil(m * level), clamped to [1, m]."""
    idx = math.ceil(m * level - _CEIL_GUARD)
    return min(max(idx, 1), m)


def inventory_decision(samples, p: float, costs: CostParams) -> float:
    """Inventory rule: the ceil(M * rho(p))-th smallest generated demand sample.

    ``samples`` must be sorted ascending and nonempty; the returned quantity
    maximizes the sample-average profit estimate at price p.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("inventory_decision requires at least one demand sample")
    if samples.ndim != 1:
        raise ValueError("samples must be a 1-D sorted array")
    if np.any(np.diff(samples) < 0.0):
        raise ValueError("samples must be sorted ascending")
    level = rho(p, costs)
    return float(samples[quantile_index(samples.size, level) - 1])


def joint_decision(sampler, x, grid, M: int, costs: CostParams, rng: RngStream) -> JointDecision:
    """Joint rule: evaluate every grid price, return the profit argmax.

    ``sampler`` is either an object with a ``generate(x, p, M, rng)`` method
    (a trained Generator) or a callable ``(x, p, M, rng) -> ascending demand
    samples``.  Each grid point gets its own derived substream, so results do
    not depend on evaluation order; ties break toward the lowest price.
    """
    grid = [float(p) for p in grid]
    if not grid:
        raise ValueError("joint_decision requires a nonempty price grid")
    if any(p <= costs.c for p in grid):
        raise ValueError(f"every grid price must exceed c={costs.c}")
    if M < 1:
        raise ValueError("M must be at least 1")
    draw = sampler.generate if hasattr(sampler, "generate") else sampler
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    profile: list[tuple[float, float, float]] = [None] * len(grid)  # type: ignore[list-item]
    best: tuple[float, float, float] | None = None
    for i in order:
        p = grid[i]
        samples = np.asarray(draw(x, p, M, derive_stream(rng, f"grid-{i}")), dtype=float)
        q = inventory_decision(samples, p, costs)
        est = estimate_profit(samples, p, q, costs)
        profile[i] = (p, q, est)
        if best is None or est > best[2]:
            best = (p, q, est)
    return JointDecision(price=best[0], quantity=best[1], estimated_profit=best[2], profile=tuple(profile))


def build_price_grid(
    *,
    prices=None,
    interval: tuple[float, float] | None = None,
    J: int | None = None,
    epsilon: float | None = None,
    C: float | None = None,
    L: float | None = None,
    costs: CostParams | None = None,
) -> list[float]:
    """Construct the price grid for the joint decision rule.

    Three modes:

    - ``prices=[...]``: a discrete set, passed through (sorted ascending).
    - ``interval=(lo, hi), J=n``: n uniform points including both endpoints.
    - ``interval=(lo, hi), epsilon=..., C=..., L=..., costs=...``: the grid
      size is the epsilon-accuracy bound J = ceil(p_max*(2C + (2*p_max - c
      - s)*L) / epsilon) with p_max the interval's upper end, then uniform
      points as above.
    """
    if prices is not None:
        grid = sorted(float(p) for p in prices)
        if not grid:
            raise ValueError("discrete price set must be nonempty")
        return grid
    if interval is None:
        raise ValueError("provide either a discrete price set or an interval")
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    if lo == hi:
        return [lo]
    if epsilon is not None:
        if epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if C is None or L is None or costs is None:
            raise ValueError("epsilon mode requires explicit C, L and costs")
        p_max = hi
        J = math.ceil(p_max * (2.0 * C + (2.0 * p_max - costs.c - costs.s) * L) / epsilon)
    if J is None:
        raise ValueError("interval mode requires J or epsilon")
    if J < 1:
        raise ValueError("J must be at least 1")
    if J == 1:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, int(J))]
