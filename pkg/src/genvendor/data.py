"""Demand datasets: observed (x, p, d) triplets and their CSV round trip.

A :class:`Dataset` is the training corpus S_n — features (a numeric
matrix or text descriptions), one price per record, one realized demand per
record.  CSV headers are ``x1,...,xk,p,d`` for numeric features and
``text,p,d`` (text quoted) for the textual variant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["DemandRecord", "Dataset"]


@dataclass(frozen=True)
class DemandRecord:
    """One observed sales period: features, posted price, realized demand."""

    x: np.ndarray | str
    p: float
    d: float


@dataclass(frozen=True)
class Dataset:
    """A column-oriented corpus of demand records.

    ``features`` is an (n, k) float matrix, or a tuple of n text descriptions
    for the textual variant.  ``prices`` and ``demands`` are length-n vectors.
    """

    features: np.ndarray | tuple[str, ...]
    prices: np.ndarray
    demands: np.ndarray

    def __post_init__(self) -> None:
        prices = np.asarray(self.prices, dtype=float)
        demands = np.asarray(self.demands, dtype=float)
        if self.is_text:
            feats: np.ndarray | tuple[str, ...] = tuple(str(t) for t in self.features)
            n = len(feats)
        else:
            feats = np.asarray(self.features, dtype=float)
            if feats.ndim != 2:
                raise ValueError(f"numeric features must be 2-D, got shape {feats.shape}")
            n = feats.shape[0]
        if prices.shape != (n,) or demands.shape != (n,):
            raise ValueError(
                f"inconsistent lengths: {n} feature rows, {prices.shape} prices, {demands.shape} demands"
            )
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "demands", demands)

    @property
    def is_text(self) -> bool:
        return not isinstance(self.features, np.ndarray) and (
            len(self.features) == 0 or isinstance(self.features[0], str)
        )

    @property
    def n(self) -> int:
        return len(self.prices)

    @property
    def k(self) -> int | None:
        """Numeric feature dimension; None for text datasets."""
        return None if self.is_text else self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def record(self, i: int) -> DemandRecord:
        x = self.features[i] if self.is_text else self.features[i].copy()
        return DemandRecord(x, float(self.prices[i]), float(self.demands[i]))

    def subset(self, mask_or_index) -> "Dataset":
        idx = np.asarray(mask_or_index)
        if self.is_text:
            if idx.dtype == bool:
                idx = np.flatnonzero(idx)
            feats = tuple(self.features[i] for i in idx)
        else:
            feats = self.features[idx]
        return Dataset(feats, self.prices[idx], self.demands[idx])

    def xp_matrix(self) -> np.ndarray:
        """Design matrix [x | p] with the price as the last column."""
        if self.is_text:
            raise ValueError("text datasets have no numeric design matrix")
        return np.hstack([self.features, self.prices[:, None]])

    # -- CSV round trip ------------------------------------------------------

    def save_csv(self, path: str | Path) -> None:
        """Write ``x1,...,xk,p,d`` (numeric) or ``text,p,d`` (textual) CSV."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
            if self.is_text:
                writer.writerow(["text", "p", "d"])
                for text, p, d in zip(self.features, self.prices, self.demands):
                    writer.writerow([text, repr(float(p)), repr(float(d))])
            else:
                k = self.features.shape[1]
                writer.writerow([f"x{j + 1}" for j in range(k)] + ["p", "d"])
                for row, p, d in zip(self.features, self.prices, self.demands):
                    writer.writerow([repr(float(v)) for v in row] + [repr(float(p)), repr(float(d))])

    @staticmethod
    def load_csv(path: str | Path) -> "Dataset":
        """Parse a Dataset CSV written by :meth:`save_csv` (round trip exact)."""
        path = Path(path)
        with path.open("r", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty dataset file") from None
            rows = list(reader)
        if header[-2:] != ["p", "d"]:
            raise ValueError(f"{path}: expected trailing columns 'p,d', got {header[-2:]}")
        if header[0] == "text":
            if len(header) != 3:
                raise ValueError(f"{path}: textual header must be exactly text,p,d")
            texts = tuple(r[0] for r in rows)
            prices = np.array([float(r[1]) for r in rows])
            demands = np.array([float(r[2]) for r in rows])
            return Dataset(texts, prices, demands)
        k = len(header) - 2
        expected = [f"x{j + 1}" for j in range(k)]
        if header[:k] != expected:
            raise ValueError(f"{path}: feature columns {header[:k]} != expected {expected}")
        data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(len(rows), k + 2)
        return Dataset(data[:, :k], data[:, k], data[:, k + 1])
