"""Dataset container, CSV/JSON ingestion, standardization and least squares."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg


class SingularSystemError(ValueError):
    """Raised when a least-squares system is numerically rank deficient."""


def _frozen_copy(a) -> np.ndarray:
    # read-only float arrays are shared as-is; anything else is copied
    if isinstance(a, np.ndarray) and a.dtype == np.float64 and not a.flags.writeable and a.flags.c_contiguous:
        return a
    return np.array(a, dtype=float, order="C")


@dataclass(frozen=True, eq=False)
class StandardizationInfo:
    column_means: np.ndarray
    column_scales: np.ndarray
    response_mean: float
    constant_columns: np.ndarray  # boolean mask

    def __post_init__(self):
        if np.any(self.column_scales <= 0):
            raise ValueError("column scales must be positive")

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.column_means) / self.column_scales

    def invert(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.column_scales + self.column_means

    def coef_to_original(self, beta: np.ndarray) -> np.ndarray:
        """Map coefficients fitted on standardized columns back to raw units."""
        return np.asarray(beta, dtype=float) / self.column_scales


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response ``y`` (length n) and design ``X`` (n x p).

    Instances are immutable; the Gram matrix ``X.T @ X / n`` is computed
    lazily and shared with datasets derived through :meth:`with_response`.
    """

    y: np.ndarray
    X: np.ndarray
    names: tuple = ()
    standardization: Optional[StandardizationInfo] = field(default=None, repr=False)

    def __post_init__(self):
        y = _frozen_copy(self.y)
        X = _frozen_copy(self.X)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d array")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be a vector with one entry per row of X")
        n, p = X.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValueError("y and X must contain only finite values")
        names = tuple(self.names) if len(self.names) else tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise ValueError("names must have one label per column")
        y.flags.writeable = False
        X.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        G = self.X.T @ self.X / self.n
        G.flags.writeable = False
        return G

    @property
    def selectable(self) -> np.ndarray:
        """Mask of columns the path solvers may activate (non-constant ones)."""
        if self.standardization is None:
            return np.any(self.X != self.X[0], axis=0)
        return ~self.standardization.constant_columns

    def with_response(self, y: np.ndarray) -> "Dataset":
        """Same design, new response; reuses the cached Gram matrix."""
        d = Dataset(y, self.X, self.names, self.standardization)
        if "gram" in self.__dict__:
            d.__dict__["gram"] = self.__dict__["gram"]
        return d

    def to_json(self) -> dict:
        return {"names": list(self.names), "y": self.y.tolist(), "X": self.X.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> "Dataset":
        return cls(np.asarray(doc["y"], dtype=float), np.asarray(doc["X"], dtype=float), tuple(doc["names"]))


def standardize(d: Dataset, center_response: bool = True) -> tuple[Dataset, StandardizationInfo]:
    """Center every column and scale it to unit sample sd (divisor n-1).

    Constant columns are zeroed, recorded with scale 1 and flagged; they are
    never selectable by the path solvers.
    """
    X = d.X
    means = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    constant = np.all(X == X[0], axis=0)
    scales = np.where(constant, 1.0, sd)
    Z = (X - means) / scales
    Z[:, constant] = 0.0
    y_mean = float(d.y.mean()) if center_response else 0.0
    info = StandardizationInfo(means, scales, y_mean, constant)
    return Dataset(d.y - y_mean, Z, d.names, info), info


def ols_solve(X_sub: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least squares via column-pivoted QR.

    Raises SingularSystemError when a pivot of R falls below
    ``1e-10 * max column norm``.
    """
    X_sub = np.asarray(X_sub, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X_sub.shape
    if k == 0:
        return np.zeros(0)
    if k > n:
        raise SingularSystemError(f"{k} columns but only {n} rows")
    Q, R, piv = scipy.linalg.qr(X_sub, mode="economic", pivoting=True)
    col_norm = np.sqrt((X_sub ** 2).sum(axis=0)).max()
    diag = np.abs(np.diag(R))
    if col_norm == 0 or diag.min() <= 1e-10 * col_norm:
        raise SingularSystemError("least-squares system is rank deficient")
    z = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(k)
    beta[piv] = z
    return beta


def load_csv(path: str | os.PathLike, response_column: str) -> Dataset:
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if response_column not in header:
            raise ValueError(f"{path}: response column {response_column!r} not in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}")
            values = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(f"{path}: row {lineno}, column {name!r}: cannot parse {cell!r}") from None
                if not math.isfinite(v):
                    raise ValueError(f"{path}: row {lineno}, column {name!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows, found {len(rows)}")
    data = np.array(rows)
    r = header.index(response_column)
    keep = [j for j in range(len(header)) if j != r]
    return Dataset(data[:, r], data[:, keep], tuple(header[j] for j in keep))


def write_csv(d: Dataset, path: str | os.PathLike, response_column: str = "y") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([response_column, *d.names])
        for yi, row in zip(d.y, d.X):
            w.writerow([f"{yi:.12g}", *(f"{v:.12g}" for v in row)])


def load_json(path: str | os.PathLike) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return Dataset.from_json(json.load(fh))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)

