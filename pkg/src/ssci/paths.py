"""Pathwise coordinate descent for lasso, adaptive lasso, SCAD and MCP."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .data import Dataset

FAMILIES = ("lasso", "adaptive_lasso", "scad", "mcp")
_FAMILY_CODE = {"lasso": _kernels.LASSO, "adaptive_lasso": _kernels.LASSO,
                "scad": _kernels.SCAD, "mcp": _kernels.MCP}
_DEFAULT_NONCONVEXITY = {"scad": 3.7, "mcp": 3.0}

TOL = 1e-8
MAX_SWEEPS = 10_000


class ConvergenceError(RuntimeError):
    def __init__(self, lambda_index: int, lam: float):
        super().__init__(f"coordinate descent did not converge at lambda[{lambda_index}] = {lam:.6g}")
        self.lambda_index = lambda_index


@dataclass(frozen=True, eq=False)
class PenaltySpec:
    family: str = "lasso"
    nonconvexity: Optional[float] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}")
        if self.nonconvexity is None:
            object.__setattr__(self, "nonconvexity", _DEFAULT_NONCONVEXITY.get(self.family, 0.0))
        if self.family == "scad" and not self.nonconvexity > 2:
            raise ValueError("SCAD requires a > 2")
        if self.family == "mcp" and not self.nonconvexity > 1:
            raise ValueError("MCP requires gamma > 1")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if not (np.all(np.isfinite(w)) and np.all(w > 0)):
                raise ValueError("penalty weights must be finite and positive")
            object.__setattr__(self, "weights", w)
        elif self.family == "adaptive_lasso":
            raise ValueError("adaptive_lasso needs weights (see adaptive_weights)")

    def penalty_weights(self, p: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(p)
        if self.weights.shape != (p,):
            raise ValueError("penalty weights must have length p")
        return self.weights

    def value(self, beta: np.ndarray, lam: float) -> float:
        """Penalty evaluated at ``beta`` (summed over coordinates)."""
        b = np.abs(np.asarray(beta, dtype=float))
        lj = lam * self.penalty_weights(b.shape[0])
        a = self.nonconvexity
        if self.family in ("lasso", "adaptive_lasso"):
            return float(np.sum(lj * b))
        if self.family == "mcp":
            return float(np.sum(np.where(b <= a * lj, lj * b - b * b / (2 * a), a * lj * lj / 2)))
        mid = (2 * a * lj * b - b * b - lj * lj) / (2 * (a - 1))
        return float(np.sum(np.where(b <= lj, lj * b, np.where(b <= a * lj, mid, lj * lj * (a + 1) / 2))))


@dataclass(frozen=True, eq=False)
class LambdaGrid:
    """Tuning parameters, stored in strictly decreasing order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("grid must be a non-empty vector")
        if not np.all(v > 0):
            raise ValueError("grid values must be positive")
        if np.any(np.diff(v) >= 0):
            raise ValueError("grid must be strictly decreasing")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Row k of ``coefs`` solves the penalized problem at ``grid.values[k]``."""

    grid: LambdaGrid
    coefs: np.ndarray
    penalty: PenaltySpec

    def to_json(self) -> dict:
        return {"lambdas": self.grid.values.tolist(), "coefs": self.coefs.tolist(),
                "penalty": self.penalty.family}


def soft_threshold(z: float, t: float) -> float:
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    return float(np.sign(z) * max(abs(z) - t, 0.0))


def lambda_max(d: Dataset, weights: Optional[np.ndarray] = None) -> float:
    return _lambda_max(d.X.T @ d.y / d.n, d.selectable, weights)


def _lambda_max(c, selectable, weights=None):
    score = np.abs(c)
    if weights is not None:
        score = score / weights
    score = np.where(selectable, score, 0.0)
    return float(score.max())


def default_ratio(n: int, p: int) -> float:
    return 1e-3 if n > p else 1e-2


def make_lambda_grid(d: Dataset, K: int = 100, ratio: Optional[float] = None,
                     weights: Optional[np.ndarray] = None) -> LambdaGrid:
    """K log-spaced values from lambda_max = max_j |x_j'y|/n down to ratio * lambda_max.

    With ``weights`` the maximum is taken over |x_j'y|/(n w_j), the smallest
    value at which the weighted problem has an all-zero solution.
    """
    if ratio is None:
        ratio = default_ratio(d.n, d.p)
    return _grid_from_max(lambda_max(d, weights), K, ratio)


def _grid_from_max(lmax: float, K: int, ratio: float) -> LambdaGrid:
    if K < 2:
        raise ValueError("grid needs K >= 2")
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    if lmax <= 0:
        raise ValueError("lambda_max is zero: the response is orthogonal to every column")
    return LambdaGrid(lmax * np.logspace(0.0, np.log10(ratio), K))


def _check_curvature(G: np.ndarray, selectable: np.ndarray, penalty: PenaltySpec) -> None:
    a = penalty.nonconvexity
    v = np.diag(G)[selectable]
    if v.size == 0:
        return
    if penalty.family == "scad" and v.min() <= 1 / (a - 1):
        raise ValueError("column second moments too small for SCAD with this a")
    if penalty.family == "mcp" and v.min() <= 1 / a:
        raise ValueError("column second moments too small for MCP with this gamma")


def solve_path(G: np.ndarray, c: np.ndarray, lambdas: np.ndarray, penalty: PenaltySpec,
               selectable: np.ndarray, beta0: Optional[np.ndarray] = None,
               tol: float = TOL, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Covariance-form solver; returns the K x p coefficient matrix.

    The stopping threshold is ``tol`` times lambda_max of the problem so that
    the iterates, and their number, are equivariant under rescaling ``y``.
    """
    p = c.shape[0]
    selectable = np.asarray(selectable, dtype=np.bool_) & (np.diag(G) > 1e-12)
    _check_curvature(G, selectable, penalty)
    lambdas = np.ascontiguousarray(lambdas, dtype=float)
    out = np.zeros((lambdas.size, p))
    scale = float(np.abs(c).max())
    thresh = tol * scale if scale > 0 else tol
    b0 = np.zeros(p) if beta0 is None else np.asarray(beta0, dtype=float)
    status = _kernels.cd_path(np.ascontiguousarray(G), np.ascontiguousarray(c), lambdas,
                              penalty.penalty_weights(p), _FAMILY_CODE[penalty.family],
                              float(penalty.nonconvexity), selectable,
                              b0, thresh, max_sweeps, out)
    if status >= 0:
        raise ConvergenceError(int(status), float(lambdas[status]))
    return out


def fit_path(d: Dataset, penalty: PenaltySpec, grid: Optional[LambdaGrid] = None,
             tol: float = TOL, max_sweeps: int = MAX_SWEEPS) -> SolutionPath:
    """Solve (1/2n)||y - X b||^2 + pen(b; lam) along the grid, largest lambda first."""
    if grid is None:
        grid = make_lambda_grid(d, weights=penalty.weights)
    coefs = solve_path(d.gram, d.X.T @ d.y / d.n, grid.values, penalty, d.selectable,
                       tol=tol, max_sweeps=max_sweeps)
    return SolutionPath(grid, coefs, penalty)


def fit_single(d: Dataset, penalty: PenaltySpec, lam: float,
               beta0: Optional[np.ndarray] = None) -> np.ndarray:
    """Solution at one lambda, from ``beta0`` (cold start when omitted)."""
    return solve_path(d.gram, d.X.T @ d.y / d.n, np.array([lam]), penalty, d.selectable, beta0)[0]


def objective(d: Dataset, beta: np.ndarray, lam: float, penalty: PenaltySpec) -> float:
    r = d.y - d.X @ beta
    return float(r @ r / (2 * d.n)) + penalty.value(beta, lam)


def check_kkt(d: Dataset, beta: np.ndarray, lam: float,
              weights: Optional[np.ndarray] = None) -> float:
    """Largest violation of the lasso (or weighted lasso) optimality conditions."""
    beta = np.asarray(beta, dtype=float)
    r = d.y - d.X @ beta
    grad = d.X.T @ r / d.n
    lj = lam * (np.ones(d.p) if weights is None else np.asarray(weights, dtype=float))
    active = beta != 0
    viol = np.where(active, np.abs(grad - lj * np.sign(beta)), np.maximum(0.0, np.abs(grad) - lj))
    viol = np.where(d.selectable, viol, 0.0)
    return float(viol.max())


def cv_fold_ids(n: int, folds: int, seed: int) -> np.ndarray:
    """Balanced fold labels 0..folds-1 in a seed-determined order."""
    if folds < 2 or n < folds:
        raise ValueError("need 2 <= folds <= n")
    rng = np.random.Generator(np.random.PCG64(seed))
    ids = np.arange(n) % folds
    return rng.permutation(ids)


def cv_errors(d: Dataset, penalty: PenaltySpec, grid: LambdaGrid, fold_ids: np.ndarray) -> np.ndarray:
    """Mean held-out squared error for each grid value.

    Each training fold is centered with its own means before fitting; the
    held-out rows are predicted with the matching intercept.
    """
    X, y = d.X, d.y
    n_total = np.zeros(len(grid))
    G_full = d.gram * d.n
    Xty_full = X.T @ y
    for f in np.unique(fold_ids):
        test = fold_ids == f
        Xte, yte = X[test], y[test]
        n_tr = d.n - Xte.shape[0]
        sx = X.sum(axis=0) - Xte.sum(axis=0)
        sy = y.sum() - yte.sum()
        mx, my = sx / n_tr, sy / n_tr
        # centered training Gram / cross-products from full-data totals
        G = (G_full - Xte.T @ Xte - n_tr * np.outer(mx, mx)) / n_tr
        c = (Xty_full - Xte.T @ yte - n_tr * mx * my) / n_tr
        coefs = solve_path(G, c, grid.values, penalty, d.selectable)
        pred = my + (Xte - mx) @ coefs.T
        n_total += ((yte[:, None] - pred) ** 2).sum(axis=0)
    return n_total / d.n


def cv_best_index(errors: np.ndarray) -> int:
    # grid is descending, so the first minimizer is the largest lambda
    return int(np.flatnonzero(errors == errors.min())[0])


def adaptive_weights(d: Dataset, seed: int = 0, folds: int = 10, exponent: float = 1.0,
                     floor: float = 1e-6) -> np.ndarray:
    """1 / (|b_init| + floor)^exponent with b_init the CV-tuned lasso fit."""
    lasso = PenaltySpec("lasso")
    grid = make_lambda_grid(d)
    errs = cv_errors(d, lasso, grid, cv_fold_ids(d.n, folds, seed))
    best = cv_best_index(errs)
    coefs = solve_path(d.gram, d.X.T @ d.y / d.n, grid.values[: best + 1], lasso, d.selectable)
    return 1.0 / (np.abs(coefs[-1]) + floor) ** exponent
