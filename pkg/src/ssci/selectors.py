"""Variable selectors and the select-then-refit estimator.

Two families of selectors are provided: partitioning of a whole solution
path (``spsp-*``) and k-fold cross-validation at a single tuning value
(``cv-*``).  Either is followed by a least-squares refit on the chosen
support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .data import Dataset, SingularSystemError, ols_solve
from .paths import (
    LambdaGrid, PenaltySpec, SolutionPath, _grid_from_max, _lambda_max, adaptive_weights,
    cv_best_index, cv_errors, cv_fold_ids, default_ratio, solve_path,
)

DEFAULT_R = 5.0

METHODS = ("spsp-lasso", "spsp-adalasso", "spsp-scad", "spsp-mcp",
           "cv-lasso", "cv-adalasso", "cv-scad", "cv-mcp")
_FAMILY = {"lasso": "lasso", "adalasso": "adaptive_lasso", "scad": "scad", "mcp": "mcp"}


@dataclass(frozen=True)
class SpspConfig:
    control_ratio: Union[float, str] = "auto"
    tie_rule: str = "smallest"

    def __post_init__(self):
        if self.control_ratio != "auto" and not float(self.control_ratio) > 0:
            raise ValueError("control ratio R must be positive")
        if self.tie_rule != "smallest":
            raise ValueError("only the smallest-set tie rule is supported")


@dataclass(frozen=True)
class SelectorSpec:
    """Configuration of a two-stage selector.

    ``method`` is one of :data:`METHODS`; ``R`` feeds the path partition,
    ``folds`` the cross-validated variants.  ``K`` and ``ratio`` define the
    lambda grid (ratio ``None`` picks the n/p-dependent default).
    """

    method: str = "spsp-lasso"
    R: Union[float, str] = "auto"
    folds: int = 10
    K: int = 100
    ratio: Optional[float] = None
    nonconvexity: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown selector {self.method!r}; choose from {', '.join(METHODS)}")
        if self.R != "auto":
            object.__setattr__(self, "R", float(self.R))
        SpspConfig(self.R)

    @property
    def kind(self) -> str:
        return self.method.split("-")[0]

    @property
    def family(self) -> str:
        return _FAMILY[self.method.split("-")[1]]

    @classmethod
    def parse(cls, text: str, **kwargs) -> "SelectorSpec":
        return cls(method=text.strip().lower(), **kwargs)

    def to_json(self) -> dict:
        return {"method": self.method, "R": self.R, "folds": self.folds, "K": self.K,
                "ratio": self.ratio, "nonconvexity": self.nonconvexity}


@dataclass(frozen=True, eq=False)
class SelectedModel:
    indices: tuple
    beta_refit: np.ndarray
    selector_tag: str
    truncated: bool = False

    def __post_init__(self):
        off = np.ones(self.beta_refit.shape[0], dtype=bool)
        off[list(self.indices)] = False
        if np.any(self.beta_refit[off] != 0):
            raise ValueError("refit coefficients must vanish off the selected support")


# -- path partition ----------------------------------------------------------

def partition_at_lambda(beta_k: np.ndarray, R: float) -> frozenset:
    """Indices above the admissible gap in the sorted |beta_k| (empty if none)."""
    if not R > 0:
        raise ValueError("R must be positive")
    absb = np.abs(np.asarray(beta_k, dtype=float))
    s, order = _kernels.partition_size(absb, float(R))
    return frozenset(int(j) for j in order[absb.size - s:]) if s else frozenset()


def estimate_R(path: SolutionPath, config: SpspConfig = SpspConfig()) -> float:
    """Control ratio for ``path``.

    Explicit values pass through; ``"auto"`` currently resolves to the
    constant :data:`DEFAULT_R`.
    """
    if config.control_ratio == "auto":
        return DEFAULT_R
    return float(config.control_ratio)


def spsp_select(path: SolutionPath, config: SpspConfig = SpspConfig()) -> frozenset:
    R = estimate_R(path, config)
    mask = np.zeros(path.coefs.shape[1], dtype=np.bool_)
    _kernels.spsp_union(np.ascontiguousarray(path.coefs), R, mask)
    return frozenset(int(j) for j in np.flatnonzero(mask))


# -- cross-validation ------------------------------------------------------------

def cv_select(d: Dataset, penalty: PenaltySpec, folds: int = 10, seed: int = 0,
              grid: Optional[LambdaGrid] = None) -> frozenset:
    """Support of the full-data fit at the CV-optimal lambda (ties: larger lambda)."""
    if grid is None:
        grid = _grid_from_max(_lambda_max(d.X.T @ d.y / d.n, d.selectable, penalty.weights),
                              100, default_ratio(d.n, d.p))
    errs = cv_errors(d, penalty, grid, cv_fold_ids(d.n, folds, seed))
    best = cv_best_index(errs)
    coefs = solve_path(d.gram, d.X.T @ d.y / d.n, grid.values[: best + 1], penalty, d.selectable)
    return frozenset(int(j) for j in np.flatnonzero(coefs[-1]))


# -- two-stage estimator ---------------------------------------------------------

def _penalty_for(d: Dataset, spec: SelectorSpec, seed: int) -> PenaltySpec:
    if spec.family == "adaptive_lasso":
        return PenaltySpec("adaptive_lasso", weights=adaptive_weights(d, seed=seed, folds=spec.folds))
    return PenaltySpec(spec.family, spec.nonconvexity)


def select(d: Dataset, spec: SelectorSpec, seed: int = 0) -> frozenset:
    penalty = _penalty_for(d, spec, seed)
    c = d.X.T @ d.y / d.n
    ratio = spec.ratio if spec.ratio is not None else default_ratio(d.n, d.p)
    grid = _grid_from_max(_lambda_max(c, d.selectable, penalty.weights), spec.K, ratio)
    if spec.kind == "cv":
        return cv_select(d, penalty, spec.folds, seed, grid)
    coefs = solve_path(d.gram, c, grid.values, penalty, d.selectable)
    return spsp_select(SolutionPath(grid, coefs, penalty), SpspConfig(spec.R))


def refit(d: Dataset, indices, tag: str = "") -> SelectedModel:
    """Least-squares refit on ``indices``; larger-than-(n-1) supports are cut.

    Truncation keeps the n-1 columns with the largest |x_j'y|.
    """
    idx = sorted(int(j) for j in indices)
    truncated = False
    if len(idx) > d.n - 1:
        score = np.abs(d.X[:, idx].T @ d.y)
        keep = np.argsort(-score, kind="mergesort")[: d.n - 1]
        idx = sorted(idx[k] for k in keep)
        truncated = True
    beta = np.zeros(d.p)
    if idx:
        try:
            beta[idx] = ols_solve(d.X[:, idx], d.y)
        except SingularSystemError as exc:
            raise SingularSystemError(f"refit on collinear selection {[d.names[j] for j in idx]}") from exc
    return SelectedModel(tuple(idx), beta, tag, truncated)


def two_stage(d: Dataset, selector: SelectorSpec, seed: int = 0) -> SelectedModel:
    """Select a support with ``selector`` and refit it by least squares."""
    return refit(d, select(d, selector, seed), selector.method)
