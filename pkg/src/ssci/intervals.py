"""Sparsified simultaneous confidence intervals and model confidence bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .bootstrap import BootstrapEnsemble
from .data import Dataset, StandardizationInfo, ols_solve

SIGNIFICANT = "significant"
PLAUSIBLE = "plausible"
UNIMPORTANT = "unimportant"


@dataclass(frozen=True, eq=False)
class OutlyingnessScores:
    scores: np.ndarray
    coordinate_means: np.ndarray
    coordinate_ses: np.ndarray


@dataclass(frozen=True, eq=False)
class McbResult:
    lower_model: frozenset
    upper_model: frozenset
    width: int

    def __post_init__(self):
        if not self.lower_model <= self.upper_model:
            raise ValueError("lower bound model must be nested in the upper one")


@dataclass(frozen=True, eq=False)
class SsciResult:
    alpha: float
    lower: np.ndarray
    upper: np.ndarray
    retained: np.ndarray  # 1-based replicate ids
    q: float
    classes: tuple
    names: tuple = ()
    retained_betas: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    def rescaled(self, factors: np.ndarray) -> "SsciResult":
        """Bounds multiplied coordinatewise by positive ``factors``."""
        f = np.asarray(factors, dtype=float)
        rb = None if self.retained_betas is None else self.retained_betas * f
        return SsciResult(self.alpha, self.lower * f, self.upper * f, self.retained, self.q,
                          self.classes, self.names, rb)

    def to_original_scale(self, info: StandardizationInfo) -> "SsciResult":
        return self.rescaled(1.0 / info.column_scales)

    def to_json(self, mcb: Optional[McbResult] = None) -> dict:
        mcb = mcb_from_ssci(self) if mcb is None else mcb
        names = self.names or tuple(f"x{j + 1}" for j in range(self.p))
        return {
            "alpha": self.alpha,
            "intervals": [{"name": names[j], "lower": float(self.lower[j]), "upper": float(self.upper[j]),
                           "class": self.classes[j]} for j in range(self.p)],
            "mcb": {"lower_model": [names[j] for j in sorted(mcb.lower_model)],
                    "upper_model": [names[j] for j in sorted(mcb.upper_model)],
                    "width": mcb.width},
            "retained_count": int(self.retained.size),
        }


def classify(lower: np.ndarray, upper: np.ndarray) -> tuple:
    out = []
    for lo, hi in zip(lower, upper):
        if lo * hi > 0:
            out.append(SIGNIFICANT)
        elif lo == 0 and hi == 0:
            out.append(UNIMPORTANT)
        else:
            out.append(PLAUSIBLE)
    return tuple(out)


def outlyingness_scores(betas: np.ndarray | BootstrapEnsemble) -> OutlyingnessScores:
    """Max over coordinates of |b_j - mean_j| / se_j, zero-se coordinates ignored."""
    if isinstance(betas, BootstrapEnsemble):
        betas = betas.betas
    betas = np.asarray(betas, dtype=float)
    if betas.shape[0] < 2:
        raise ValueError("need at least two bootstrap draws")
    mean = betas.mean(axis=0)
    se = betas.std(axis=0, ddof=1)
    dev = np.abs(betas - mean)
    safe = np.where(se > 0, se, 1.0)
    z = np.where(se > 0, dev / safe, 0.0)
    return OutlyingnessScores(z.max(axis=1), mean, se)


def _retained_count(alpha: float, B: int) -> int:
    # round first so that e.g. 0.95 * 100 does not become 95.00000000000001
    return int(math.ceil(round((1.0 - alpha) * B, 9)))


def build_ssci(ens: BootstrapEnsemble | np.ndarray, alpha: float = 0.05,
               names: Sequence[str] = (),
               scores: Optional[OutlyingnessScores] = None) -> SsciResult:
    """Coordinatewise min/max over the draws whose outlyingness is within the
    ceil((1-alpha)B)-th smallest score (ties kept)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if isinstance(ens, BootstrapEnsemble):
        names = names or ens.names
        betas = ens.betas
    else:
        betas = np.asarray(ens, dtype=float)
    B = betas.shape[0]
    k = _retained_count(alpha, B)
    if k < 1:
        raise ValueError(f"alpha={alpha} retains no draws out of B={B}")
    if scores is None:
        scores = outlyingness_scores(betas)
    q = float(np.sort(scores.scores)[k - 1])
    keep = np.flatnonzero(scores.scores <= q)
    kept = betas[keep]
    lower = kept.min(axis=0)
    upper = kept.max(axis=0)
    return SsciResult(float(alpha), lower, upper, keep + 1, q, classify(lower, upper), tuple(names), kept)


def mcb_from_ssci(s: SsciResult) -> McbResult:
    sig = frozenset(j for j, c in enumerate(s.classes) if c == SIGNIFICANT)
    pla = frozenset(j for j, c in enumerate(s.classes) if c == PLAUSIBLE)
    return McbResult(sig, sig | pla, len(pla))


def sweep_alpha(ens: BootstrapEnsemble | np.ndarray, alphas: Sequence[float]) -> list:
    betas = ens.betas if isinstance(ens, BootstrapEnsemble) else np.asarray(ens, dtype=float)
    names = ens.names if isinstance(ens, BootstrapEnsemble) else ()
    scores = outlyingness_scores(betas)
    out = []
    for a in alphas:
        if not 0 < a < 1:
            raise ValueError("alphas must lie in (0, 1)")
        s = build_ssci(betas, a, names, scores)
        out.append((a, s, mcb_from_ssci(s)))
    return out


@dataclass(frozen=True, eq=False)
class OracleIntervals:
    lower: np.ndarray
    upper: np.ndarray
    estimate: np.ndarray

    def rescaled(self, factors: np.ndarray) -> "OracleIntervals":
        f = np.asarray(factors, dtype=float)
        return OracleIntervals(self.lower * f, self.upper * f, self.estimate * f)


def oracle_bonferroni_sci(d: Dataset, true_model: Sequence[int], alpha: float = 0.05,
                          intercept: bool = True) -> OracleIntervals:
    """Bonferroni t-intervals from the least-squares fit on the true support.

    ``intercept`` accounts for a response that was centered before fitting:
    one residual degree of freedom is then spent on the mean.
    """
    S = sorted(int(j) for j in true_model)
    s0 = len(S)
    lower = np.zeros(d.p)
    upper = np.zeros(d.p)
    est = np.zeros(d.p)
    if s0 == 0:
        return OracleIntervals(lower, upper, est)
    dof = d.n - s0 - (1 if intercept else 0)
    if dof < 1:
        raise ValueError("true model leaves no residual degrees of freedom")
    XS = d.X[:, S]
    b = ols_solve(XS, d.y)
    r = d.y - XS @ b
    sigma2 = r @ r / dof
    # diag((X_S'X_S)^-1) through the R factor of a QR decomposition
    Rfac = np.linalg.qr(XS, mode="r")
    Rinv = np.linalg.inv(Rfac)
    se = np.sqrt(sigma2 * (Rinv ** 2).sum(axis=1))
    tq = stats.t.ppf(1 - alpha / (2 * s0), dof)
    est[S] = b
    lower[S] = b - tq * se
    upper[S] = b + tq * se
    return OracleIntervals(lower, upper, est)
