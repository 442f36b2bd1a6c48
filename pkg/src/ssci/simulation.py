"""Simulation designs and the Monte-Carlo coverage driver."""

from __future__ import annotations

import csv
import io
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import __version__
from .bootstrap import derive_seed, run_ensemble, substream
from .data import Dataset, standardize
from .intervals import build_ssci, mcb_from_ssci, oracle_bonferroni_sci
from .selectors import DEFAULT_R, SelectorSpec, two_stage

ORACLE = "oracle"


@dataclass(frozen=True, eq=False)
class ExampleSpec:
    """A linear-model design. ``theta_index`` is 0-based."""

    n: int
    p: int
    beta0: np.ndarray
    rho: float = 0.0
    sigma: float = 1.0
    theta_index: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        b = np.asarray(self.beta0, dtype=float)
        if b.shape != (self.p,):
            raise ValueError("beta0 must have length p")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must lie in [0, 1)")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "beta0", b)

    @property
    def s0(self) -> int:
        return int(np.count_nonzero(self.beta0))

    @property
    def support(self) -> frozenset:
        return frozenset(int(j) for j in np.flatnonzero(self.beta0))


def _padded(head, p):
    b = np.zeros(p)
    b[: len(head)] = head
    return b


def builtin_example(example_id: int) -> ExampleSpec:
    weak = (1.0, 1.0, 0.5, 0.3)
    table = {
        1: dict(n=200, p=300, head=(4, 3.5, 3, 2.5, 2), rho=0.0),
        2: dict(n=50, p=100, head=(3, 2, 1.5), rho=0.5),
        3: dict(n=200, p=300, head=(3, 2, 1.5), rho=0.5),
        4: dict(n=200, p=300, head=(0.9, -0.85, 0.93, -1, 0.8, -0.85, 0.88), rho=0.5),
        5: dict(n=100, p=20, head=weak, rho=0.0, sigma=2.0, theta_index=3),
        6: dict(n=100, p=20, head=weak, rho=0.2, sigma=2.0, theta_index=3),
        7: dict(n=100, p=20, head=weak, rho=0.5, sigma=2.0, theta_index=3),
        8: dict(n=50, p=300, head=(3, 2, 2), rho=0.0),
        9: dict(n=50, p=150, head=(3, 2, 1.5), rho=0.5),
        10: dict(n=100, p=150, head=(2,) * 15, rho=0.0),
    }
    if example_id not in table:
        raise ValueError(f"unknown example {example_id}; choose 1..10")
    t = dict(table[example_id])
    head = t.pop("head")
    return ExampleSpec(beta0=_padded(head, t["p"]), name=f"example{example_id}", **t)


def ar1_design(n: int, p: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian rows with cor(x_j, x_k) = rho^|j-k| and unit variances."""
    Z = rng.standard_normal((n, p))
    X = np.empty((n, p))
    X[:, 0] = Z[:, 0]
    s = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + s * Z[:, j]
    return X


def generate_dataset(spec: ExampleSpec, rng: np.random.Generator) -> tuple[Dataset, np.ndarray]:
    """Draw (y, X) from ``spec`` and return the standardized dataset and beta0.

    The standardization record on the dataset maps fitted coefficients back
    to the generated scale, where beta0 lives.
    """
    X = ar1_design(spec.n, spec.p, spec.rho, rng)
    y = X @ spec.beta0 + spec.sigma * rng.standard_normal(spec.n)
    d, _ = standardize(Dataset(y, X))
    return d, spec.beta0


@dataclass(frozen=True)
class ReplicationOutcome:
    sci_cover: int
    w_signal: float
    w_noise: float
    mcb_cover: Optional[int] = None
    mcb_width: Optional[int] = None
    theta_cover: Optional[int] = None


def evaluate_intervals(spec: ExampleSpec, lower: np.ndarray, upper: np.ndarray) -> dict:
    b = spec.beta0
    inside = (lower <= b) & (b <= upper)
    width = upper - lower
    sig = b != 0
    out = {"sci_cover": int(inside.all()),
           "w_signal": float(width[sig].mean()) if sig.any() else 0.0,
           "w_noise": float(width[~sig].mean()) if (~sig).any() else 0.0}
    if spec.theta_index is not None:
        out["theta_cover"] = int(inside[spec.theta_index])
    return out


def evaluate_replication(spec: ExampleSpec, ssci, mcb) -> ReplicationOutcome:
    """Coverage/width indicators for one replicate (intervals on the generated scale)."""
    m = evaluate_intervals(spec, ssci.lower, ssci.upper)
    S0 = spec.support
    m["mcb_cover"] = int(mcb.lower_model <= S0 <= mcb.upper_model)
    m["mcb_width"] = int(mcb.width)
    return ReplicationOutcome(**m)


@dataclass(frozen=True)
class SimMetrics:
    sci_coverage: float
    w_signal: float
    w_noise: float
    mcb_coverage: Optional[float]
    mcb_width: Optional[float]
    theta_coverage: Optional[float]
    mc_se: dict = field(default_factory=dict)
    MC: int = 0

    METRICS = ("sci_coverage", "w_signal", "w_noise", "mcb_coverage", "mcb_width", "theta_coverage")


def aggregate(outcomes: list) -> SimMetrics:
    MC = len(outcomes)

    def col(name):
        vals = [getattr(o, name) for o in outcomes]
        return None if any(v is None for v in vals) else np.asarray(vals, dtype=float)

    est, se = {}, {}
    for metric, attr, is_prop in (("sci_coverage", "sci_cover", True), ("w_signal", "w_signal", False),
                                  ("w_noise", "w_noise", False), ("mcb_coverage", "mcb_cover", True),
                                  ("mcb_width", "mcb_width", False), ("theta_coverage", "theta_cover", True)):
        v = col(attr)
        if v is None:
            est[metric] = None
            continue
        m = float(v.mean())
        est[metric] = m
        if is_prop:
            se[metric] = math.sqrt(m * (1 - m) / MC)
        else:
            se[metric] = float(v.std(ddof=1) / math.sqrt(MC)) if MC > 1 else 0.0
    return SimMetrics(mc_se=se, MC=MC, **est)


def _replicate(spec: ExampleSpec, selector, B: int, alpha: float, seed: int, r: int) -> ReplicationOutcome:
    d, _ = generate_dataset(spec, substream(seed, r, 0))
    back = 1.0 / d.standardization.column_scales
    if selector == ORACLE:
        oi = oracle_bonferroni_sci(d, sorted(spec.support), alpha).rescaled(back)
        return ReplicationOutcome(**evaluate_intervals(spec, oi.lower, oi.upper))
    base = two_stage(d, selector, seed=derive_seed(seed, r, 1))
    ens = run_ensemble(d, base, selector, B, derive_seed(seed, r, 2), workers=1)
    s = build_ssci(ens, alpha)
    return evaluate_replication(spec, s.rescaled(back), mcb_from_ssci(s))


def _run_replicates(args):
    spec, selector, B, alpha, seed, ids = args
    out = []
    for r in ids:
        try:
            out.append((r, _replicate(spec, selector, B, alpha, seed, r)))
        except Exception as exc:
            raise RuntimeError(f"replicate {r} failed: {exc}") from exc
    return out


def run_study(spec: ExampleSpec, selector: Union[SelectorSpec, str], MC: int = 200, B: int = 500,
              alpha: float = 0.05, seed: int = 0, workers: int = 1,
              return_outcomes: bool = False):
    """Monte-Carlo coverage study; ``selector`` may be ``"oracle"``.

    Replicate r uses streams addressed by (seed, r, ...) so the metrics do
    not depend on ``workers``.
    """
    if MC < 1:
        raise ValueError("MC must be >= 1")
    if B < 2:
        raise ValueError("B must be >= 2")
    if isinstance(selector, str) and selector != ORACLE:
        selector = SelectorSpec.parse(selector)
    ids = list(range(1, MC + 1))
    workers = max(1, min(int(workers), MC))
    if workers == 1:
        results = _run_replicates((spec, selector, B, alpha, seed, ids))
    else:
        chunks = [ids[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = ex.map(_run_replicates, [(spec, selector, B, alpha, seed, c) for c in chunks])
            results = [x for part in parts for x in part]
    outcomes = [o for _, o in sorted(results, key=lambda t: t[0])]
    metrics = aggregate(outcomes)
    return (metrics, outcomes) if return_outcomes else metrics


def method_label(selector) -> str:
    if selector == ORACLE:
        return "Oracle"
    return f"SSCI ({selector.method})"


def study_csv(rows: list) -> str:
    """Table layout: one row per (example, method) with metrics and their MC SEs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["example", "method", "MC", "B", "alpha"]
    for m in SimMetrics.METRICS:
        header += [m, f"{m}_se"]
    w.writerow(header)
    for example, method, B, alpha, met in rows:
        line = [example, method, met.MC, B, alpha]
        for m in SimMetrics.METRICS:
            v = getattr(met, m)
            line += ["NA" if v is None else f"{v:.6f}",
                     "NA" if m not in met.mc_se else f"{met.mc_se[m]:.6f}"]
        w.writerow(line)
    return buf.getvalue()


def provenance(seed: int, MC: int, B: int, alpha: float, selector, example: int) -> dict:
    import numba
    import scipy

    return {
        "seed": seed, "MC": MC, "B": B, "alpha": alpha, "example": example,
        "selector": selector if selector == ORACLE else selector.to_json(),
        "R_used": None if selector == ORACLE else (DEFAULT_R if selector.R == "auto" else selector.R),
        "versions": {"ssci": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "numba": numba.__version__, "python": platform.python_version()},
    }


def metrics_to_json(met: SimMetrics) -> str:
    return json.dumps(asdict(met), indent=2)
