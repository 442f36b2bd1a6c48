"""Residual bootstrap of the select-then-refit estimator."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, SingularSystemError
from .paths import ConvergenceError
from .selectors import SelectedModel, SelectorSpec, two_stage

log = logging.getLogger(__name__)

MAX_RETRIES = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream addressed by ``(seed, *key)``.

    The same address always yields the same stream, whatever process or
    order it is requested in.
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def default_workers() -> int:
    return max(1, int(os.environ.get("SSCI_WORKERS", "1")))


@dataclass(frozen=True, eq=False)
class BootstrapDraw:
    model: tuple
    beta: np.ndarray
    replicate_id: int


@dataclass(frozen=True, eq=False)
class BootstrapEnsemble:
    draws: tuple
    base_model: SelectedModel
    seed: int
    B: int
    names: tuple = ()

    def __post_init__(self):
        if len(self.draws) != self.B:
            raise ValueError("ensemble must hold exactly B draws")
        if [d.replicate_id for d in self.draws] != list(range(1, self.B + 1)):
            raise ValueError("replicate ids must run 1..B")

    @property
    def betas(self) -> np.ndarray:
        """B x p matrix of bootstrap refit coefficients."""
        return np.vstack([d.beta for d in self.draws])

    def to_json(self) -> dict:
        return {"seed": self.seed, "B": self.B,
                "draws": [{"model": list(d.model), "beta": d.beta.tolist()} for d in self.draws]}


def centered_residuals(d: Dataset, base: SelectedModel) -> tuple[np.ndarray, np.ndarray]:
    fitted = d.X @ base.beta_refit
    resid = d.y - fitted
    return fitted, resid - resid.mean()


def residual_bootstrap_sample(d: Dataset, base: SelectedModel, rng: np.random.Generator) -> np.ndarray:
    """One synthetic response X b~ + e*, e* drawn with replacement from centered residuals."""
    fitted, pool = centered_residuals(d, base)
    return fitted + pool[rng.integers(0, d.n, size=d.n)]


def _one_replicate(d: Dataset, fitted: np.ndarray, pool: np.ndarray, selector: SelectorSpec,
                   seed: int, b: int) -> BootstrapDraw:
    for attempt in range(MAX_RETRIES + 1):
        rng = substream(seed, b, attempt)
        y_b = fitted + pool[rng.integers(0, d.n, size=d.n)]
        try:
            m = two_stage(d.with_response(y_b), selector, seed=derive_seed(seed, b, attempt, 1))
        except (SingularSystemError, ConvergenceError) as exc:
            log.warning("bootstrap replicate %d attempt %d failed: %s", b, attempt, exc)
            continue
        return BootstrapDraw(m.indices, m.beta_refit, b)
    raise RuntimeError(f"bootstrap replicate {b} failed {MAX_RETRIES + 1} times")


def _run_chunk(args):
    d, fitted, pool, selector, seed, ids = args
    return [_one_replicate(d, fitted, pool, selector, seed, b) for b in ids]


def run_ensemble(d: Dataset, base: SelectedModel, selector: SelectorSpec, B: int, seed: int,
                 workers: Optional[int] = None) -> BootstrapEnsemble:
    """B residual-bootstrap replicates of ``two_stage`` (Gram matrix shared).

    Replicate b draws from the stream ``(seed, b, attempt)``, so the result
    does not depend on ``workers``.
    """
    if B < 2:
        raise ValueError("need B >= 2")
    workers = default_workers() if workers is None else max(1, int(workers))
    d.gram  # computed once, shipped to workers
    fitted, pool = centered_residuals(d, base)
    ids = list(range(1, B + 1))
    if workers == 1:
        draws = _run_chunk((d, fitted, pool, selector, seed, ids))
    else:
        chunks = [ids[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, [(d, fitted, pool, selector, seed, c) for c in chunks]))
        draws = sorted((dr for part in parts for dr in part), key=lambda dr: dr.replicate_id)
    return BootstrapEnsemble(tuple(draws), base, seed, B, d.names)
