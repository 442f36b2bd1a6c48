"""SSCI and MCB-progression figures rendered to SVG with matplotlib."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .intervals import PLAUSIBLE, SIGNIFICANT, UNIMPORTANT, SsciResult

RED = "#c0392b"
GREY = "#bdbdbd"
BLUE = "#9ecae1"
LINE_BLUE = "#6baed6"

MAX_LABELS = 60
PLAUSIBLE_ORDER_RULE = "plausible covariates ordered by descending interval width"

ORDER_RULES = ("sign-class", "index")

_RC = {"svg.hashsalt": "ssci", "svg.fonttype": "none", "font.family": "sans-serif", "font.size": 12}


@dataclass(frozen=True, eq=False)
class PlotSpec:
    width_px: int = 900
    height_px: int = 500
    order: str = "sign-class"
    show_bootstrap_lines: bool = True
    truth_overlay: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("canvas dimensions must be positive")
        if self.order not in ORDER_RULES:
            raise ValueError(f"unknown ordering rule {self.order!r}")


def ssci_order(result: SsciResult) -> list:
    """Positive significant (left), plausible, unimportant, negative significant (right)."""
    lo, hi = result.lower, result.upper
    mid = (lo + hi) / 2
    idx = range(result.p)
    pos = sorted((j for j in idx if result.classes[j] == SIGNIFICANT and lo[j] > 0), key=lambda j: (-mid[j], j))
    neg = sorted((j for j in idx if result.classes[j] == SIGNIFICANT and hi[j] < 0), key=lambda j: (-mid[j], j))
    pla = sorted((j for j in idx if result.classes[j] == PLAUSIBLE), key=lambda j: (-(hi[j] - lo[j]), j))
    unim = [j for j in idx if result.classes[j] == UNIMPORTANT]
    return pos + pla + unim + neg


def _figure(plot: PlotSpec) -> Figure:
    dpi = 100
    return Figure(figsize=(plot.width_px / dpi, plot.height_px / dpi), dpi=dpi)


def _to_svg(fig: Figure, description: str) -> str:
    import matplotlib

    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        FigureCanvasSVG(fig)
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "ssci",
                                                  "Description": description})
    return buf.getvalue()


def render_ssci_svg(result: SsciResult, plot: PlotSpec = PlotSpec()) -> str:
    """Intervals side by side in plotting order with shaded class bands."""
    import matplotlib

    order = ssci_order(result) if plot.order == "sign-class" else list(range(result.p))
    names = result.names or tuple(f"x{j + 1}" for j in range(result.p))
    with matplotlib.rc_context(_RC):
        fig = _figure(plot)
        ax = fig.add_subplot(1, 1, 1)
        xs = np.arange(len(order))
        cls = [result.classes[j] for j in order]
        colours = {PLAUSIBLE: GREY, UNIMPORTANT: BLUE}
        seen = {}
        for label, start, stop in _runs(cls):
            if label in colours:
                k = seen.get(label, 0)
                seen[label] = k + 1
                gid = f"band-{label}" if k == 0 else f"band-{label}-{k}"
                ax.axvspan(start - 0.5, stop - 0.5, color=colours[label], alpha=0.5, lw=0, gid=gid)
        if plot.show_bootstrap_lines and result.retained_betas is not None:
            for k, row in enumerate(result.retained_betas):
                ax.plot(xs, row[order], color=LINE_BLUE, lw=0.4, alpha=0.25, gid=f"bootstrap-{k}")
        for i, j in enumerate(order):
            colour = RED if cls[i] == SIGNIFICANT else "black"
            ax.plot([i, i], [result.lower[j], result.upper[j]], color=colour, lw=1.6,
                    marker="_", ms=6, solid_capstyle="butt", gid=f"interval-{i}")
        if plot.truth_overlay is not None:
            truth = np.asarray(plot.truth_overlay, dtype=float)[order]
            ax.plot(xs, truth, ls="none", marker="o", ms=2, color="red", gid="truth")
        ax.axhline(0.0, color="black", lw=0.5)
        ax.set_xlim(-0.5, len(order) - 0.5)
        if result.p <= MAX_LABELS:
            ax.set_xticks(xs)
            ax.set_xticklabels([names[j] for j in order], rotation=90)
            for tick, c in zip(ax.get_xticklabels(), cls):
                if c == SIGNIFICANT:
                    tick.set_color(RED)
            ax.set_xlabel("covariate")
        else:
            ax.set_xticks([])
            ax.set_xlabel(f"{result.p} covariates")
        ax.set_ylabel("coefficient")
        ax.set_title(f"SSCI at {100 * (1 - result.alpha):g}% confidence")
        fig.tight_layout()
        return _to_svg(fig, PLAUSIBLE_ORDER_RULE)


def _runs(labels):
    """Maximal runs of equal labels as (label, start, stop)."""
    out = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            out.append((labels[start], start, i))
            start = i
    return out


def progression_order(sweep: Sequence) -> list:
    """Covariate order that makes every level's classes contiguous.

    Significance only grows as confidence falls and unimportance only grows
    as confidence falls, so sorting by how many levels a covariate is
    significant at (descending), then unimportant at (ascending) keeps the
    red block left and the blue block right at every level.
    """
    p = sweep[0][1].p
    sig = np.zeros(p, dtype=int)
    uni = np.zeros(p, dtype=int)
    for _, s, _ in sweep:
        sig += np.array([c == SIGNIFICANT for c in s.classes])
        uni += np.array([c == UNIMPORTANT for c in s.classes])
    return sorted(range(p), key=lambda j: (-sig[j], uni[j], j))


def progression_bands(sweep: Sequence) -> list:
    """Per level: (confidence, red count, grey count, blue count) in plotting order."""
    out = []
    for alpha, s, mcb in sorted(sweep, key=lambda t: -t[0]):
        n_sig = len(mcb.lower_model)
        n_pla = mcb.width
        out.append((1 - alpha, n_sig, n_pla, s.p - n_sig - n_pla))
    return out


def render_mcb_progression_svg(sweep: Sequence, plot: PlotSpec = PlotSpec()) -> str:
    """Stacked bands: x = covariates, y = confidence level."""
    import matplotlib

    if not sweep:
        raise ValueError("empty sweep")
    bands = progression_bands(sweep)
    p = sweep[0][1].p
    levels = [b[0] for b in bands]
    edges = _level_edges(levels)
    with matplotlib.rc_context(_RC):
        fig = _figure(plot)
        ax = fig.add_subplot(1, 1, 1)
        for k, (conf, n_sig, n_pla, n_uni) in enumerate(bands):
            y0, h = edges[k], edges[k + 1] - edges[k]
            x = 0.0
            for label, width, colour in (("lower", n_sig, RED), ("plausible", n_pla, GREY),
                                         ("unimportant", n_uni, BLUE)):
                ax.add_patch(Rectangle((x, y0), width, h, facecolor=colour, edgecolor="none",
                                       gid=f"level-{k}-{label}"))
                x += width
        ax.set_xlim(0, p)
        ax.set_ylim(edges[0], edges[-1])
        if p <= MAX_LABELS:
            names = sweep[0][1].names or tuple(f"x{j + 1}" for j in range(p))
            ax.set_xticks(np.arange(p) + 0.5)
            ax.set_xticklabels([names[j] for j in progression_order(sweep)], rotation=90)
            ax.set_xlabel("covariate")
        else:
            ax.set_xticks([])
            ax.set_xlabel(f"{p} covariates")
        ax.set_yticks(levels)
        ax.set_ylabel("confidence level")
        ax.set_title("Model confidence bounds by confidence level")
        fig.tight_layout()
        return _to_svg(fig, "red: lower bound model; grey: plausible; blue: unimportant")


def _level_edges(levels: Sequence[float]) -> list:
    if len(levels) == 1:
        return [levels[0] - 0.025, levels[0] + 0.025]
    mids = [(a + b) / 2 for a, b in zip(levels[:-1], levels[1:])]
    return [levels[0] - (mids[0] - levels[0])] + mids + [levels[-1] + (levels[-1] - mids[-1])]
