import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ssci.bootstrap import run_ensemble, substream
from ssci.intervals import PLAUSIBLE, SIGNIFICANT, UNIMPORTANT, SsciResult, build_ssci, sweep_alpha
from ssci.plotting import (PLAUSIBLE_ORDER_RULE, PlotSpec, progression_bands, progression_order,
                           render_mcb_progression_svg, render_ssci_svg, ssci_order)
from ssci.selectors import SelectorSpec, two_stage
from ssci.simulation import builtin_example, generate_dataset


def _ids(svg):
    root = ET.fromstring(svg)
    return [el.get("id") for el in root.iter() if el.get("id")]


def _result(lower, upper, classes=None):
    lower, upper = np.asarray(lower, float), np.asarray(upper, float)
    from ssci.intervals import classify
    return SsciResult(0.05, lower, upper, np.arange(1, 11), 1.0, classes or classify(lower, upper))


def test_three_covariate_structure():
    res = _result([0.0, 1.0, 0.0], [0.0, 2.0, 0.5])  # unimportant, sig+, plausible
    assert ssci_order(res) == [1, 2, 0]
    ids = _ids(render_ssci_svg(res))
    assert sum(i.startswith("interval-") for i in ids) == 3
    assert sum(i.startswith("band-") for i in ids) == 2
    assert "band-plausible" in ids and "band-unimportant" in ids


def test_all_unimportant_single_band():
    res = _result(np.zeros(5), np.zeros(5))
    ids = _ids(render_ssci_svg(res))
    assert [i for i in ids if i.startswith("band-")] == ["band-unimportant"]


def test_ordering_rule():
    lower = np.array([-3.0, 0.0, 1.0, -0.5, -0.2, 0.0, 2.0])
    upper = np.array([-2.0, 0.0, 1.5, 0.4, 0.1, 0.0, 3.0])
    res = _result(lower, upper)
    order = ssci_order(res)
    cls = [res.classes[j] for j in order]
    assert order[:2] == [6, 2] and order[-1] == 0
    assert cls[2:4] == [PLAUSIBLE, PLAUSIBLE] and order[2:4] == [3, 4]  # wider first
    assert cls[4:6] == [UNIMPORTANT, UNIMPORTANT]


def test_ordering_is_function_of_classes_and_signs():
    res = _result([1.0, -2.0, 0.0], [2.0, -1.0, 0.0])
    flipped = _result([-2.0, 1.0, 0.0], [-1.0, 2.0, 0.0])
    assert ssci_order(res) == [0, 2, 1]
    assert ssci_order(flipped) == [1, 2, 0]


def test_svg_deterministic_and_documented():
    res = _result([0.0, 1.0, -0.3], [0.0, 2.0, 0.5])
    plot = PlotSpec(truth_overlay=np.array([0.0, 1.5, 0.1]))
    a = render_ssci_svg(res, plot)
    assert a == render_ssci_svg(res, plot)
    assert PLAUSIBLE_ORDER_RULE in a
    assert "<dc:date>" not in a
    assert "truth" in _ids(a)


def test_labels_suppressed_for_large_p():
    p = 70
    res = _result(np.zeros(p), np.r_[1.0, np.zeros(p - 1)])
    svg = render_ssci_svg(res)
    assert "70 covariates" in svg and ">x5<" not in svg
    small = render_ssci_svg(_result(np.zeros(3), np.ones(3)))
    assert "x2" in small


def test_plotspec_validation():
    with pytest.raises(ValueError):
        PlotSpec(width_px=0)
    with pytest.raises(ValueError):
        PlotSpec(order="random")


def test_example4_signs_split():
    d, b0 = generate_dataset(builtin_example(4), substream(31, 4))
    sel = SelectorSpec("spsp-lasso")
    ens = run_ensemble(d, two_stage(d, sel), sel, 100, 3, workers=1)
    res = build_ssci(ens, 0.05)
    order = ssci_order(res)
    sig = [j for j in order if res.classes[j] == SIGNIFICANT]
    pos = [j for j in sig if res.lower[j] > 0]
    neg = [j for j in sig if res.upper[j] < 0]
    assert pos and neg
    assert order[: len(pos)] == pos and order[len(order) - len(neg):] == neg
    assert all(b0[j] > 0 for j in pos) and all(b0[j] < 0 for j in neg)
    svg = render_ssci_svg(res, PlotSpec(truth_overlay=b0))
    assert sum(i.startswith("interval-") for i in _ids(svg)) == d.p


@pytest.fixture(scope="module")
def sweep():
    d, _ = generate_dataset(builtin_example(6), substream(8, 6))
    sel = SelectorSpec("spsp-scad")
    ens = run_ensemble(d, two_stage(d, sel), sel, 150, 2, workers=1)
    return sweep_alpha(ens, [0.05 * k for k in range(1, 20)])


def test_progression_single_level(sweep):
    svg = render_mcb_progression_svg(sweep[:1])
    ids = _ids(svg)
    assert {"level-0-lower", "level-0-plausible", "level-0-unimportant"} <= set(ids)
    assert not any(i.startswith("level-1") for i in ids)


def test_progression_identical_levels_rectangular(sweep):
    a, s, m = sweep[0]
    bands = progression_bands([(a, s, m), (a / 2, s, m)])
    assert bands[0][1:] == bands[1][1:]


def test_progression_monotone(sweep):
    bands = progression_bands(sweep)  # ascending confidence
    conf = [b[0] for b in bands]
    assert conf == sorted(conf)
    for lo, hi in zip(bands, bands[1:]):
        assert hi[1] <= lo[1]  # red shrinks
        assert hi[3] <= lo[3]  # blue shrinks
        assert hi[1] + hi[2] >= lo[1] + lo[2]  # upper bound model grows
        assert hi[2] >= lo[2]  # grey widens
    # column order keeps every level's classes contiguous
    order = progression_order(sweep)
    for _, s, _ in sweep:
        labels = [s.classes[j] for j in order]
        rank = {SIGNIFICANT: 0, PLAUSIBLE: 1, UNIMPORTANT: 2}
        assert [rank[c] for c in labels] == sorted(rank[c] for c in labels)
    svg = render_mcb_progression_svg(sweep)
    assert svg == render_mcb_progression_svg(sweep)


def test_progression_empty():
    with pytest.raises(ValueError):
        render_mcb_progression_svg([])
