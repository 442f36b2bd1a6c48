"""Command-line entry point: ``ssci fit`` and ``ssci simulate``."""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bootstrap import default_workers, derive_seed, run_ensemble
from .data import atomic_write_text, load_csv, standardize
from .intervals import build_ssci, mcb_from_ssci, sweep_alpha
from .selectors import METHODS, SelectorSpec, two_stage
from .simulation import ORACLE, builtin_example, method_label, provenance, run_study, study_csv

log = logging.getLogger("ssci")

PROGRESSION_ALPHAS = tuple(round(0.05 * k, 2) for k in range(1, 20))

_REQUIRED = {
    "fit": ("data", "response"),
    "simulate": ("example",),
}


class UsageError(Exception):
    pass


def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="ssci", description="Sparsified simultaneous confidence "
                                     "intervals and model confidence bounds.")
    parser.add_argument("--version", action="version", version=f"ssci {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file whose keys mirror the flags")
    common.add_argument("--selector", default="spsp-lasso", help=f"one of {', '.join(METHODS)}")
    common.add_argument("--alpha", type=float, default=0.05)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=None, help="default: $SSCI_WORKERS or 1")
    common.add_argument("--R", dest="R", default="auto", help="control ratio for spsp-* selectors")
    common.add_argument("--out", type=Path, required=False)
    common.add_argument("-v", "--verbose", action="store_true")

    fit = sub.add_parser("fit", parents=[common], help="SSCI and MCB for a CSV dataset")
    fit.add_argument("--data", type=Path)
    fit.add_argument("--response")
    fit.add_argument("--bootstrap", type=int, default=500, help="bootstrap replicates B")
    fit.add_argument("--figures", type=Path, help="directory for the SVG figures")
    fit.add_argument("--csv", type=Path, help="also write the intervals as CSV")

    sim = sub.add_parser("simulate", parents=[common], help="Monte-Carlo coverage study")
    sim.add_argument("--example", type=int)
    sim.add_argument("--mc", type=int, default=200)
    sim.add_argument("--B", dest="B", type=int, default=500)
    return parser, {"fit": fit, "simulate": sim}


def _parse(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser, subparsers = _build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
        # explicit flags win: re-parse with the file values as defaults
        sub = subparsers[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**{k: _coerce(sub, k, v) for k, v in cfg.items()})
        args = parser.parse_args(argv)
    try:
        _validate(args)
    except UsageError as exc:
        parser.error(str(exc))
    return args


def _coerce(sub: argparse.ArgumentParser, key: str, value):
    for a in sub._actions:
        if a.dest == key and a.type is not None and value is not None:
            return a.type(value)
    return value


def _validate(args: argparse.Namespace) -> None:
    for key in _REQUIRED[args.command]:
        if getattr(args, key) is None:
            raise UsageError(f"--{key} is required")
    if args.out is None:
        raise UsageError("--out is required")
    if not 0 < args.alpha < 1:
        raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be >= 1")
    if args.R != "auto":
        try:
            args.R = float(args.R)
        except ValueError:
            raise UsageError(f"--R must be a positive number or 'auto', got {args.R!r}") from None
        if not args.R > 0:
            raise UsageError("--R must be positive")
    valid = METHODS + ((ORACLE,) if args.command == "simulate" else ())
    if args.selector not in valid:
        raise UsageError(f"--selector must be one of {', '.join(valid)}")
    if args.command == "fit":
        if args.bootstrap < 2:
            raise UsageError("--bootstrap must be >= 2")
    else:
        if not 1 <= args.example <= 10:
            raise UsageError("--example must be in 1..10")
        if args.mc < 1:
            raise UsageError("--mc must be >= 1")
        if args.B < 2:
            raise UsageError("--B must be >= 2")


def _intervals_csv(doc: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "lower", "upper", "class"])
    for row in doc["intervals"]:
        w.writerow([row["name"], f"{row['lower']:.10g}", f"{row['upper']:.10g}", row["class"]])
    return buf.getvalue()


def cmd_fit(args: argparse.Namespace) -> int:
    raw = load_csv(args.data, args.response)
    d, info = standardize(raw)
    selector = SelectorSpec.parse(args.selector, R=args.R)
    workers = default_workers() if args.workers is None else args.workers
    base = two_stage(d, selector, seed=derive_seed(args.seed, 0))
    ens = run_ensemble(d, base, selector, args.bootstrap, derive_seed(args.seed, 1), workers=workers)
    s = build_ssci(ens, args.alpha)
    # classes and MCB come from the standardized fit; bounds are reported per raw covariate unit
    doc = s.to_original_scale(info).to_json(mcb_from_ssci(s))
    atomic_write_text(args.out, json.dumps(doc, indent=2) + "\n")
    if args.csv is not None:
        atomic_write_text(args.csv, _intervals_csv(doc))
    if args.figures is not None:
        from .plotting import PlotSpec, render_mcb_progression_svg, render_ssci_svg

        args.figures.mkdir(parents=True, exist_ok=True)
        atomic_write_text(args.figures / "ssci.svg", render_ssci_svg(s.to_original_scale(info), PlotSpec()))
        sweep = sweep_alpha(ens, PROGRESSION_ALPHAS)
        atomic_write_text(args.figures / "mcb_progression.svg", render_mcb_progression_svg(sweep, PlotSpec()))
    log.info("wrote %s", args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = builtin_example(args.example)
    selector = ORACLE if args.selector == ORACLE else SelectorSpec.parse(args.selector, R=args.R)
    workers = default_workers() if args.workers is None else args.workers
    met = run_study(spec, selector, MC=args.mc, B=args.B, alpha=args.alpha, seed=args.seed, workers=workers)
    atomic_write_text(args.out, study_csv([(args.example, method_label(selector), args.B, args.alpha, met)]))
    prov = provenance(args.seed, args.mc, args.B, args.alpha, selector, args.example)
    prov["workers"] = workers
    prov["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    atomic_write_text(Path(str(args.out) + ".provenance.json"), json.dumps(prov, indent=2) + "\n")
    log.info("wrote %s", args.out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parse(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return cmd_fit(args) if args.command == "fit" else cmd_simulate(args)
    except Exception as exc:  # pipeline failure: diagnostic and exit 1
        print(f"ssci: error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
