"""Sparsified simultaneous confidence intervals for high-dimensional linear models."""

__version__ = "0.1.0"

from .data import Dataset, StandardizationInfo, load_csv, ols_solve, standardize  # noqa: E402
from .paths import LambdaGrid, PenaltySpec, SolutionPath, check_kkt, fit_path, make_lambda_grid  # noqa: E402
from .selectors import SelectedModel, SelectorSpec, SpspConfig, spsp_select, two_stage  # noqa: E402
from .bootstrap import BootstrapEnsemble, run_ensemble  # noqa: E402
from .intervals import McbResult, SsciResult, build_ssci, mcb_from_ssci, sweep_alpha  # noqa: E402

__all__ = [
    "Dataset", "StandardizationInfo", "load_csv", "ols_solve", "standardize",
    "LambdaGrid", "PenaltySpec", "SolutionPath", "check_kkt", "fit_path", "make_lambda_grid",
    "SelectedModel", "SelectorSpec", "SpspConfig", "spsp_select", "two_stage",
    "BootstrapEnsemble", "run_ensemble",
    "McbResult", "SsciResult", "build_ssci", "mcb_from_ssci", "sweep_alpha",
]
