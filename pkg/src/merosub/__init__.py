"""Numeric checks of differential subordination results for Lashin's operator
on meromorphic functions."""

from .series import AnalyticSeries, MeromorphicSeries, evaluate, sample_circle
from .lashin import LashinParams, apply_lashin, lashin_quadrature
from .disk import DiskGrid, Status, Verdict
from .forms import PRESETS, QFamilySpec, QKind, TheoremParams, get_preset
from .verifier import Classification, fuzz_theorem, random_sigma_function, run_trial

__version__ = "0.1.0"

__all__ = [
    "AnalyticSeries",
    "MeromorphicSeries",
    "evaluate",
    "sample_circle",
    "LashinParams",
    "apply_lashin",
    "lashin_quadrature",
    "DiskGrid",
    "Status",
    "Verdict",
    "PRESETS",
    "QFamilySpec",
    "QKind",
    "TheoremParams",
    "get_preset",
    "Classification",
    "fuzz_theorem",
    "random_sigma_function",
    "run_trial",
]
