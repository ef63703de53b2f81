"""Numerical checks for rank-2 parabolic ends, their cap smoothings and spectra."""

from .cap_smoothing import CapProfile, build_cap_profile
from .cli_report import CheckResult, RunConfig, emit_report, load_config, run_suite
from .model_geometry import EndPoint, ParabolicEnd
from .parabolic_bundles import MarkedSurface, ParabolicBundle, ParabolicPoint, SubLineData

__all__ = [
    "CapProfile",
    "CheckResult",
    "EndPoint",
    "MarkedSurface",
    "ParabolicBundle",
    "ParabolicEnd",
    "ParabolicPoint",
    "RunConfig",
    "SubLineData",
    "build_cap_profile",
    "emit_report",
    "load_config",
    "run_suite",
]
