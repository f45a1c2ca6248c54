# this_file: src/omit_phase/__init__.py
"""Phase-controlled optomechanically induced transparency, amplification and absorption."""

from omit_phase._version import __version__
from omit_phase.model import DriveSet, SystemParams, WorkingPoint, solve_steady_state, working_point_from_G
from omit_phase.response import (
    Method,
    ResponsePoint,
    Spectrum,
    classify_regime,
    compute_spectrum,
    response_closed_form,
    response_exact,
    response_weak_control,
)

__all__ = [
    "DriveSet",
    "Method",
    "ResponsePoint",
    "Spectrum",
    "SystemParams",
    "WorkingPoint",
    "__version__",
    "classify_regime",
    "compute_spectrum",
    "response_closed_form",
    "response_exact",
    "response_weak_control",
    "solve_steady_state",
    "working_point_from_G",
]
