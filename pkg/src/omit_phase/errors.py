# this_file: src/omit_phase/errors.py
"""Exception and warning hierarchy for omit_phase."""

from __future__ import annotations

from difflib import get_close_matches
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence


class OmitPhaseError(Exception):
    """Base class for every error raised by omit_phase."""


class InvalidParameters(OmitPhaseError, ValueError):
    """A value object was constructed outside its invariants."""


class NonConvergence(OmitPhaseError):
    """The steady-state self-consistency iteration did not converge."""


class Multistable(OmitPhaseError):
    """More than one stable steady state exists for the given drives."""

    def __init__(self, msg: str, roots: Sequence[Any]):
        super().__init__(msg)
        self.roots = tuple(roots)


class SingularSystem(OmitPhaseError):
    """The linear-response system has a vanishing determinant."""


class SpectrumPointError(OmitPhaseError):
    """A single grid point of a spectrum failed."""

    def __init__(self, msg: str, index: int, delta_prime: float):
        super().__init__(msg)
        self.index = index
        self.delta_prime = delta_prime


class DimensionCapExceeded(OmitPhaseError):
    """The truncated Hilbert space exceeds the configured dimension cap."""


class SolverFailure(OmitPhaseError):
    """The Liouvillian steady state could not be determined."""


class StepRejection(OmitPhaseError):
    """Adaptive step control gave up while evolving a density matrix."""


class StepFailure(OmitPhaseError):
    """Adaptive step control gave up while integrating the mean-field equations."""


class Divergence(OmitPhaseError):
    """The mean-field trajectory left every reasonable bound."""


class IllConditioned(OmitPhaseError):
    """A least-squares fit window is too short to separate the sidebands."""


class ConfigError(OmitPhaseError):
    """A run configuration is malformed."""


class UnknownPreset(ConfigError):
    """A preset name does not exist in the catalog."""

    def __init__(self, name: str, known: Iterable[str]):
        self.name = name
        self.suggestions = get_close_matches(name, list(known), n=3)
        msg = f"Unknown preset '{name}'"
        if self.suggestions:
            msg += f"; did you mean {', '.join(self.suggestions)}?"
        super().__init__(msg)


class OmitPhaseWarning(UserWarning):
    """Base class for soft-check warnings."""


class ResolvedSidebandWarning(OmitPhaseWarning):
    """omega_m / kappa is below the resolved-sideband threshold."""


class WeakDriveWarning(OmitPhaseWarning):
    """Probe or mechanical drive is not small compared to the control field."""


class RegimeViolation(OmitPhaseWarning):
    """An approximation is evaluated outside its regime of validity."""
