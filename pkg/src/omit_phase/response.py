# this_file: src/omit_phase/response.py
"""Probe response at the two-photon detuning Δ′: exact, closed-form and weak-control.

ε_T = κ_ex⟨δc⟩/ε_p is the output quadrature, 𝒯 = −1 + ε_T the field transmission
and T = |𝒯|² the power transmission. Re ε_T reads as absorption and Im ε_T as
dispersion.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from omit_phase.config import DEFAULT_SETTINGS, Settings
from omit_phase.errors import InvalidParameters, OmitPhaseError, RegimeViolation, SingularSystem, SpectrumPointError
from omit_phase.model import cooperativity

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Sequence

    from omit_phase.model import DriveSet, SystemParams, WorkingPoint


class Method(StrEnum):
    EXACT = "exact"
    CLOSED_FORM = "closed_form"
    WEAK_CONTROL = "weak_control"

    @classmethod
    def parse(cls, value: str | Method) -> Method:
        """Accept the enum, its value, or the short CLI spellings ``closed`` and ``weak``."""
        aliases = {"closed": cls.CLOSED_FORM, "weak": cls.WEAK_CONTROL}
        text = str(value).strip().lower().replace("-", "_")
        if text in aliases:
            return aliases[text]
        try:
            return cls(text)
        except ValueError as e:
            msg = f"unknown method {value!r}; expected exact, closed or weak"
            raise InvalidParameters(msg) from e


@dataclass(frozen=True)
class InterferenceTerms:
    """The two addends of ε_T: the OMIT pathway and the phonon-photon parametric pathway."""

    omit: complex
    parametric: complex

    @property
    def inner_product(self) -> float:
        return float((self.omit * self.parametric.conjugate()).real)

    @property
    def constructive(self) -> bool:
        return self.inner_product > 0.0


@dataclass(frozen=True)
class ResponsePoint:
    """One row of a spectrum."""

    delta_prime: float
    eps_T: complex
    terms: InterferenceTerms | None = None

    @property
    def script_T(self) -> complex:
        return -1.0 + self.eps_T

    @property
    def T(self) -> float:
        return abs(self.script_T) ** 2

    @property
    def absorption(self) -> float:
        return self.eps_T.real

    @property
    def dispersion(self) -> float:
        return self.eps_T.imag

    @property
    def phase_shift(self) -> float:
        """Phase of the transmitted probe relative to the bare −1, arg(−𝒯)."""
        return cmath.phase(-self.script_T)


@dataclass(frozen=True)
class Spectrum:
    """Responses over a strictly increasing Δ′ grid, all at one working point."""

    working_point: WorkingPoint
    points: tuple[ResponsePoint, ...]
    method: Method

    def __post_init__(self) -> None:
        grid = [p.delta_prime for p in self.points]
        if not grid:
            msg = "a spectrum needs at least one point"
            raise InvalidParameters(msg)
        if any(b <= a for a, b in zip(grid, grid[1:], strict=False)):
            msg = "spectrum grid must be strictly increasing"
            raise InvalidParameters(msg)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[ResponsePoint]:
        return iter(self.points)

    @property
    def delta_prime(self) -> np.ndarray:
        return np.array([p.delta_prime for p in self.points])

    @property
    def eps_T(self) -> np.ndarray:
        return np.array([p.eps_T for p in self.points])

    @property
    def T(self) -> np.ndarray:
        return np.array([p.T for p in self.points])


def _determinant(kappa: float, gamma_m: float, G_mag: float, delta_prime: float) -> complex:
    return (kappa / 2.0 - 1j * delta_prime) * (gamma_m / 2.0 - 1j * delta_prime) + G_mag**2


def _require_regular(det: complex, delta_prime: float, settings: Settings) -> None:
    if abs(det) < settings.singular_det:
        msg = f"linear-response determinant vanishes at delta_prime={delta_prime:g}"
        raise SingularSystem(msg)


def fluctuation_means(
    wp: WorkingPoint,
    kappa: float,
    gamma_m: float,
    eps_p: complex,
    eps_a: complex,
    delta_prime: float,
    settings: Settings | None = None,
) -> tuple[complex, complex]:
    """Steady ⟨δc⟩, ⟨δb⟩ of the rotating-frame linear equations, full complex G."""
    settings = settings or DEFAULT_SETTINGS
    G = wp.G
    matrix = np.array(
        [
            [1j * delta_prime - kappa / 2.0, 1j * G],
            [1j * G.conjugate(), 1j * delta_prime - gamma_m / 2.0],
        ],
        dtype=complex,
    )
    _require_regular(_determinant(kappa, gamma_m, abs(G), delta_prime), delta_prime, settings)
    c, b = np.linalg.solve(matrix, -np.array([eps_p, eps_a], dtype=complex))
    return complex(c), complex(b)


def response_exact(
    wp: WorkingPoint,
    kappa: float,
    gamma_m: float,
    eta: float,
    eps_p: complex,
    eps_a: complex,
    delta_prime: float,
    settings: Settings | None = None,
) -> ResponsePoint:
    """ε_T from a direct 2×2 solve; drive phases enter only through the complex amplitudes."""
    eps_p = complex(eps_p)
    if eps_p == 0:
        msg = "probe amplitude eps_p must be nonzero"
        raise InvalidParameters(msg)
    c, _ = fluctuation_means(wp, kappa, gamma_m, eps_p, complex(eps_a), delta_prime, settings)
    return ResponsePoint(float(delta_prime), eta * kappa * c / eps_p)


def _closed_form(
    G_mag: float,
    kappa: float,
    gamma_m: float,
    eta: float,
    y: float,
    phi_total: float,
    delta_prime: float,
    settings: Settings,
) -> ResponsePoint:
    det = _determinant(kappa, gamma_m, G_mag, delta_prime)
    _require_regular(det, delta_prime, settings)
    omit = eta * kappa * (gamma_m / 2.0 - 1j * delta_prime) / det
    parametric = eta * kappa * y * G_mag * cmath.exp(1j * phi_total) / det
    return ResponsePoint(float(delta_prime), omit + parametric, InterferenceTerms(omit, parametric))


def _ratio(eps_p_mag: float, eps_a_mag: float) -> float:
    if not eps_p_mag > 0.0:
        msg = f"probe magnitude must be positive, got {eps_p_mag}"
        raise InvalidParameters(msg)
    return eps_a_mag / eps_p_mag


def response_closed_form(
    wp: WorkingPoint,
    kappa: float,
    gamma_m: float,
    eta: float,
    eps_p_mag: float,
    eps_a_mag: float,
    phi_total: float,
    delta_prime: float,
    settings: Settings | None = None,
) -> ResponsePoint:
    """ε_T as the sum of the OMIT term and the parametric term, both exposed in ``terms``."""
    settings = settings or DEFAULT_SETTINGS
    y = _ratio(eps_p_mag, eps_a_mag)
    return _closed_form(abs(wp.G), kappa, gamma_m, eta, y, phi_total, delta_prime, settings)


def response_weak_control(
    kappa: float,
    gamma_m: float,
    eta: float,
    eps_p_mag: float,
    eps_a_mag: float,
    G_mag: float,
    phi_total: float,
    delta_prime: float,
    settings: Settings | None = None,
    *,
    check_regime: bool = True,
) -> ResponsePoint:
    """C ≪ 1 limit: a width-κ Lorentzian plus a width-γ_m interference term."""
    settings = settings or DEFAULT_SETTINGS
    y = _ratio(eps_p_mag, eps_a_mag)
    if check_regime:
        C = cooperativity(kappa, gamma_m, G_mag)
        if C > settings.weak_control_cooperativity:
            warnings.warn(
                f"weak-control approximation used at C = {C:.3g} > {settings.weak_control_cooperativity:g}",
                RegimeViolation,
                stacklevel=2,
            )
    lorentzian = eta * kappa / (kappa / 2.0 - 1j * delta_prime)
    narrow = eta * kappa * 2.0 * y * G_mag * cmath.exp(1j * phi_total) / (kappa * (gamma_m / 2.0 - 1j * delta_prime))
    return ResponsePoint(float(delta_prime), lorentzian + narrow, InterferenceTerms(lorentzian, narrow))


def default_grid(kind: str, params: SystemParams, points: int = 2001) -> np.ndarray:
    """Wide grid [−κ, κ] or narrow grid [−5γ_m, 5γ_m]."""
    if kind == "wide":
        half = params.kappa
    elif kind == "narrow":
        half = 5.0 * params.gamma_m
    else:
        msg = f"grid kind must be 'wide' or 'narrow', got {kind!r}"
        raise InvalidParameters(msg)
    if points == 1:
        return np.array([0.0])
    return np.linspace(-half, half, points)


def compute_spectrum(
    wp: WorkingPoint,
    grid: Sequence[float] | np.ndarray,
    method: Method | str,
    *,
    params: SystemParams,
    drives: DriveSet,
    settings: Settings | None = None,
) -> Spectrum:
    """Evaluate one response method over a Δ′ grid.

    Raises:
        SpectrumPointError: a grid point failed; ``index`` locates it
    """
    settings = settings or DEFAULT_SETTINGS
    method = Method.parse(method)
    values = np.asarray(grid, dtype=float)
    if values.ndim != 1 or values.size == 0:
        msg = "grid must be a non-empty one-dimensional sequence"
        raise InvalidParameters(msg)
    if np.any(np.diff(values) <= 0.0):
        msg = "grid must be strictly increasing"
        raise InvalidParameters(msg)

    eps_p_mag, eps_a_mag = abs(drives.eps_p), abs(drives.eps_a)
    evaluate: Callable[[float], ResponsePoint]
    if method is Method.EXACT:

        def evaluate(dp: float) -> ResponsePoint:
            return response_exact(
                wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, dp, settings
            )

    elif method is Method.CLOSED_FORM:

        def evaluate(dp: float) -> ResponsePoint:
            return response_closed_form(
                wp, params.kappa, params.gamma_m, params.eta, eps_p_mag, eps_a_mag, wp.phi_total, dp, settings
            )

    else:
        # one regime warning per spectrum, not per point
        response_weak_control(
            params.kappa, params.gamma_m, params.eta, eps_p_mag, eps_a_mag, abs(wp.G), wp.phi_total, 0.0, settings
        )

        def evaluate(dp: float) -> ResponsePoint:
            return response_weak_control(
                params.kappa,
                params.gamma_m,
                params.eta,
                eps_p_mag,
                eps_a_mag,
                abs(wp.G),
                wp.phi_total,
                dp,
                settings,
                check_regime=False,
            )

    points = []
    for index, dp in enumerate(values):
        try:
            points.append(evaluate(float(dp)))
        except OmitPhaseError as e:
            msg = f"grid point {index} (delta_prime={dp:g}): {e}"
            raise SpectrumPointError(msg, index, float(dp)) from e
    logger.debug("Computed {} spectrum with {} points", method.value, len(points))
    return Spectrum(wp, tuple(points), method)


@dataclass(frozen=True)
class CouplingSweep:
    """Responses at fixed Δ′ as a function of |G|."""

    G: np.ndarray
    points: tuple[ResponsePoint, ...]
    y: float
    phi_total: float

    @property
    def T(self) -> np.ndarray:
        return np.array([p.T for p in self.points])

    def argmax(self) -> tuple[float, float]:
        """(|G|, T) of the largest power transmission on the grid."""
        index = int(np.argmax(self.T))
        return float(self.G[index]), float(self.points[index].T)

    def argmin(self) -> tuple[float, float]:
        index = int(np.argmin(self.T))
        return float(self.G[index]), float(self.points[index].T)


def log_coupling_grid(g_min: float, g_max: float, points: int = 500) -> np.ndarray:
    if not 0.0 < g_min < g_max:
        msg = f"need 0 < g_min < g_max, got {g_min}, {g_max}"
        raise InvalidParameters(msg)
    return np.geomspace(g_min, g_max, points)


def sweep_coupling(
    G_values: Sequence[float] | np.ndarray,
    *,
    kappa: float,
    gamma_m: float,
    eta: float,
    y: float,
    phi_total: float,
    delta_prime: float = 0.0,
    settings: Settings | None = None,
) -> CouplingSweep:
    """Power transmission versus |G| through the closed form."""
    settings = settings or DEFAULT_SETTINGS
    G = np.asarray(G_values, dtype=float)
    points = tuple(_closed_form(float(g), kappa, gamma_m, eta, y, phi_total, delta_prime, settings) for g in G)
    return CouplingSweep(G, points, y, phi_total)


class Regime(StrEnum):
    GWI_LIKE = "GWI_like"
    WEAK_CONTROL = "weak_control"
    TRANSITIONAL = "transitional"


@dataclass(frozen=True)
class RegimeReport:
    """Cooperativity, regime label and the special couplings of the over-coupled cavity.

    Windows and special points refer to a resonant probe (Δ′ = 0) and η = 1.
    The plain fields are the γ_m ≪ κ estimates, the ``*_exact`` fields the
    roots of the full closed form. ``None`` marks quantities that do not
    exist without the mechanical drive.
    """

    cooperativity: float
    regime: Regime
    y: float
    amplification_window_phi0: tuple[float, float] | None
    amplification_window_phi_pi: tuple[float, float] | None
    max_gain_G: float
    max_gain_G_exact: float | None
    t_max_estimate: float | None
    perfect_absorption_G_phi0: float | None
    perfect_absorption_G_phi_pi: float | None
    perfect_absorption_G_phi0_exact: float | None = None
    perfect_absorption_G_phi_pi_exact: float | None = None

    @property
    def phase_dependent(self) -> bool:
        return self.y > 0.0


def t_max_estimate(kappa: float, gamma_m: float, y: float) -> float:
    """Peak power gain y²κ/γ_m reached near C ≈ 1."""
    return y * y * kappa / gamma_m


def classify_regime(
    wp: WorkingPoint,
    kappa: float,
    gamma_m: float,
    y: float,
    settings: Settings | None = None,
) -> RegimeReport:
    settings = settings or DEFAULT_SETTINGS
    C = wp.cooperativity
    if C > settings.gwi_cooperativity:
        regime = Regime.GWI_LIKE
    elif C < settings.weak_control_cooperativity:
        regime = Regime.WEAK_CONTROL
    else:
        regime = Regime.TRANSITIONAL

    max_gain = math.sqrt(kappa * gamma_m) / 2.0
    if y <= 0.0:
        return RegimeReport(C, regime, 0.0, None, None, max_gain, None, None, None, None)

    # T(0) = 1 − ε_T roots: |G|² ∓ yκ|G| − κγ_m/4 = 0
    disc = math.sqrt((y * kappa) ** 2 + kappa * gamma_m)
    return RegimeReport(
        cooperativity=C,
        regime=regime,
        y=y,
        amplification_window_phi0=(0.0, y * kappa / 2.0),
        amplification_window_phi_pi=(gamma_m / (2.0 * y), math.inf),
        max_gain_G=max_gain,
        max_gain_G_exact=(gamma_m + math.sqrt(gamma_m**2 + y * y * kappa * gamma_m)) / (2.0 * y),
        t_max_estimate=t_max_estimate(kappa, gamma_m, y),
        perfect_absorption_G_phi0=y * kappa,
        perfect_absorption_G_phi_pi=gamma_m / (4.0 * y),
        perfect_absorption_G_phi0_exact=(y * kappa + disc) / 2.0,
        perfect_absorption_G_phi_pi_exact=(disc - y * kappa) / 2.0,
    )


class LinearityStatus(StrEnum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


@dataclass(frozen=True)
class LinearityCheck:
    margin: float
    status: LinearityStatus


def linearity_bound(
    t_max: float,
    eps_p_mag: float,
    eps_c_mag: float,
    settings: Settings | None = None,
) -> LinearityCheck:
    """Margin √T_max·|ε_p/ε_c| of the amplified probe against the control field."""
    settings = settings or DEFAULT_SETTINGS
    if not eps_c_mag > 0.0:
        msg = f"control magnitude must be positive, got {eps_c_mag}"
        raise InvalidParameters(msg)
    if t_max < 0.0:
        msg = f"T_max must be non-negative, got {t_max}"
        raise InvalidParameters(msg)
    margin = math.sqrt(t_max) * abs(eps_p_mag) / eps_c_mag
    if margin <= settings.linearity_pass:
        status = LinearityStatus.PASS
    elif margin < settings.linearity_fail:
        status = LinearityStatus.WARN
    else:
        status = LinearityStatus.FAIL
    return LinearityCheck(margin, status)
