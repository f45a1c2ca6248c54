# this_file: src/omit_phase/dynamics.py
"""Classical mean-field integration of the full nonlinear optomechanical equations.

    dc/dt = −(iΔ0 + κ/2)c + i g0 c (b* + b) + ε_c + ε_p e^{−iω_a t}
    db/dt = −(iω_m + γ_m/2)b + i g0 |c|² + ε_a e^{−iω_a t}

The probe sideband of c(t), fitted after transients have died out, is the
nonlinear counterpart of ⟨δc⟩ and checks the linearization and the
rotating-wave approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
from loguru import logger
from scipy.integrate import solve_ivp
from tenacity import RetryCallState, Retrying, retry_if_exception_type, stop_after_attempt

from omit_phase.config import DEFAULT_SETTINGS, Settings
from omit_phase.errors import Divergence, IllConditioned, InvalidParameters, SingularSystem, StepFailure
from omit_phase.model import (
    drive_frequency,
    fluctuation_jacobian,
    slowest_decay_rate,
    solve_steady_state,
    working_point_from_G,
)
from omit_phase.response import LinearityStatus, fluctuation_means, linearity_bound, response_exact

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from omit_phase.model import DriveSet, SystemParams, WorkingPoint


@dataclass(frozen=True)
class MeanFieldState:
    t: float
    c: complex
    b: complex


@dataclass(frozen=True)
class IntegrationControls:
    """Integrator tolerances, sampling density and retry budget.

    Each failed attempt relaxes both tolerances tenfold.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    samples_per_period: int = 32
    attempts: int = 3
    divergence_factor: float = 1e3

    @classmethod
    def from_settings(cls, settings: Settings) -> IntegrationControls:
        return cls(
            rtol=settings.ode_rtol,
            atol=settings.ode_atol,
            samples_per_period=settings.samples_per_period,
            attempts=settings.integration_attempts,
        )


@dataclass(frozen=True)
class MeanFieldSeries:
    t: np.ndarray
    c: np.ndarray
    b: np.ndarray

    def __len__(self) -> int:
        return int(self.t.size)

    def state(self, index: int) -> MeanFieldState:
        return MeanFieldState(float(self.t[index]), complex(self.c[index]), complex(self.b[index]))

    @property
    def final(self) -> MeanFieldState:
        return self.state(-1)


def _vector_field(params: SystemParams, drives: DriveSet) -> Callable[[float, np.ndarray], np.ndarray]:
    if params.delta0 is None:
        msg = "nonlinear integration needs params.delta0"
        raise InvalidParameters(msg)
    cavity = -(1j * params.delta0 + params.kappa / 2.0)
    mechanics = -(1j * params.omega_m + params.gamma_m / 2.0)
    g0 = params.g0
    omega_a = drive_frequency(params, drives)
    eps_c, eps_p, eps_a = drives.eps_c, drives.eps_p, drives.eps_a

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        c, b = y
        probe = np.exp(-1j * omega_a * t)
        return np.array(
            [
                cavity * c + 1j * g0 * c * (np.conj(b) + b) + eps_c + eps_p * probe,
                mechanics * b + 1j * g0 * (c.real**2 + c.imag**2) + eps_a * probe,
            ]
        )

    return rhs


def _sample_times(t_final: float, sample_from: float, step: float) -> np.ndarray:
    count = math.floor((t_final - sample_from) / step)
    return np.minimum(sample_from + step * np.arange(count + 1), t_final)


def _log_relaxation(state: RetryCallState) -> None:
    logger.warning(
        "Mean-field integration attempt {} failed ({}); relaxing tolerances",
        state.attempt_number,
        state.outcome.exception() if state.outcome else "unknown",
    )


def integrate_mean_field(
    params: SystemParams,
    drives: DriveSet,
    t_final: float,
    controls: IntegrationControls | None = None,
    *,
    initial: MeanFieldState | None = None,
    sample_from: float = 0.0,
    settings: Settings | None = None,
) -> MeanFieldSeries:
    """Integrate from the self-consistent steady state (or ``initial``) up to ``t_final``.

    Samples are taken on a uniform grid of ``samples_per_period`` points per
    drive period from ``sample_from`` on.

    Raises:
        Divergence: amplitudes ran away, e.g. under a blue-detuned control
        StepFailure: the step-size control failed on every attempt
    """
    settings = settings or DEFAULT_SETTINGS
    controls = controls or IntegrationControls.from_settings(settings)
    if not t_final > 0.0 or not 0.0 <= sample_from < t_final:
        msg = f"need 0 <= sample_from < t_final, got {sample_from}, {t_final}"
        raise InvalidParameters(msg)

    rhs = _vector_field(params, drives)
    if initial is None:
        wp = solve_steady_state(params, drives, settings)
        initial = MeanFieldState(0.0, wp.c_s, wp.b_s)
    y0 = np.array([initial.c, initial.b], dtype=complex)

    omega_a = drive_frequency(params, drives)
    step = 2.0 * math.pi / (omega_a * controls.samples_per_period) if omega_a > 0.0 else (t_final - sample_from) / 1000
    times = _sample_times(t_final, sample_from, step)

    bound = controls.divergence_factor * (1.0 + float(np.max(np.abs(y0))) + abs(drives.eps_c) / params.kappa)

    def runaway(_t: float, y: np.ndarray) -> float:
        return bound - float(np.max(np.abs(y)))

    runaway.terminal = True  # type: ignore[attr-defined]

    retrying = Retrying(
        stop=stop_after_attempt(controls.attempts),
        retry=retry_if_exception_type(StepFailure),
        before_sleep=_log_relaxation,
        reraise=True,
    )
    for attempt in retrying:
        with attempt:
            relax = 10.0 ** (attempt.retry_state.attempt_number - 1)
            solution = solve_ivp(
                rhs,
                (0.0, t_final),
                y0,
                method=controls.method,
                t_eval=times,
                events=runaway,
                rtol=controls.rtol * relax,
                atol=controls.atol * relax,
            )
            if solution.status == -1:
                msg = f"integrator failed at t={solution.t[-1] if solution.t.size else 0.0:g}: {solution.message}"
                raise StepFailure(msg)

    if solution.status == 1 or not np.all(np.isfinite(solution.y)):
        when = solution.t_events[0][0] if solution.t_events and solution.t_events[0].size else float("nan")
        msg = f"mean-field amplitudes diverged (|y| > {bound:.3g}) at t={when:g}"
        raise Divergence(msg)
    logger.debug("Integrated mean field to t={:g} with {} evaluations", t_final, solution.nfev)
    return MeanFieldSeries(solution.t, solution.y[0], solution.y[1])


@dataclass(frozen=True)
class SidebandFit:
    """Coefficients of x(t) − reference ≈ dc + amp_plus e^{−iω_a t} + amp_minus e^{+iω_a t}."""

    dc: complex
    amp_plus: complex
    amp_minus: complex
    residual: float
    periods: int

    @property
    def counter_rotating_ratio(self) -> float:
        return abs(self.amp_minus) / abs(self.amp_plus) if self.amp_plus != 0 else 0.0


def fit_sidebands(
    series: MeanFieldSeries,
    omega_a: float,
    window: tuple[float, float] | None = None,
    reference: complex = 0j,
    field: Literal["c", "b"] = "c",
) -> SidebandFit:
    """Least-squares fit over the largest whole number of drive periods in ``window``.

    Raises:
        IllConditioned: the window is shorter than one period
    """
    if not omega_a > 0.0:
        msg = f"drive frequency must be positive, got {omega_a}"
        raise InvalidParameters(msg)
    if field not in ("c", "b"):
        msg = f"field must be 'c' or 'b', got {field!r}"
        raise InvalidParameters(msg)
    start, end = window if window is not None else (float(series.t[0]), float(series.t[-1]))
    period = 2.0 * math.pi / omega_a
    periods = math.floor((end - start) / period * (1.0 + 1e-12))
    if periods < 1:
        msg = f"fit window {end - start:.3g} is shorter than one drive period {period:.3g}"
        raise IllConditioned(msg)
    if periods < 10:
        logger.warning("Sideband fit over only {} periods", periods)

    start = end - periods * period
    mask = (series.t >= start - 1e-9 * period) & (series.t <= end + 1e-9 * period)
    t = series.t[mask]
    values = (series.c if field == "c" else series.b)[mask] - reference
    basis = np.column_stack([np.ones_like(t, dtype=complex), np.exp(-1j * omega_a * t), np.exp(1j * omega_a * t)])
    if t.size < 3 or np.linalg.cond(basis) > 1e8:
        msg = f"sideband basis is ill-conditioned over {t.size} samples"
        raise IllConditioned(msg)
    coeffs, *_ = np.linalg.lstsq(basis, values, rcond=None)
    norm = np.linalg.norm(values)
    residual = float(np.linalg.norm(values - basis @ coeffs) / norm) if norm > 0.0 else 0.0
    return SidebandFit(complex(coeffs[0]), complex(coeffs[1]), complex(coeffs[2]), residual, periods)


@dataclass(frozen=True)
class LinearizedSidebands:
    """Sideband amplitudes of the linearized equations kept without the rotating-wave approximation.

    ``c_minus`` and ``b_minus`` multiply e^{−iω_a t}; ``c_plus`` and ``b_plus`` multiply e^{+iω_a t}.
    """

    c_minus: complex
    c_plus: complex
    b_minus: complex
    b_plus: complex


def linearized_sidebands(
    params: SystemParams,
    wp: WorkingPoint,
    drives: DriveSet,
    settings: Settings = DEFAULT_SETTINGS,
) -> LinearizedSidebands:
    """Solve (J + iω_a) x = −f for x = (A₋, A₊*, B₋, B₊*) with J the full drift matrix.

    Differs from the rotating-wave means by the counter-rotating pull |G|²/2ω_m
    on both detunings.
    """
    omega_a = drive_frequency(params, drives)
    system = fluctuation_jacobian(params, wp.delta_eff, wp.G) + 1j * omega_a * np.eye(4)
    if abs(np.linalg.det(system)) < settings.singular_det:
        msg = f"linearized sideband system is singular at delta_prime={drives.delta_prime:g}"
        raise SingularSystem(msg)
    rhs = -np.array([drives.eps_p, 0.0, drives.eps_a, 0.0], dtype=complex)
    x = np.linalg.solve(system, rhs)
    return LinearizedSidebands(complex(x[0]), complex(np.conj(x[1])), complex(x[2]), complex(np.conj(x[3])))


@dataclass(frozen=True)
class SidebandResponse:
    """Nonlinear sideband next to the linear predictions at one Δ′.

    ``linearized`` keeps the counter-rotating terms; ``analytic_mean`` and
    ``eps_T_analytic`` are the rotating-wave results.
    """

    delta_prime: float
    fit: SidebandFit
    mechanical_fit: SidebandFit
    eps_T_nonlinear: complex
    eps_T_analytic: complex
    analytic_mean: complex
    linearized: LinearizedSidebands
    series: MeanFieldSeries | None = None

    @property
    def relative_deviation(self) -> float:
        """Nonlinear against linearized probe sideband."""
        reference = self.linearized.c_minus
        if reference == 0:
            return abs(self.fit.amp_plus)
        return abs(self.fit.amp_plus - reference) / abs(reference)

    @property
    def rwa_deviation(self) -> float:
        if self.analytic_mean == 0:
            return abs(self.fit.amp_plus)
        return abs(self.fit.amp_plus - self.analytic_mean) / abs(self.analytic_mean)


def settle_time(params: SystemParams, wp: WorkingPoint, settings: Settings = DEFAULT_SETTINGS) -> float:
    """Time for the slowest linearized mode to decay by ``settle_time_constants`` e-folds."""
    rate = slowest_decay_rate(params, wp.delta_eff, wp.G)
    if rate <= 0.0:
        msg = f"working point is unstable (slowest decay rate {rate:.3g})"
        raise Divergence(msg)
    return settings.settle_time_constants / rate


def sideband_response(
    params: SystemParams,
    drives: DriveSet,
    controls: IntegrationControls | None = None,
    settings: Settings | None = None,
) -> SidebandResponse:
    """Integrate past the transients, fit both fields and compare with ⟨δc⟩.

    Integration starts on the linearized orbit, so what has to settle is only
    the nonlinear correction.
    """
    settings = settings or DEFAULT_SETTINGS
    wp = solve_steady_state(params, drives, settings)
    omega_a = drive_frequency(params, drives)
    if not omega_a > 0.0:
        msg = f"drive frequency omega_m + delta_prime must be positive, got {omega_a}"
        raise InvalidParameters(msg)

    linear = linearized_sidebands(params, wp, drives, settings)
    settle = settle_time(params, wp, settings)
    window = settings.fit_periods * 2.0 * math.pi / omega_a
    series = integrate_mean_field(
        params,
        drives,
        settle + window,
        controls,
        initial=MeanFieldState(0.0, wp.c_s + linear.c_minus + linear.c_plus, wp.b_s + linear.b_minus + linear.b_plus),
        sample_from=settle,
        settings=settings,
    )
    fit = fit_sidebands(series, omega_a, (settle, settle + window), wp.c_s, "c")
    mechanical = fit_sidebands(series, omega_a, (settle, settle + window), wp.b_s, "b")
    mean, _ = fluctuation_means(
        wp, params.kappa, params.gamma_m, drives.eps_p, drives.eps_a, drives.delta_prime, settings
    )
    nonlinear = params.eta * params.kappa * fit.amp_plus / drives.eps_p if drives.eps_p != 0 else 0j
    analytic = (
        response_exact(
            wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, drives.delta_prime, settings
        ).eps_T
        if drives.eps_p != 0
        else 0j
    )
    logger.debug(
        "Sideband at delta_prime={:g}: settle {:.3g}, residual {:.3g}", drives.delta_prime, settle, fit.residual
    )
    return SidebandResponse(
        drives.delta_prime, fit, mechanical, complex(nonlinear), complex(analytic), mean, linear, series
    )


@dataclass(frozen=True)
class LinearityRow:
    eps_p_over_eps_c: float
    margin: float
    rel_deviation: float
    status: LinearityStatus


@dataclass(frozen=True)
class LinearityReport:
    rows: tuple[LinearityRow, ...]

    @property
    def monotone(self) -> bool:
        """Deviation never decreases as the margin grows, ignoring zero-drive rows."""
        driven = [row for row in self.rows if row.margin > 0.0]
        return all(b.rel_deviation >= a.rel_deviation for a, b in zip(driven, driven[1:], strict=False))

    def within(self, margin: float = 0.1, deviation: float = 0.05) -> bool:
        """All rows with margin up to ``margin`` deviate by at most ``deviation``."""
        return all(row.rel_deviation <= deviation for row in self.rows if row.margin <= margin)


def validate_linearity(
    params: SystemParams,
    G: complex,
    phi_total: float,
    y: float,
    ratios: Sequence[float],
    *,
    delta_prime: float = 0.0,
    controls: IntegrationControls | None = None,
    settings: Settings | None = None,
) -> LinearityReport:
    """Deviation of the nonlinear sideband from ⟨δc⟩ along increasing |ε_p/ε_c|.

    Working points sit on the red sideband (Δ = ω_m). The margin uses
    T_max = max(1, T) with T the analytic transmission at the working point.
    """
    settings = settings or DEFAULT_SETTINGS
    if any(b <= a for a, b in zip(ratios, ratios[1:], strict=False)):
        msg = "drive ratios must be strictly increasing"
        raise InvalidParameters(msg)
    if any(r < 0.0 for r in ratios):
        msg = "drive ratios must be non-negative"
        raise InvalidParameters(msg)

    reference_wp, reference_drives = working_point_from_G(
        params, G, params.omega_m, y, phi_total, 1.0, delta_prime=delta_prime
    )
    control = abs(reference_drives.eps_c)
    resolved = params.with_delta0(reference_wp.delta0)
    t_max = max(
        1.0,
        response_exact(
            reference_wp,
            params.kappa,
            params.gamma_m,
            params.eta,
            reference_drives.eps_p,
            reference_drives.eps_a,
            delta_prime,
            settings,
        ).T,
    )

    rows = []
    for ratio in ratios:
        check = linearity_bound(t_max, ratio * control, control, settings)
        if ratio == 0.0:
            rows.append(LinearityRow(0.0, 0.0, 0.0, check.status))
            continue
        _, drives = working_point_from_G(
            params, G, params.omega_m, y, phi_total, ratio * control, delta_prime=delta_prime
        )
        result = sideband_response(resolved, drives, controls, settings)
        rows.append(LinearityRow(float(ratio), check.margin, result.relative_deviation, check.status))
        logger.debug(
            "Linearity ratio {:.3g}: margin {:.3g}, deviation {:.3g}", ratio, check.margin, rows[-1].rel_deviation
        )
    return LinearityReport(tuple(rows))
