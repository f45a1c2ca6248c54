# this_file: src/omit_phase/model.py
"""Physical parameters, drive fields and the strong-field working point.

All rates are stored in units of the cavity decay rate unless a caller
builds a value object directly with an explicit ``kappa``. The constructors
``SystemParams.create`` and ``DriveSet.create`` accept absolute rates with
``units="absolute"`` and normalize them.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from loguru import logger

from omit_phase.config import DEFAULT_SETTINGS, Settings
from omit_phase.errors import (
    InvalidParameters,
    Multistable,
    NonConvergence,
    ResolvedSidebandWarning,
    WeakDriveWarning,
)

Units = Literal["kappa", "absolute"]

TWO_PI = 2.0 * math.pi


def wrap_phase(phi: float) -> float:
    """Reduce an angle to [0, 2π)."""
    wrapped = math.fmod(phi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative angle can round up to exactly 2π
    return 0.0 if wrapped >= TWO_PI else wrapped


def sideband_phase(kappa: float, omega_m: float) -> float:
    """Phase offset arctan(κ/2ω_m) picked up by G on the red sideband."""
    return math.atan(kappa / (2.0 * omega_m))


def cooperativity(kappa: float, gamma_m: float, G: complex) -> float:
    """C = 4|G|²/(κγ_m)."""
    return 4.0 * abs(G) ** 2 / (kappa * gamma_m)


def _unit_scale(kappa: float, units: Units) -> float:
    if units == "kappa":
        if kappa != 1.0:
            msg = f"kappa must be 1 when rates are given in units of kappa, got {kappa}"
            raise InvalidParameters(msg)
        return 1.0
    if units == "absolute":
        if not (math.isfinite(kappa) and kappa > 0.0):
            msg = f"kappa must be positive and finite, got {kappa}"
            raise InvalidParameters(msg)
        return 1.0 / kappa
    msg = f"units must be 'kappa' or 'absolute', got {units!r}"
    raise InvalidParameters(msg)


@dataclass(frozen=True)
class SystemParams:
    """Rates and couplings of the optomechanical device.

    Args:
        kappa: cavity decay rate
        gamma_m: mechanical decay rate
        omega_m: mechanical frequency
        g0: single-photon optomechanical coupling
        eta: cavity-waveguide coupling, κ_ex = η·κ
        delta0: bare control-cavity detuning ω0 − ω_c; derived in preset mode
    """

    kappa: float = 1.0
    gamma_m: float = 1e-3
    omega_m: float = 10.0
    g0: float = 1e-3
    eta: float = 0.05
    delta0: float | None = None

    def __post_init__(self) -> None:
        for name in ("kappa", "gamma_m", "omega_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                msg = f"{name} must be positive and finite, got {value}"
                raise InvalidParameters(msg)
        if not (math.isfinite(self.g0) and self.g0 >= 0.0):
            msg = f"g0 must be non-negative and finite, got {self.g0}"
            raise InvalidParameters(msg)
        if not (0.0 < self.eta <= 1.0):
            msg = f"eta must lie in (0, 1], got {self.eta}"
            raise InvalidParameters(msg)
        if self.delta0 is not None and not math.isfinite(self.delta0):
            msg = f"delta0 must be finite, got {self.delta0}"
            raise InvalidParameters(msg)

    @classmethod
    def create(
        cls,
        *,
        gamma_m: float,
        omega_m: float,
        g0: float,
        eta: float,
        delta0: float | None = None,
        kappa: float = 1.0,
        units: Units = "kappa",
    ) -> SystemParams:
        """Build parameters normalized to κ = 1 from κ-relative or absolute rates."""
        scale = _unit_scale(kappa, units)
        return cls(
            kappa=1.0,
            gamma_m=gamma_m * scale,
            omega_m=omega_m * scale,
            g0=g0 * scale,
            eta=eta,
            delta0=None if delta0 is None else delta0 * scale,
        )

    @property
    def kappa_ex(self) -> float:
        return self.eta * self.kappa

    @property
    def sideband_ratio(self) -> float:
        return self.omega_m / self.kappa

    def normalized(self) -> SystemParams:
        """Same device with every rate expressed in units of κ."""
        return SystemParams.create(
            gamma_m=self.gamma_m,
            omega_m=self.omega_m,
            g0=self.g0,
            eta=self.eta,
            delta0=self.delta0,
            kappa=self.kappa,
            units="absolute",
        )

    def with_delta0(self, delta0: float) -> SystemParams:
        return replace(self, delta0=delta0)

    def check_resolved_sideband(self, settings: Settings = DEFAULT_SETTINGS) -> bool:
        """Warn when ω_m/κ is too small for the rotating-wave approximation."""
        if self.sideband_ratio > settings.sideband_ratio_min:
            return True
        warnings.warn(
            f"omega_m/kappa = {self.sideband_ratio:.3g} is not above {settings.sideband_ratio_min:g}; "
            "rotating-wave results may be inaccurate",
            ResolvedSidebandWarning,
            stacklevel=2,
        )
        return False


@dataclass(frozen=True)
class DriveSet:
    """Complex amplitudes of the control, probe and mechanical drives.

    ``delta_prime`` is the two-photon detuning Δ′ = ω_a − ω_m.
    """

    eps_c: complex = 0j
    eps_p: complex = 0j
    eps_a: complex = 0j
    delta_prime: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eps_c", "eps_p", "eps_a"):
            value = complex(getattr(self, name))
            if not cmath.isfinite(value):
                msg = f"{name} must be finite, got {value}"
                raise InvalidParameters(msg)
            object.__setattr__(self, name, value)
        if not math.isfinite(self.delta_prime):
            msg = f"delta_prime must be finite, got {self.delta_prime}"
            raise InvalidParameters(msg)
        object.__setattr__(self, "delta_prime", float(self.delta_prime))

    @classmethod
    def create(
        cls,
        *,
        eps_c: complex,
        eps_p: complex,
        eps_a: complex,
        delta_prime: float = 0.0,
        kappa: float = 1.0,
        units: Units = "kappa",
    ) -> DriveSet:
        """Build drives normalized to κ = 1 from κ-relative or absolute amplitudes."""
        scale = _unit_scale(kappa, units)
        return cls(eps_c * scale, eps_p * scale, eps_a * scale, delta_prime * scale)

    @property
    def y(self) -> float:
        """Amplitude ratio |ε_a/ε_p|."""
        if self.eps_p == 0:
            return 0.0 if self.eps_a == 0 else math.inf
        return abs(self.eps_a) / abs(self.eps_p)

    @property
    def phi_c(self) -> float:
        return cmath.phase(self.eps_c)

    @property
    def phi_p(self) -> float:
        return cmath.phase(self.eps_p)

    @property
    def phi_a(self) -> float:
        return cmath.phase(self.eps_a)

    def with_delta_prime(self, delta_prime: float) -> DriveSet:
        return replace(self, delta_prime=float(delta_prime))

    def scaled(self, factor: float) -> DriveSet:
        """All amplitudes and Δ′ multiplied by a common rate factor."""
        return DriveSet(self.eps_c * factor, self.eps_p * factor, self.eps_a * factor, self.delta_prime * factor)

    def check_weak(self, settings: Settings = DEFAULT_SETTINGS) -> bool:
        """Warn unless |ε_p| and |ε_a| are small compared to |ε_c|."""
        control = abs(self.eps_c)
        weak = max(abs(self.eps_p), abs(self.eps_a))
        if weak == 0.0 or (control > 0.0 and weak <= settings.weak_drive_ratio * control):
            return True
        warnings.warn(
            f"weak drives ({weak:.3g}) are not below {settings.weak_drive_ratio:g} x |eps_c| ({control:.3g}); "
            "linear response may not apply",
            WeakDriveWarning,
            stacklevel=2,
        )
        return False


def drive_frequency(params: SystemParams, drives: DriveSet) -> float:
    """ω_a = ω_p − ω_c = ω_m + Δ′."""
    return params.omega_m + drives.delta_prime


def total_phase(params: SystemParams, drives: DriveSet, *, resolved_sideband_limit: bool = False) -> float:
    """Φ = arctan(κ/2ω_m) + φ_c + φ_a − φ_p in [0, 2π).

    With ``resolved_sideband_limit`` the arctan offset is dropped.
    """
    offset = 0.0 if resolved_sideband_limit else sideband_phase(params.kappa, params.omega_m)
    return wrap_phase(offset + drives.phi_c + drives.phi_a - drives.phi_p)


@dataclass(frozen=True)
class WorkingPoint:
    """Strong-field steady state at which the probe response is linearized."""

    c_s: complex
    b_s: complex
    delta_eff: float
    G: complex
    phi_total: float
    cooperativity: float
    y: float
    delta0: float
    stable: bool = True

    @property
    def photon_number(self) -> float:
        return abs(self.c_s) ** 2


def fluctuation_jacobian(params: SystemParams, delta_eff: float, G: complex) -> np.ndarray:
    """Drift matrix of (δc, δc*, δb, δb*) for the linearized equations without RWA."""
    a = -(1j * delta_eff + params.kappa / 2.0)
    m = -(1j * params.omega_m + params.gamma_m / 2.0)
    Gc = np.conj(G)
    return np.array(
        [
            [a, 0.0, 1j * G, 1j * G],
            [0.0, np.conj(a), -1j * Gc, -1j * Gc],
            [1j * Gc, 1j * G, m, 0.0],
            [-1j * Gc, -1j * G, 0.0, np.conj(m)],
        ],
        dtype=complex,
    )


def slowest_decay_rate(params: SystemParams, delta_eff: float, G: complex) -> float:
    """Smallest damping rate of the linearized dynamics; negative when unstable."""
    eigenvalues = np.linalg.eigvals(fluctuation_jacobian(params, delta_eff, G))
    return float(-np.max(eigenvalues.real))


def _assemble(
    params: SystemParams,
    drives: DriveSet,
    delta_eff: float,
    delta0: float,
    *,
    resolved_sideband_limit: bool = False,
) -> WorkingPoint:
    c_s = drives.eps_c / (1j * delta_eff + params.kappa / 2.0)
    b_s = 1j * params.g0 * abs(c_s) ** 2 / (1j * params.omega_m + params.gamma_m / 2.0)
    G = params.g0 * c_s
    return WorkingPoint(
        c_s=complex(c_s),
        b_s=complex(b_s),
        delta_eff=float(delta_eff),
        G=complex(G),
        phi_total=total_phase(params, drives, resolved_sideband_limit=resolved_sideband_limit),
        cooperativity=cooperativity(params.kappa, params.gamma_m, G),
        y=drives.y,
        delta0=float(delta0),
        stable=slowest_decay_rate(params, delta_eff, G) > 0.0,
    )


def _spring_load(params: SystemParams, drives: DriveSet) -> float:
    """K·|ε_c|² with Δ = Δ0 − K|ε_c|²/(Δ² + κ²/4)."""
    denom = params.omega_m**2 + params.gamma_m**2 / 4.0
    return 2.0 * params.g0**2 * params.omega_m / denom * abs(drives.eps_c) ** 2


def _residual(delta: float, delta0: float, load: float, k2: float) -> float:
    return abs(delta - delta0 + load / (delta * delta + k2)) / max(1.0, abs(delta))


def _fixed_point(delta0: float, load: float, k2: float, settings: Settings) -> float | None:
    delta = delta0
    for iteration in range(settings.max_iterations):
        target = delta0 - load / (delta * delta + k2)
        step = target - delta
        if abs(step) <= settings.fixed_point_tol * max(1.0, abs(delta)):
            logger.debug("Fixed point converged after {} iterations at delta={}", iteration, target)
            return target
        delta += settings.relaxation * step
    return None


def _cubic_roots(delta0: float, load: float, k2: float) -> list[float]:
    """Real roots of (Δ − Δ0)(Δ² + κ²/4) + K|ε_c|² = 0, Newton-polished and deduplicated."""
    raw = np.roots([1.0, -delta0, k2, load - delta0 * k2])
    roots: list[float] = []
    for root in raw:
        if abs(root.imag) > 1e-7 * max(1.0, abs(root)):
            continue
        d = float(root.real)
        for _ in range(50):
            f = (d - delta0) * (d * d + k2) + load
            df = d * d + k2 + 2.0 * d * (d - delta0)
            if df == 0.0:
                break
            step = f / df
            d -= step
            if abs(step) <= 1e-15 * max(1.0, abs(d)):
                break
        if all(abs(d - r) > 1e-9 * max(1.0, abs(d)) for r in roots):
            roots.append(d)
    return sorted(roots)


def solve_steady_state(
    params: SystemParams,
    drives: DriveSet,
    settings: Settings | None = None,
) -> WorkingPoint:
    """Self-consistent steady state (c_s, b_s) under the control field alone.

    Raises:
        InvalidParameters: when ``params.delta0`` is not set
        Multistable: when several stable roots exist; ``roots`` holds all of them
        NonConvergence: when no root satisfies the residual tolerance
    """
    settings = settings or DEFAULT_SETTINGS
    if params.delta0 is None:
        msg = "solve_steady_state needs params.delta0; use working_point_from_G to back-solve it"
        raise InvalidParameters(msg)
    params.check_resolved_sideband(settings)
    drives.check_weak(settings)

    delta0 = params.delta0
    load = _spring_load(params, drives)
    if load == 0.0:
        return _checked(_assemble(params, drives, delta0, delta0))

    k2 = params.kappa**2 / 4.0
    roots = _cubic_roots(delta0, load, k2)
    candidates = [_assemble(params, drives, r, delta0) for r in roots]
    stable = [wp for wp in candidates if wp.stable]
    if len(stable) > 1:
        msg = f"{len(stable)} stable steady states at delta0={delta0:g}, |eps_c|={abs(drives.eps_c):g}; choose a root"
        raise Multistable(msg, roots=candidates)

    delta = _fixed_point(delta0, load, k2, settings)
    if delta is None:
        logger.warning(
            "Fixed-point iteration did not converge in {} steps; using the cubic root", settings.max_iterations
        )
        pool = stable or candidates
        if not pool:
            msg = "self-consistency cubic has no real root"
            raise NonConvergence(msg)
        delta = pool[0].delta_eff

    residual = _residual(delta, delta0, load, k2)
    if residual > settings.steady_residual_tol:
        msg = f"steady-state residual {residual:.3g} exceeds {settings.steady_residual_tol:g}"
        raise NonConvergence(msg)
    return _checked(_assemble(params, drives, delta, delta0))


def _checked(wp: WorkingPoint) -> WorkingPoint:
    if not wp.stable:
        logger.warning(
            "Steady state at delta={:.6g} is dynamically unstable; its linear response has no physical meaning",
            wp.delta_eff,
        )
    return wp


def working_point_from_G(
    params: SystemParams,
    G: complex,
    delta_eff: float,
    y: float,
    phi_total: float,
    eps_p_mag: float,
    *,
    delta_prime: float = 0.0,
    resolved_sideband_limit: bool = False,
) -> tuple[WorkingPoint, DriveSet]:
    """Concrete drives realizing a target coupling, detuning, amplitude ratio and phase.

    The probe phase is fixed to zero and arg(ε_c) follows from arg(G) through
    c_s = ε_c/(iΔ + κ/2); the mechanical-drive phase then carries Φ. The
    back-solved bare detuning is returned as ``WorkingPoint.delta0``.
    """
    G = complex(G)
    if not eps_p_mag > 0.0:
        msg = f"eps_p_mag must be positive, got {eps_p_mag}"
        raise InvalidParameters(msg)
    if not (math.isfinite(y) and y >= 0.0):
        msg = f"y must be non-negative and finite, got {y}"
        raise InvalidParameters(msg)
    if G != 0 and params.g0 == 0.0:
        msg = "a nonzero G cannot be realized with g0 = 0"
        raise InvalidParameters(msg)

    c_s = G / params.g0 if G != 0 else 0j
    eps_c = c_s * (1j * delta_eff + params.kappa / 2.0)
    b_s = 1j * params.g0 * abs(c_s) ** 2 / (1j * params.omega_m + params.gamma_m / 2.0)
    delta0 = delta_eff + 2.0 * params.g0 * b_s.real

    offset = 0.0 if resolved_sideband_limit else sideband_phase(params.kappa, params.omega_m)
    phi_c = cmath.phase(eps_c) if eps_c != 0 else 0.0
    phi_a = phi_total - offset - phi_c
    drives = DriveSet(
        eps_c=eps_c,
        eps_p=complex(eps_p_mag),
        eps_a=y * eps_p_mag * cmath.exp(1j * phi_a),
        delta_prime=delta_prime,
    )
    resolved = params.with_delta0(delta0)
    wp = _assemble(resolved, drives, delta_eff, delta0, resolved_sideband_limit=resolved_sideband_limit)
    logger.debug("Working point |G|={:.6g} delta={:.6g} C={:.4g}", abs(G), delta_eff, wp.cooperativity)
    return wp, drives
