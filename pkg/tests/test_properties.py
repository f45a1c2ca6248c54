# this_file: tests/test_properties.py
"""Property-based invariants of the linear response."""

import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omit_phase.model import DriveSet, SystemParams, solve_steady_state, total_phase, working_point_from_G
from omit_phase.response import response_closed_form, response_exact

pytestmark = pytest.mark.property

cooperativities = st.floats(min_value=1e-4, max_value=10.0)
phases = st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True)
etas = st.floats(min_value=1e-3, max_value=1.0)
ratios = st.floats(min_value=0.0, max_value=3.0)
detunings = st.floats(min_value=-1.0, max_value=1.0)
gammas = st.floats(min_value=1e-4, max_value=1e-2)


def _point(kappa, gamma_m, C, phi, y, eta, delta_prime=0.0):
    params = SystemParams(kappa=kappa, gamma_m=gamma_m, omega_m=10.0 * kappa, g0=1e-3 * kappa, eta=eta)
    G = math.sqrt(C * kappa * gamma_m / 4.0)
    wp, drives = working_point_from_G(params, G, params.omega_m, y, phi, kappa / 30.0, delta_prime=delta_prime)
    return params.with_delta0(wp.delta0), wp, drives


def _exact(params, wp, drives, delta_prime):
    return response_exact(
        wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, delta_prime
    ).eps_T


class TestResponseInvariants:
    @settings(max_examples=1000, deadline=None)
    @given(C=cooperativities, phi=phases, y=ratios, eta=etas, dp=detunings, gamma_m=gammas)
    def test_closed_form_equals_exact(self, C, phi, y, eta, dp, gamma_m):
        params, wp, drives = _point(1.0, gamma_m, C, phi, y, eta)
        exact = _exact(params, wp, drives, dp)
        closed = response_closed_form(
            wp, params.kappa, params.gamma_m, eta, abs(drives.eps_p), abs(drives.eps_a), wp.phi_total, dp
        ).eps_T
        assert abs(exact - closed) <= 1e-12 * (1.0 + abs(exact))

    @settings(max_examples=200, deadline=None)
    @given(
        phi=phases,
        y=ratios,
        dp=detunings,
        alpha=st.floats(min_value=-math.pi, max_value=math.pi),
        beta=st.floats(min_value=-math.pi, max_value=math.pi),
    )
    def test_gauge_invariance(self, phi, y, dp, alpha, beta):
        """Rotating (φ_c, φ_p) together, or (φ_p, φ_a) together, leaves Φ and ε_T alone."""
        params, _, drives = _point(1.0, 1e-3, 444.0, phi, y, 0.05)
        shifted = DriveSet(
            eps_c=drives.eps_c * cmath.exp(1j * alpha),
            eps_p=drives.eps_p * cmath.exp(1j * (alpha + beta)),
            eps_a=drives.eps_a * cmath.exp(1j * beta),
        )
        base = solve_steady_state(params, drives)
        rotated = solve_steady_state(params, shifted)
        assert abs(cmath.exp(1j * total_phase(params, shifted)) - cmath.exp(1j * total_phase(params, drives))) < 1e-12
        a = _exact(params, base, drives, dp)
        b = _exact(params, rotated, shifted, dp)
        assert abs(a - b) <= 1e-12 * (1.0 + abs(a))

    @settings(max_examples=300, deadline=None)
    @given(
        scale=st.floats(min_value=1e-3, max_value=1e6),
        C=cooperativities,
        phi=phases,
        y=ratios,
        dp=detunings,
    )
    def test_rate_scale_covariance(self, scale, C, phi, y, dp):
        """Multiplying every rate, amplitude and detuning by one factor leaves ε_T unchanged."""
        unit = _exact(*_point(1.0, 1e-3, C, phi, y, 0.05), dp)
        scaled = _exact(*_point(scale, 1e-3 * scale, C, phi, y, 0.05), dp * scale)
        assert abs(unit - scaled) <= 1e-10 * (1.0 + abs(unit))

    @settings(max_examples=200, deadline=None)
    @given(scale=st.floats(min_value=1e-3, max_value=1e6), gamma_m=gammas, eta=etas)
    def test_absolute_units_normalize(self, scale, gamma_m, eta):
        params = SystemParams.create(
            gamma_m=gamma_m * scale, omega_m=10.0 * scale, g0=1e-3 * scale, eta=eta, kappa=scale, units="absolute"
        )
        assert params.kappa == 1.0
        assert params.gamma_m == pytest.approx(gamma_m, rel=1e-14)
        assert params.omega_m == pytest.approx(10.0, rel=1e-14)
