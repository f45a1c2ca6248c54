# this_file: tests/conftest.py
"""Shared fixtures: the strong-coupling device of the published spectra."""

import math

import pytest

from omit_phase.model import SystemParams, working_point_from_G

FIG2_G = 1.0 / 3.0
EPS_P = 1.0 / 30.0


def make_point(G=FIG2_G, phi=0.0, y=1.0, eta=0.05, delta_prime=0.0, eps_p=EPS_P, omega_m=10.0):
    """(resolved params, working point, drives) on the red sideband."""
    params = SystemParams(eta=eta, omega_m=omega_m)
    wp, drives = working_point_from_G(params, G, params.omega_m, y, phi, eps_p, delta_prime=delta_prime)
    return params.with_delta0(wp.delta0), wp, drives


@pytest.fixture
def fig2_phi0():
    return make_point(phi=0.0)


@pytest.fixture
def fig2_phi_pi():
    return make_point(phi=math.pi)


@pytest.fixture
def params():
    return SystemParams()
