# this_file: tests/test_lindblad.py
"""Test suite for the master-equation check."""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.sparse.linalg import norm as sparse_norm

from conftest import make_point
from omit_phase.config import Settings
from omit_phase.errors import DimensionCapExceeded, InvalidParameters, SolverFailure
from omit_phase.lindblad import (
    LindbladModel,
    TruncatedDensityMatrix,
    TruncationSpec,
    _bordered_solve,
    _iterative_solve,
    build_liouvillian,
    coherence_layout,
    compare_spectrum,
    convergence_sweep,
    evolve,
    extract_response,
    ladder_operators,
    solve_model,
    steady_state,
    trace_annihilation,
    unvectorize,
    vectorize,
)
from omit_phase.presets import DEFAULT_CATALOG


def driven_model(n_th=0.0, phi=math.pi):
    params, wp, drives = make_point(phi=phi)
    return LindbladModel.from_working_point(wp, params, drives, n_th)


class TestTruncation:
    def test_dimension(self):
        assert TruncationSpec(5, 20).dimension == 126

    def test_invalid(self):
        with pytest.raises(InvalidParameters):
            TruncationSpec(0, 3)

    def test_cap(self):
        with pytest.raises(DimensionCapExceeded):
            build_liouvillian(driven_model(), TruncationSpec(3, 3), Settings(dimension_cap=10))

    def test_ladder_operators_commute_across_modes(self):
        c, b = ladder_operators(TruncationSpec(3, 4))
        assert c.shape == (20, 20)
        assert abs(c @ b - b @ c).max() == 0.0
        number = (c.conj().T @ c).diagonal().real
        assert number.max() == pytest.approx(3.0)

    def test_vectorize_column_major(self):
        rho = np.arange(4.0).reshape(2, 2)
        assert vectorize(rho).real.tolist() == [0.0, 2.0, 1.0, 3.0]
        assert np.array_equal(unvectorize(vectorize(rho), 2), rho)


class TestLiouvillian:
    """Structure of the generator."""

    def test_trace_preserving(self):
        L = build_liouvillian(driven_model(n_th=2.0), TruncationSpec(3, 4))
        assert trace_annihilation(L) <= 1e-12

    def test_vacuum_is_exact_steady_state_without_drives(self):
        model = LindbladModel(delta_prime=0.0, G=1.0 / 3.0, eps_p=0.0, eps_a=0.0)
        trunc = TruncationSpec(2, 2)
        L = build_liouvillian(model, trunc)
        vacuum = TruncatedDensityMatrix.vacuum(trunc)
        assert np.linalg.norm(L @ vectorize(vacuum.matrix)) <= 1e-14

    def test_only_drives_change_coherence_order(self):
        trunc = TruncationSpec(2, 3)
        order, level = coherence_layout(trunc)
        assert order.shape == level.shape == (trunc.dimension**2,)
        model = driven_model(n_th=1.0)
        driven = build_liouvillian(model, trunc)
        undriven = build_liouvillian(replace(model, eps_p=0j, eps_a=0j), trunc)
        kept = undriven.tocoo()
        kept_rows, kept_cols = kept.row[kept.data != 0], kept.col[kept.data != 0]
        assert np.array_equal(order[kept_rows], order[kept_cols])
        drive = (driven - undriven).tocoo()
        rows, cols = drive.row[drive.data != 0], drive.col[drive.data != 0]
        assert rows.size > 0
        assert np.all(np.abs(order[rows] - order[cols]) == 1)

    def test_hamiltonian_is_hermitian(self):
        H = driven_model().hamiltonian(TruncationSpec(3, 3))
        assert sparse_norm(H - H.conj().T) <= 1e-14

    def test_rates(self):
        model = LindbladModel(0.0, 0.1, 0.1, 0.0, gamma_m=2e-3, n_th=4.0)
        assert model.emission_rate == pytest.approx(1e-2)
        assert model.absorption_rate == pytest.approx(8e-3)
        with pytest.raises(InvalidParameters):
            LindbladModel(0.0, 0.1, 0.1, 0.0, n_th=-1.0)


class TestSteadyState:
    """Known steady states of limiting cases."""

    def test_vacuum(self):
        model = LindbladModel(delta_prime=0.0, G=1.0 / 3.0, eps_p=0.0, eps_a=0.0)
        trunc = TruncationSpec(2, 2)
        rho = solve_model(model, trunc)
        assert np.max(np.abs(rho.matrix - TruncatedDensityMatrix.vacuum(trunc).matrix)) <= 1e-10

    def test_coherent_cavity(self):
        """A bare cavity settles in a coherent state with ⟨c⟩ = 2ε_p/κ and ε_T = 2η."""
        eps_p = 1.0 / 30.0
        model = LindbladModel(delta_prime=0.0, G=0.0, eps_p=eps_p, eps_a=0.0)
        rho = solve_model(model, TruncationSpec(5, 2))
        assert rho.cavity_mean() == pytest.approx(2.0 * eps_p, abs=1e-8)
        assert extract_response(rho, 0.05, 1.0, eps_p).eps_T == pytest.approx(0.1, abs=1e-8)
        assert rho.photon_number() == pytest.approx((2.0 * eps_p) ** 2, abs=1e-8)

    def test_thermal_mechanics(self):
        model = LindbladModel(delta_prime=0.0, G=0.0, eps_p=0.0, eps_a=0.0, n_th=1.0)
        rho = solve_model(model, TruncationSpec(1, 30))
        assert rho.phonon_number() == pytest.approx(1.0, abs=1e-6)
        marginal = rho.mechanical_marginal()
        assert marginal.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(marginal[:5], [0.5, 0.25, 0.125, 0.0625, 0.03125], atol=1e-8)

    @pytest.mark.parametrize("phi", [0.0, math.pi])
    def test_first_moments_follow_linear_response(self, phi):
        params, wp, drives = make_point(phi=phi)
        model = LindbladModel.from_working_point(wp, params, drives, 0.0, delta_prime=0.0)
        rho = solve_model(model, TruncationSpec(4, 6))
        numeric = extract_response(rho, params.eta, params.kappa, drives.eps_p, 0.0).eps_T
        comparison = compare_spectrum(wp, params, drives, [0.0], TruncationSpec(4, 6))
        assert comparison.rows[0].eps_T_numeric == pytest.approx(numeric, abs=1e-14)
        assert abs(numeric - comparison.rows[0].eps_T_analytic) <= 1e-6

    def test_krylov_and_direct_routes_agree(self):
        model = driven_model(n_th=2.0)
        trunc = TruncationSpec(3, 4)
        L = build_liouvillian(model, trunc)
        krylov = _iterative_solve(L, trunc, Settings())
        direct = _bordered_solve(L)
        assert krylov is not None
        assert direct is not None
        krylov_rho = unvectorize(krylov, trunc.dimension)
        direct_rho = unvectorize(direct, trunc.dimension)
        np.testing.assert_allclose(krylov_rho / np.trace(krylov_rho), direct_rho / np.trace(direct_rho), atol=1e-9)

    def test_validate_rejects_bad_trace(self):
        trunc = TruncationSpec(1, 1)
        with pytest.raises(SolverFailure):
            TruncatedDensityMatrix(2.0 * TruncatedDensityMatrix.vacuum(trunc).matrix, trunc).validate()

    def test_validate_rejects_negative_state(self):
        trunc = TruncationSpec(1, 1)
        rho = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
        with pytest.raises(SolverFailure):
            TruncatedDensityMatrix(rho, trunc).validate()

    def test_falls_back_to_evolution(self, monkeypatch):
        monkeypatch.setattr("omit_phase.lindblad._iterative_solve", lambda L, trunc, settings: None)
        monkeypatch.setattr("omit_phase.lindblad._bordered_solve", lambda L: None)
        model = LindbladModel(delta_prime=0.0, G=0.0, eps_p=1.0 / 30.0, eps_a=0.0)
        trunc = TruncationSpec(3, 1)
        L = build_liouvillian(model, trunc)
        rho = steady_state(L, trunc, fallback_time=60.0)
        assert rho.cavity_mean() == pytest.approx(2.0 / 30.0, abs=1e-6)


class TestEvolve:
    def test_undriven_vacuum_is_stationary(self):
        model = LindbladModel(delta_prime=0.0, G=1.0 / 3.0, eps_p=0.0, eps_a=0.0)
        trunc = TruncationSpec(2, 2)
        L = build_liouvillian(model, trunc)
        trajectory = evolve(L, TruncatedDensityMatrix.vacuum(trunc), 10.0, 1.0)
        assert len(trajectory.times) == 11
        assert np.allclose(trajectory.traces(), 1.0, atol=1e-8)
        assert np.max(np.abs(trajectory.final.matrix - TruncatedDensityMatrix.vacuum(trunc).matrix)) <= 1e-12

    def test_relaxes_to_steady_state(self):
        model = driven_model()
        trunc = TruncationSpec(3, 3)
        L = build_liouvillian(model, trunc)
        target = steady_state(L, trunc).cavity_mean()
        trajectory = evolve(L, TruncatedDensityMatrix.vacuum(trunc), 40.0, 2.0)
        residuals = trajectory.residuals(L)
        tail = residuals[5:]
        assert np.all(np.diff(tail) <= 0.0)
        assert tail[-1] <= 1e-3 * residuals[0]
        assert np.allclose(trajectory.traces(), 1.0, atol=1e-8)
        assert abs(trajectory.final.cavity_mean() - target) <= 1e-3 * abs(target)

    def test_invalid_horizon(self):
        trunc = TruncationSpec(1, 1)
        L = build_liouvillian(driven_model(), trunc)
        with pytest.raises(InvalidParameters):
            evolve(L, TruncatedDensityMatrix.vacuum(trunc), 0.0, 1.0)


class TestConvergence:
    def test_converges_at_zero_temperature(self):
        ladder = [TruncationSpec(2, 2), TruncationSpec(3, 3), TruncationSpec(4, 4)]
        table = convergence_sweep(driven_model(), ladder)
        assert table.converged
        assert table.rows[0].difference is None
        assert table.rows[-1].difference < 1e-4

    def test_needs_three_rungs(self):
        with pytest.raises(InvalidParameters):
            convergence_sweep(driven_model(), [TruncationSpec(2, 2), TruncationSpec(3, 3)])

    def test_ladder_must_not_shrink(self):
        ladder = [TruncationSpec(2, 2), TruncationSpec(3, 3), TruncationSpec(3, 2)]
        with pytest.raises(InvalidParameters):
            convergence_sweep(driven_model(), ladder)


class TestSpectrumComparison:
    """Thermal master-equation spectra against the linear response."""

    def test_desk_scale_accuracy_and_runtime(self):
        grid = np.linspace(-1.0, 1.0, 21)
        start = time.perf_counter()
        comparisons = []
        for phi in (0.0, math.pi):
            params, wp, drives = make_point(phi=phi)
            comparisons.append(compare_spectrum(wp, params, drives, grid, TruncationSpec(5, 20), n_th=3.0))
        assert time.perf_counter() - start <= 60.0
        for comparison in comparisons:
            assert len(comparison.rows) == 21
            assert comparison.n_th == 3.0
            # first moments close exactly, whatever the thermal occupation
            assert comparison.max_abs_err <= 1e-6
            assert comparison.relative_error <= 0.02

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["fig5a", "fig5b"])
    def test_published_thermal_case(self, name):
        preset = DEFAULT_CATALOG[name]
        grid = np.linspace(-1.0, 1.0, 21)
        for phi in preset.phis:
            params, wp, drives = preset.working_point(phi=phi)
            comparison = compare_spectrum(wp, params, drives, grid, preset.truncation_spec(), preset.n_th)
            assert comparison.relative_error <= 0.02
