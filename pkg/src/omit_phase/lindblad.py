# this_file: src/omit_phase/lindblad.py
"""Master-equation check of the linear response on a truncated photon⊗phonon Fock space.

The model is the beam-splitter Hamiltonian in the frame rotating at the probe
frequency,

    H = −Δ′(c†c + b†b) − (G c†b + G* c b†) + i(ε_p c† − ε_p* c) + i(ε_a b† − ε_a* b),

with cavity loss κ𝒟[c] and a thermal mechanical bath γ_m(N_th+1)𝒟[b] + γ_m N_th 𝒟[b†].
Its first moments obey the linear-response equations exactly, so ⟨c⟩ from the
steady state must reproduce ε_T as the truncation grows.

Superoperators act on column-stacked density matrices, vec(AρB) = (Bᵀ⊗A)vec(ρ).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import LinearOperator, MatrixRankWarning, gmres, splu, spsolve
from scipy.sparse.linalg import norm as sparse_norm

from omit_phase.config import DEFAULT_SETTINGS, Settings
from omit_phase.errors import DimensionCapExceeded, InvalidParameters, SolverFailure, StepRejection
from omit_phase.response import ResponsePoint, response_exact

if TYPE_CHECKING:
    from collections.abc import Sequence

    from omit_phase.model import DriveSet, SystemParams, WorkingPoint


@dataclass(frozen=True)
class TruncationSpec:
    """Fock cutoffs: photon levels 0..n_cav, phonon levels 0..n_mech."""

    n_cav: int
    n_mech: int

    def __post_init__(self) -> None:
        if self.n_cav < 1 or self.n_mech < 1:
            msg = f"truncation needs n_cav >= 1 and n_mech >= 1, got ({self.n_cav}, {self.n_mech})"
            raise InvalidParameters(msg)

    @property
    def dimension(self) -> int:
        return (self.n_cav + 1) * (self.n_mech + 1)

    def check_cap(self, settings: Settings = DEFAULT_SETTINGS) -> None:
        if self.dimension > settings.dimension_cap:
            msg = (
                f"truncation ({self.n_cav}, {self.n_mech}) has dimension {self.dimension} "
                f"above the cap {settings.dimension_cap}"
            )
            raise DimensionCapExceeded(msg)


@lru_cache(maxsize=16)
def ladder_operators(trunc: TruncationSpec) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Annihilation operators (c, b) on the composite space, photon index major."""

    def lowering(n: int) -> sp.csr_matrix:
        return sp.diags(np.sqrt(np.arange(1, n + 1, dtype=float)), offsets=1, format="csr", dtype=complex)

    eye_cav = sp.identity(trunc.n_cav + 1, dtype=complex, format="csr")
    eye_mech = sp.identity(trunc.n_mech + 1, dtype=complex, format="csr")
    c = sp.kron(lowering(trunc.n_cav), eye_mech, format="csr")
    b = sp.kron(eye_cav, lowering(trunc.n_mech), format="csr")
    return c, b


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dimension: int) -> np.ndarray:
    return np.asarray(vec, dtype=complex).reshape((dimension, dimension), order="F")


@dataclass(frozen=True)
class TruncatedDensityMatrix:
    """Density matrix on the truncated photon⊗phonon basis."""

    matrix: np.ndarray
    truncation: TruncationSpec

    def __post_init__(self) -> None:
        dim = self.truncation.dimension
        if self.matrix.shape != (dim, dim):
            msg = f"density matrix shape {self.matrix.shape} does not match dimension {dim}"
            raise InvalidParameters(msg)

    @classmethod
    def vacuum(cls, trunc: TruncationSpec) -> TruncatedDensityMatrix:
        rho = np.zeros((trunc.dimension, trunc.dimension), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, trunc)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def validate(
        self,
        *,
        trace_tol: float = 1e-10,
        hermitian_tol: float = 1e-12,
        settings: Settings = DEFAULT_SETTINGS,
    ) -> TruncatedDensityMatrix:
        """Check unit trace, hermiticity and positivity up to the configured slack.

        Raises:
            SolverFailure: when any of the three fails
        """
        if abs(self.trace - 1.0) > trace_tol:
            msg = f"density matrix trace {self.trace:.12g} deviates from 1 by more than {trace_tol:g}"
            raise SolverFailure(msg)
        skew = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if skew > hermitian_tol:
            msg = f"density matrix is not Hermitian (max deviation {skew:.3g})"
            raise SolverFailure(msg)
        lowest = float(np.linalg.eigvalsh(self.matrix)[0])
        if lowest < -settings.positivity_slack:
            msg = f"density matrix has eigenvalue {lowest:.3g} below -{settings.positivity_slack:g}"
            raise SolverFailure(msg)
        return self

    def expect(self, operator: sp.spmatrix | np.ndarray) -> complex:
        """tr(ρ·A)."""
        return complex((operator @ self.matrix).trace())

    def cavity_mean(self) -> complex:
        c, _ = ladder_operators(self.truncation)
        return self.expect(c)

    def mechanical_mean(self) -> complex:
        _, b = ladder_operators(self.truncation)
        return self.expect(b)

    def photon_number(self) -> float:
        c, _ = ladder_operators(self.truncation)
        return self.expect(c.conj().T @ c).real

    def phonon_number(self) -> float:
        _, b = ladder_operators(self.truncation)
        return self.expect(b.conj().T @ b).real

    def mechanical_marginal(self) -> np.ndarray:
        """Phonon-number distribution with the photon mode traced out."""
        nc, nm = self.truncation.n_cav + 1, self.truncation.n_mech + 1
        blocks = self.matrix.reshape(nc, nm, nc, nm)
        return np.einsum("iaib->ab", blocks).diagonal().real.copy()


@dataclass(frozen=True)
class LindbladModel:
    """Coefficients of the effective Hamiltonian and of the three dissipators."""

    delta_prime: float
    G: complex
    eps_p: complex
    eps_a: complex
    kappa: float = 1.0
    gamma_m: float = 1e-3
    n_th: float = 0.0

    def __post_init__(self) -> None:
        if self.kappa < 0.0 or self.gamma_m < 0.0:
            msg = f"dissipation rates must be non-negative, got kappa={self.kappa}, gamma_m={self.gamma_m}"
            raise InvalidParameters(msg)
        if not (math.isfinite(self.n_th) and self.n_th >= 0.0):
            msg = f"thermal occupation must be non-negative, got {self.n_th}"
            raise InvalidParameters(msg)

    @classmethod
    def from_working_point(
        cls,
        wp: WorkingPoint,
        params: SystemParams,
        drives: DriveSet,
        n_th: float = 0.0,
        delta_prime: float | None = None,
    ) -> LindbladModel:
        return cls(
            delta_prime=drives.delta_prime if delta_prime is None else float(delta_prime),
            G=wp.G,
            eps_p=drives.eps_p,
            eps_a=drives.eps_a,
            kappa=params.kappa,
            gamma_m=params.gamma_m,
            n_th=n_th,
        )

    @property
    def emission_rate(self) -> float:
        return self.gamma_m * (self.n_th + 1.0)

    @property
    def absorption_rate(self) -> float:
        return self.gamma_m * self.n_th

    def with_delta_prime(self, delta_prime: float) -> LindbladModel:
        return replace(self, delta_prime=float(delta_prime))

    def hamiltonian(self, trunc: TruncationSpec) -> sp.csr_matrix:
        c, b = ladder_operators(trunc)
        cd, bd = c.conj().T, b.conj().T
        G, Gc = self.G, np.conj(self.G)
        H = (
            -self.delta_prime * (cd @ c + bd @ b)
            - (G * (cd @ b) + Gc * (c @ bd))
            + 1j * (self.eps_p * cd - np.conj(self.eps_p) * c)
            + 1j * (self.eps_a * bd - np.conj(self.eps_a) * b)
        )
        return sp.csr_matrix(H)


def _dissipator(op: sp.csr_matrix, eye: sp.csr_matrix) -> sp.csr_matrix:
    gain = op.conj().T @ op
    return sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, gain) - 0.5 * sp.kron(gain.T, eye)


def build_liouvillian(
    model: LindbladModel,
    trunc: TruncationSpec,
    settings: Settings | None = None,
) -> sp.csc_matrix:
    """Sparse D²×D² generator of dρ/dt = −i[H, ρ] + Σ rate·𝒟[L]ρ."""
    settings = settings or DEFAULT_SETTINGS
    trunc.check_cap(settings)
    c, b = ladder_operators(trunc)
    eye = sp.identity(trunc.dimension, dtype=complex, format="csr")
    H = model.hamiltonian(trunc)

    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for rate, op in ((model.kappa, c), (model.emission_rate, b), (model.absorption_rate, b.conj().T)):
        if rate > 0.0:
            L = L + rate * _dissipator(op, eye)
    logger.debug("Built Liouvillian D={} nnz={}", trunc.dimension, L.nnz)
    return sp.csc_matrix(L)


def trace_row(dimension: int) -> np.ndarray:
    """vec(I), the row that reads off tr ρ from a column-stacked state."""
    return vectorize(np.eye(dimension))


def trace_annihilation(L: sp.spmatrix) -> float:
    """max |(vec I)ᵀ L|, zero for a trace-preserving generator."""
    dimension = math.isqrt(L.shape[0])
    row = L.T @ trace_row(dimension)
    return float(np.max(np.abs(row)))


def _relative_residual(L: sp.spmatrix, vec: np.ndarray) -> float:
    scale = sparse_norm(L) * np.linalg.norm(vec)
    return float(np.linalg.norm(L @ vec) / scale) if scale > 0.0 else 0.0


def _density_from_vector(vec: np.ndarray, trunc: TruncationSpec) -> TruncatedDensityMatrix:
    rho = unvectorize(vec, trunc.dimension)
    rho = 0.5 * (rho + rho.conj().T)
    return TruncatedDensityMatrix(rho / np.trace(rho).real, trunc)


def _bordered(L: sp.spmatrix, w: np.ndarray | None = None) -> sp.csc_matrix:
    """[[L, w], [wᵀ, 0]], by default with w = vec(I).

    Nonsingular when L has a unique steady state ρ with wᵀρ ≠ 0 and
    vec(I)ᵀw ≠ 0.
    """
    if w is None:
        w = trace_row(math.isqrt(L.shape[0]))
    column = sp.csc_matrix(w.reshape(-1, 1))
    return sp.bmat([[L, column], [column.T, None]], format="csc")


def _vacuum_anchor(n: int) -> np.ndarray:
    """Unit vector on ρ_00, the first entry of vec(ρ)."""
    w = np.zeros(n, dtype=complex)
    w[0] = 1.0
    return w


def _border_rhs(n: int) -> np.ndarray:
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[-1] = 1.0
    return rhs


def coherence_layout(trunc: TruncationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Coherence order n_row − n_col and column excitation n_col of every vec(ρ) entry.

    Only the coherent drives change the coherence order, by ±1; loss, thermal
    noise, detuning and the beam-splitter coupling keep it.
    """
    c, b = ladder_operators(trunc)
    number = np.rint((c.conj().T @ c + b.conj().T @ b).diagonal().real).astype(int)
    order = (number[:, None] - number[None, :]).reshape(-1, order="F")
    level = np.broadcast_to(number[None, :], (trunc.dimension, trunc.dimension)).reshape(-1, order="F")
    return order, level


def _sector_preconditioner(L: sp.csc_matrix, trunc: TruncationSpec) -> LinearOperator | None:
    """Exact inverse of the bordered generator with every drive entry removed.

    Without drives the generator splits into independent coherence-order
    sectors, each banded once sorted by excitation, so the LU stays sparse.
    The border is the single entry ρ_00 = 1; the trace is restored afterwards.
    """
    n = L.shape[0]
    order, level = coherence_layout(trunc)
    coo = L.tocoo()
    keep = order[coo.row] == order[coo.col]
    undriven = sp.csc_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=L.shape)

    perm = np.append(np.lexsort((np.arange(n), level, order)), n)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.size)
    bordered = _bordered(undriven, _vacuum_anchor(n))
    try:
        lu = splu(bordered[perm][:, perm].tocsc(), permc_spec="NATURAL")
    except RuntimeError as e:
        logger.debug("Drive-free preconditioner is singular: {}", e)
        return None

    def apply(x: np.ndarray) -> np.ndarray:
        return lu.solve(np.asarray(x, dtype=complex).ravel()[perm])[inverse]

    return LinearOperator(bordered.shape, matvec=apply, dtype=complex)


def _iterative_solve(L: sp.csc_matrix, trunc: TruncationSpec, settings: Settings) -> np.ndarray | None:
    preconditioner = _sector_preconditioner(L, trunc)
    if preconditioner is None:
        return None
    n = L.shape[0]
    solution, info = gmres(
        _bordered(L, _vacuum_anchor(n)),
        _border_rhs(n),
        M=preconditioner,
        rtol=settings.krylov_rtol,
        atol=0.0,
        restart=settings.krylov_restart,
        maxiter=settings.krylov_maxiter,
    )
    if info != 0:
        logger.debug("GMRES stopped with info={}", info)
    if not np.all(np.isfinite(solution)):
        return None
    return np.asarray(solution[:n])


def _bordered_solve(L: sp.csc_matrix) -> np.ndarray | None:
    n = L.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            solution = spsolve(_bordered(L), _border_rhs(n))
        except (MatrixRankWarning, RuntimeError) as e:
            logger.warning("Bordered Liouvillian solve failed: {}", e)
            return None
    if not np.all(np.isfinite(solution)):
        return None
    return np.asarray(solution[:n])


def steady_state(
    L: sp.csc_matrix,
    trunc: TruncationSpec,
    settings: Settings | None = None,
    *,
    fallback_time: float = 2.0e4,
) -> TruncatedDensityMatrix:
    """Null vector of L with unit trace.

    The bordered system is solved by GMRES, preconditioned with the drive-free
    generator. When that misses the residual tolerance a sparse direct solve
    follows, and as a last resort the state is propagated from the vacuum for
    ``fallback_time``.

    Raises:
        SolverFailure: no route yields a valid density matrix
    """
    settings = settings or DEFAULT_SETTINGS
    routes = (
        ("preconditioned GMRES", lambda: _iterative_solve(L, trunc, settings)),
        ("direct", lambda: _bordered_solve(L)),
    )
    for route, solve in routes:
        vec = solve()
        if vec is None:
            continue
        residual = _relative_residual(L, vec)
        if residual <= settings.liouvillian_residual_tol:
            logger.debug("Steady state by {} solve, residual {:.3g}", route, residual)
            return _density_from_vector(vec, trunc).validate(settings=settings)
        logger.debug("{} steady-state residual {:.3g} above tolerance", route, residual)

    logger.warning("Sparse steady-state solves failed; evolving for t={:g}", fallback_time)

    try:
        trajectory = evolve(L, TruncatedDensityMatrix.vacuum(trunc), fallback_time, fallback_time, settings)
    except StepRejection as e:
        msg = f"steady state not found: {e}"
        raise SolverFailure(msg) from e
    final = vectorize(trajectory.final.matrix)
    residual = _relative_residual(L, final)
    if residual > math.sqrt(settings.liouvillian_residual_tol):
        msg = (
            f"steady state not reached (residual {residual:.3g}); "
            "the truncation may be too small or the parameters outside the damped regime"
        )
        raise SolverFailure(msg)
    return _density_from_vector(final, trunc).validate(trace_tol=1e-8, settings=settings)


@dataclass(frozen=True)
class LindbladTrajectory:
    times: np.ndarray
    states: tuple[TruncatedDensityMatrix, ...]

    @property
    def final(self) -> TruncatedDensityMatrix:
        return self.states[-1]

    def expect(self, operator: sp.spmatrix | np.ndarray) -> np.ndarray:
        return np.array([state.expect(operator) for state in self.states])

    def traces(self) -> np.ndarray:
        return np.array([state.trace for state in self.states])

    def residuals(self, L: sp.spmatrix) -> np.ndarray:
        """‖L vec ρ(t)‖ along the trajectory."""
        return np.array([np.linalg.norm(L @ vectorize(state.matrix)) for state in self.states])


def evolve(
    L: sp.csc_matrix,
    rho0: TruncatedDensityMatrix,
    t_final: float,
    dt_control: float,
    settings: Settings | None = None,
    *,
    rtol: float | None = None,
    atol: float | None = None,
) -> LindbladTrajectory:
    """Propagate ρ with an implicit adaptive integrator, sampled every ``dt_control``.

    Raises:
        StepRejection: the step-size control gave up
    """
    settings = settings or DEFAULT_SETTINGS
    if t_final <= 0.0 or dt_control <= 0.0:
        msg = f"t_final and dt_control must be positive, got {t_final}, {dt_control}"
        raise InvalidParameters(msg)
    rho0.validate(trace_tol=1e-8, settings=settings)

    samples = max(1, math.ceil(t_final / dt_control))
    times = np.linspace(0.0, t_final, samples + 1)
    solution = solve_ivp(
        lambda _t, x: L @ x,
        (0.0, t_final),
        vectorize(rho0.matrix),
        method="BDF",
        jac=L,
        t_eval=times,
        rtol=rtol if rtol is not None else settings.ode_rtol,
        atol=atol if atol is not None else settings.ode_atol,
    )
    if solution.status != 0:
        failed_at = solution.t[-1] if solution.t.size else 0.0
        msg = f"master-equation integration failed at t={failed_at:g}: {solution.message}"
        raise StepRejection(msg)
    logger.debug("Evolved master equation to t={:g} in {} steps", t_final, solution.nfev)

    trunc = rho0.truncation
    states = []
    for column in solution.y.T:
        rho = unvectorize(column, trunc.dimension)
        states.append(TruncatedDensityMatrix(0.5 * (rho + rho.conj().T), trunc))
    return LindbladTrajectory(solution.t, tuple(states))


def extract_response(
    rho_ss: TruncatedDensityMatrix,
    eta: float,
    kappa: float,
    eps_p: complex,
    delta_prime: float = 0.0,
) -> ResponsePoint:
    """ε_T = ηκ·tr(ρ c)/ε_p."""
    eps_p = complex(eps_p)
    if eps_p == 0:
        msg = "probe amplitude eps_p must be nonzero"
        raise InvalidParameters(msg)
    return ResponsePoint(float(delta_prime), eta * kappa * rho_ss.cavity_mean() / eps_p)


def solve_model(
    model: LindbladModel,
    trunc: TruncationSpec,
    settings: Settings | None = None,
) -> TruncatedDensityMatrix:
    """Build and solve in one go, with a fallback horizon of 20 slowest decay times."""
    L = build_liouvillian(model, trunc, settings)
    slowest = min(rate for rate in (model.kappa, model.gamma_m) if rate > 0.0)
    return steady_state(L, trunc, settings, fallback_time=20.0 / slowest)


@dataclass(frozen=True)
class ConvergenceRow:
    truncation: TruncationSpec
    cavity_mean: complex
    difference: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    converged: bool


def convergence_sweep(
    model: LindbladModel,
    ladder: Sequence[TruncationSpec],
    settings: Settings | None = None,
    *,
    rel_tol: float = 1e-4,
) -> ConvergenceTable:
    """⟨c⟩ along a ladder of growing truncations; converged when the last two agree."""
    settings = settings or DEFAULT_SETTINGS
    if len(ladder) < 3:
        msg = f"convergence sweep needs at least 3 truncations, got {len(ladder)}"
        raise InvalidParameters(msg)
    for lower, upper in zip(ladder, ladder[1:], strict=False):
        if upper.n_cav < lower.n_cav or upper.n_mech < lower.n_mech:
            msg = f"truncation ladder must not shrink: {lower} then {upper}"
            raise InvalidParameters(msg)

    rows: list[ConvergenceRow] = []
    previous: complex | None = None
    for trunc in ladder:
        mean = solve_model(model, trunc, settings).cavity_mean()
        difference = None if previous is None else abs(mean - previous)
        rows.append(ConvergenceRow(trunc, mean, difference))
        previous = mean

    last, before = rows[-1].cavity_mean, rows[-2].cavity_mean
    converged = abs(last - before) <= rel_tol * max(abs(last), abs(before)) or last == before
    if not converged:
        logger.warning("Truncation ladder not converged: last difference {:.3g}", rows[-1].difference)
    return ConvergenceTable(tuple(rows), converged)


@dataclass(frozen=True)
class ComparisonRow:
    delta_prime: float
    eps_T_numeric: complex
    eps_T_analytic: complex

    @property
    def abs_err(self) -> float:
        return abs(self.eps_T_numeric - self.eps_T_analytic)


@dataclass(frozen=True)
class SpectrumComparison:
    """Master-equation versus linear-response ε_T over a Δ′ grid."""

    rows: tuple[ComparisonRow, ...]
    phi_total: float
    n_th: float
    truncation: TruncationSpec

    @property
    def max_abs_err(self) -> float:
        return max(row.abs_err for row in self.rows)

    @property
    def relative_error(self) -> float:
        """Largest error measured against the largest analytic |ε_T| on the grid."""
        scale = max(abs(row.eps_T_analytic) for row in self.rows)
        return self.max_abs_err / scale if scale > 0.0 else self.max_abs_err


def compare_spectrum(
    wp: WorkingPoint,
    params: SystemParams,
    drives: DriveSet,
    grid: Sequence[float] | np.ndarray,
    trunc: TruncationSpec,
    n_th: float = 0.0,
    settings: Settings | None = None,
) -> SpectrumComparison:
    settings = settings or DEFAULT_SETTINGS
    base = LindbladModel.from_working_point(wp, params, drives, n_th)
    rows = []
    for dp in np.asarray(grid, dtype=float):
        rho = solve_model(base.with_delta_prime(float(dp)), trunc, settings)
        numeric = extract_response(rho, params.eta, params.kappa, drives.eps_p, float(dp))
        analytic = response_exact(
            wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, float(dp), settings
        )
        rows.append(ComparisonRow(float(dp), numeric.eps_T, analytic.eps_T))
    comparison = SpectrumComparison(tuple(rows), wp.phi_total, n_th, trunc)
    logger.debug(
        "Lindblad comparison Phi={:.4g} N_th={:g}: relative error {:.3g}", wp.phi_total, n_th, comparison.relative_error
    )
    return comparison
