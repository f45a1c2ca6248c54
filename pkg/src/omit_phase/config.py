# this_file: src/omit_phase/config.py
"""Numeric thresholds, environment defaults and the YAML config loader."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any

import yaml
from loguru import logger

from omit_phase.errors import ConfigError

OUTPUT_DIR_ENV = "OMIT_PHASE_OUTPUT_DIR"


@dataclass(frozen=True)
class Settings:
    """Every tolerance and threshold used by the numerical modules.

    Args:
        sideband_ratio_min: omega_m / kappa below which RWA-based results warn
        weak_drive_ratio: max |eps_p|/|eps_c| and |eps_a|/|eps_c| before warning
        relaxation: damping of the steady-state fixed-point iteration
        max_iterations: iteration cap of the fixed-point solver
        fixed_point_tol: relative step tolerance of the fixed-point solver
        steady_residual_tol: relative residual accepted for the steady state
        gwi_cooperativity: C above which spectra are labelled GWI-like
        weak_control_cooperativity: C below which the weak-control formula applies
        linearity_pass: margin up to which the linear regime is trusted
        linearity_fail: margin from which the linear regime is rejected
        singular_det: determinant magnitude treated as singular
        dimension_cap: largest truncated Hilbert-space dimension
        positivity_slack: tolerated negative eigenvalue of a density matrix
        liouvillian_residual_tol: relative residual of the Liouvillian null vector
        krylov_rtol: GMRES tolerance of the preconditioned steady-state solve
        krylov_restart: GMRES restart length
        krylov_maxiter: GMRES restart cycles before the direct solve takes over
        ode_rtol: relative tolerance of the adaptive integrators
        ode_atol: absolute tolerance of the adaptive integrators
        settle_time_constants: slowest-mode time constants waited before fitting
        fit_periods: drive periods in the sideband fit window
        samples_per_period: dense-output samples per drive period
        integration_attempts: attempts with progressively relaxed tolerances
        output_dir: default directory for CLI artifacts
    """

    sideband_ratio_min: float = 5.0
    weak_drive_ratio: float = 0.1
    relaxation: float = 0.5
    max_iterations: int = 10_000
    fixed_point_tol: float = 1e-13
    steady_residual_tol: float = 1e-12
    gwi_cooperativity: float = 1.0
    weak_control_cooperativity: float = 0.01
    linearity_pass: float = 0.1
    linearity_fail: float = 0.3
    singular_det: float = 1e-300
    dimension_cap: int = 4096
    positivity_slack: float = 1e-8
    liouvillian_residual_tol: float = 1e-10
    krylov_rtol: float = 1e-12
    krylov_restart: int = 60
    krylov_maxiter: int = 10
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    settle_time_constants: float = 10.0
    fit_periods: int = 50
    samples_per_period: int = 32
    integration_attempts: int = 3
    output_dir: str = "."

    @classmethod
    def from_env(cls, **overrides: Any) -> Settings:
        """Build settings, taking the output directory from the environment."""
        settings = cls(output_dir=os.getenv(OUTPUT_DIR_ENV, "."))
        return replace(settings, **overrides) if overrides else settings

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


DEFAULT_SETTINGS = Settings()


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a YAML run configuration.

    Returns the top-level mapping; an empty file yields an empty mapping.

    Raises:
        ConfigError: when the file is missing, not YAML, or not a mapping
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"{path}: cannot read config file ({e.strerror or e})"
        raise ConfigError(msg) from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark is not None else "unknown position"
        problem = getattr(e, "problem", None) or str(e)
        msg = f"{path}: YAML syntax error at {where}: {problem}"
        raise ConfigError(msg) from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        msg = f"{path}: top level must be a mapping, got {type(data).__name__}"
        raise ConfigError(msg)
    logger.debug("Loaded config {} with sections {}", path, sorted(data))
    return data


def locate_keys(path: str | Path) -> dict[str, int]:
    """1-based line of every mapping key in a YAML file, keyed by dotted path."""
    try:
        root = yaml.compose(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError):
        return {}
    lines: dict[str, int] = {}

    def walk(node: yaml.Node | None, prefix: str) -> None:
        if not isinstance(node, yaml.MappingNode):
            return
        for key, value in node.value:
            dotted = f"{prefix}{key.value}"
            lines[dotted] = key.start_mark.line + 1
            walk(value, f"{dotted}.")

    walk(root, "")
    return lines
