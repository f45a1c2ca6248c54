# this_file: src/omit_phase/cli.py
"""CLI interface for omit-phase."""

import math
import sys

import fire
from loguru import logger
from rich.console import Console
from rich.table import Table

from omit_phase.config import Settings
from omit_phase.presets import DEFAULT_CATALOG
from omit_phase.runner import execute

console = Console()


def configure_logging(verbose: bool = False) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "WARNING")


class CLI:
    """Command-line interface for phase-controlled OMIT spectra and their numerical checks.

    Every rate is in units of κ unless ``--units absolute`` is given together
    with ``--kappa``. A YAML file passed with ``--config`` supplies defaults
    that flags override.
    """

    def __init__(self, verbose: bool = False, output_dir: str | None = None):
        """Initialize CLI with optional parameters.

        Args:
            verbose: Log solver details to stderr
            output_dir: Default directory for artifacts (else $OMIT_PHASE_OUTPUT_DIR or .)
        """
        configure_logging(verbose)
        self._settings = Settings.from_env(output_dir=output_dir) if output_dir else Settings.from_env()

    def _run(self, mode: str | None, config: str | None, **flags) -> None:
        code = execute(config, mode=mode, settings=self._settings, **flags)
        if code:
            sys.exit(code)

    def spectrum(
        self,
        preset: str | None = None,
        G: float | None = None,  # noqa: N803
        phi: str | float | None = None,
        y: float | None = None,
        eta: float | None = None,
        gamma_m: float | None = None,
        omega_m: float | None = None,
        g0: float | None = None,
        eps_p: float | None = None,
        delta_prime_min: float | None = None,
        delta_prime_max: float | None = None,
        points: int | None = None,
        method: str | None = None,
        units: str | None = None,
        kappa: float | None = None,
        out: str | None = None,
        config: str | None = None,
    ):
        """Probe transmission spectrum over a Δ′ grid.

        Args:
            preset: Catalog name, e.g. fig2c
            G: Effective coupling |G|
            phi: Total phase Φ, a number or text like pi/2
            y: Amplitude ratio |ε_a/ε_p|
            eta: Cavity-waveguide coupling
            gamma_m: Mechanical decay rate
            omega_m: Mechanical frequency
            g0: Single-photon coupling
            eps_p: Probe amplitude |ε_p|
            delta_prime_min: Lower end of the Δ′ grid
            delta_prime_max: Upper end of the Δ′ grid
            points: Number of grid points
            method: exact, closed or weak
            units: kappa or absolute
            kappa: Cavity decay rate when units is absolute
            out: Output CSV path
            config: YAML run configuration
        """
        self._run(
            "spectrum",
            config,
            preset=preset,
            G=G,
            phi=phi,
            y=y,
            eta=eta,
            gamma_m=gamma_m,
            omega_m=omega_m,
            g0=g0,
            eps_p=eps_p,
            delta_prime_min=delta_prime_min,
            delta_prime_max=delta_prime_max,
            points=points,
            method=method,
            units=units,
            kappa=kappa,
            out=out,
        )

    def sweep_g(
        self,
        preset: str | None = None,
        phi: str | float | None = None,
        y: float | tuple | str | None = None,
        eta: float | None = None,
        gamma_m: float | None = None,
        g_min: float | None = None,
        g_max: float | None = None,
        g_points: int | None = None,
        units: str | None = None,
        kappa: float | None = None,
        out: str | None = None,
        config: str | None = None,
    ):
        """Resonant power transmission versus |G|; several y values write one file each.

        Args:
            preset: Catalog name, e.g. fig4b
            phi: Total phase Φ
            y: One amplitude ratio or a comma-separated list
            eta: Cavity-waveguide coupling
            gamma_m: Mechanical decay rate
            g_min: Smallest |G| of the log grid
            g_max: Largest |G| of the log grid
            g_points: Number of |G| values
            units: kappa or absolute
            kappa: Cavity decay rate when units is absolute
            out: Output CSV path
            config: YAML run configuration
        """
        self._run(
            "sweep-g",
            config,
            preset=preset,
            phi=phi,
            y=y,
            eta=eta,
            gamma_m=gamma_m,
            g_min=g_min,
            g_max=g_max,
            g_points=g_points,
            units=units,
            kappa=kappa,
            out=out,
        )

    def lindblad(
        self,
        preset: str | None = None,
        G: float | None = None,  # noqa: N803
        phi: str | float | tuple | None = None,
        y: float | None = None,
        eta: float | None = None,
        eps_p: float | None = None,
        nth: float | None = None,
        ncut_cav: int | None = None,
        ncut_mech: int | None = None,
        delta_prime_min: float | None = None,
        delta_prime_max: float | None = None,
        points: int | None = None,
        convergence: bool | None = None,
        out: str | None = None,
        config: str | None = None,
    ):
        """Master-equation spectrum against the linear response.

        Args:
            preset: Catalog name, e.g. fig5a
            G: Effective coupling |G|
            phi: One phase or a comma-separated list
            y: Amplitude ratio |ε_a/ε_p|
            eta: Cavity-waveguide coupling
            eps_p: Probe amplitude |ε_p|
            nth: Thermal phonon number
            ncut_cav: Photon cutoff
            ncut_mech: Phonon cutoff
            delta_prime_min: Lower end of the Δ′ grid
            delta_prime_max: Upper end of the Δ′ grid
            points: Number of grid points
            convergence: Also write a truncation convergence table
            out: Output CSV path
            config: YAML run configuration
        """
        self._run(
            "lindblad",
            config,
            preset=preset,
            G=G,
            phi=phi,
            y=y,
            eta=eta,
            eps_p=eps_p,
            nth=nth,
            ncut_cav=ncut_cav,
            ncut_mech=ncut_mech,
            delta_prime_min=delta_prime_min,
            delta_prime_max=delta_prime_max,
            points=points,
            convergence=convergence,
            out=out,
        )

    def nonlinear_check(
        self,
        preset: str | None = None,
        G: float | None = None,  # noqa: N803
        phi: str | float | None = None,
        y: float | None = None,
        omega_m: float | None = None,
        drive_ratio: float | None = None,
        delta_primes: tuple | str | None = None,
        ratios: tuple | str | None = None,
        series: bool | None = None,
        out: str | None = None,
        config: str | None = None,
    ):
        """Nonlinear mean-field sidebands against the linear response.

        Args:
            preset: Catalog name, e.g. fig2a
            G: Effective coupling |G|
            phi: Total phase Φ
            y: Amplitude ratio |ε_a/ε_p|
            omega_m: Mechanical frequency
            drive_ratio: |ε_p|/|ε_c| of the weak drives
            delta_primes: Detunings to check, comma-separated
            ratios: Increasing |ε_p|/|ε_c| ladder for the linearity report
            series: Also write the time series of the first detuning
            out: Output CSV path
            config: YAML run configuration
        """
        self._run(
            "nonlinear-check",
            config,
            preset=preset,
            G=G,
            phi=phi,
            y=y,
            omega_m=omega_m,
            drive_ratio=drive_ratio,
            delta_primes=delta_primes,
            ratios=ratios,
            series=series,
            out=out,
        )

    def classify(
        self,
        preset: str | None = None,
        G: float | None = None,  # noqa: N803
        phi: str | float | None = None,
        y: float | None = None,
        gamma_m: float | None = None,
        out: str | None = None,
        config: str | None = None,
    ):
        """Cooperativity, regime and special couplings of a working point.

        Args:
            preset: Catalog name
            G: Effective coupling |G|
            phi: Total phase Φ
            y: Amplitude ratio |ε_a/ε_p|
            gamma_m: Mechanical decay rate
            out: Output CSV path
            config: YAML run configuration
        """
        self._run("classify", config, preset=preset, G=G, phi=phi, y=y, gamma_m=gamma_m, out=out)

    def run(self, config: str, **flags):
        """Run whatever mode a YAML configuration names; flags override the file.

        Args:
            config: YAML run configuration
        """
        self._run(flags.pop("mode", None), config, **flags)

    def presets(self, json_output: bool = False):
        """List the preset catalog.

        Args:
            json_output: Output as JSON instead of formatted table
        """
        presets = DEFAULT_CATALOG.list_presets()
        if json_output:
            console.print_json(data=[p.as_dict() for p in presets])
            return

        table = Table(title=f"Presets ({len(presets)})")
        table.add_column("Name", style="cyan")
        table.add_column("Figure", style="green")
        table.add_column("Mode")
        table.add_column("|G|/κ", justify="right")
        table.add_column("Φ/π", justify="right")
        table.add_column("y", justify="right")
        table.add_column("η", justify="right")
        table.add_column("N_th", justify="right")
        table.add_column("Description", style="yellow")
        for p in presets:
            table.add_row(
                p.name,
                p.figure,
                p.mode,
                f"{p.G:.6g}",
                ", ".join(f"{phi / math.pi:g}" for phi in p.phis),
                ", ".join(f"{y:g}" for y in p.ys),
                f"{p.eta:g}",
                f"{p.n_th:g}" + (f" {p.truncation}" if p.truncation else ""),
                p.description,
            )
        console.print(table)

    def version(self):
        """Show version information."""
        from omit_phase._version import __version__

        console.print(f"omit-phase version {__version__}")


def main():
    """Main entry point for the CLI."""
    fire.Fire(CLI)
