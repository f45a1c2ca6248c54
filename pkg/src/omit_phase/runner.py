# this_file: src/omit_phase/runner.py
"""Run configuration, validation and dispatch to the computational modules.

``run`` is the single entry point behind every CLI mode. It returns a process
exit status: 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, NoReturn

from loguru import logger
from rich.console import Console
from rich.table import Table

from omit_phase import __version__
from omit_phase.artifacts import (
    write_comparison,
    write_convergence,
    write_csv,
    write_series,
    write_sidebands,
    write_sidecar,
    write_spectrum,
    write_sweep,
    write_validation,
)
from omit_phase.config import Settings, load_config_file, locate_keys
from omit_phase.dynamics import sideband_response, validate_linearity
from omit_phase.errors import ConfigError, InvalidParameters, OmitPhaseError
from omit_phase.lindblad import LindbladModel, TruncationSpec, compare_spectrum, convergence_sweep
from omit_phase.model import SystemParams, sideband_phase, working_point_from_G
from omit_phase.presets import DEFAULT_CATALOG, Preset, PresetCatalog
from omit_phase.response import (
    Method,
    classify_regime,
    compute_spectrum,
    linearity_bound,
    log_coupling_grid,
    sweep_coupling,
    t_max_estimate,
)

console = Console()

MODES = ("spectrum", "sweep-g", "lindblad", "nonlinear-check", "classify")
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_PHASE = re.compile(r"^(?P<sign>[+-]?)(?P<num>\d*\.?\d*)\*?pi(?:/(?P<den>\d*\.?\d+))?$")


def parse_phase(value: Any) -> float:
    """A phase given as a number or as text like ``pi``, ``-pi/2`` or ``3pi/2``."""
    if isinstance(value, bool):
        msg = f"expected a phase, got {value!r}"
        raise ConfigError(msg)
    if isinstance(value, int | float):
        return float(value)
    text = str(value).strip().lower().replace(" ", "")
    match = _PHASE.match(text)
    if match:
        num = float(match["num"]) if match["num"] else 1.0
        den = float(match["den"]) if match["den"] else 1.0
        return (-1.0 if match["sign"] == "-" else 1.0) * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        msg = f"cannot read {value!r} as a phase"
        raise ConfigError(msg) from None


def _as_tuple(value: Any) -> tuple[Any, ...]:
    if isinstance(value, list | tuple):
        return tuple(value)
    if isinstance(value, str) and "," in value:
        return tuple(part for part in value.split(",") if part.strip())
    return (value,)


def _floats(value: Any) -> tuple[float, ...]:
    items = _as_tuple(value)
    try:
        return tuple(float(v) for v in items if not isinstance(v, bool))
    except (TypeError, ValueError):
        msg = f"expected numbers, got {value!r}"
        raise ConfigError(msg) from None


def _phases(value: Any) -> tuple[float, ...]:
    return tuple(parse_phase(v) for v in _as_tuple(value))


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float | str):
        msg = f"expected a number, got {value!r}"
        raise ConfigError(msg)
    try:
        return float(value)
    except ValueError:
        msg = f"expected a number, got {value!r}"
        raise ConfigError(msg) from None


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        msg = f"expected an integer, got {value!r}"
        raise ConfigError(msg)
    return value


def _flag(value: Any) -> bool:
    if not isinstance(value, bool):
        msg = f"expected true or false, got {value!r}"
        raise ConfigError(msg)
    return value


def _text(value: Any) -> str:
    if not isinstance(value, str):
        msg = f"expected a string, got {value!r}"
        raise ConfigError(msg)
    return value


# dotted config key -> (RunConfig field, converter)
SCHEMA: dict[str, tuple[str, Any]] = {
    "mode": ("mode", _text),
    "preset": ("preset", _text),
    "units": ("units", _text),
    "method": ("method", _text),
    "system.kappa": ("kappa", _number),
    "system.gamma_m": ("gamma_m", _number),
    "system.omega_m": ("omega_m", _number),
    "system.g0": ("g0", _number),
    "system.eta": ("eta", _number),
    "drive.G": ("G", _number),
    "drive.phi": ("phi", _phases),
    "drive.y": ("y", _floats),
    "drive.eps_p": ("eps_p", _number),
    "drive.resolved_sideband_limit": ("resolved_sideband_limit", _flag),
    "grid.delta_prime_min": ("delta_prime_min", _number),
    "grid.delta_prime_max": ("delta_prime_max", _number),
    "grid.points": ("points", _integer),
    "grid.g_min": ("g_min", _number),
    "grid.g_max": ("g_max", _number),
    "grid.g_points": ("g_points", _integer),
    "lindblad.nth": ("nth", _number),
    "lindblad.ncut_cav": ("ncut_cav", _integer),
    "lindblad.ncut_mech": ("ncut_mech", _integer),
    "lindblad.convergence": ("convergence", _flag),
    "nonlinear.drive_ratio": ("drive_ratio", _number),
    "nonlinear.ratios": ("ratios", _floats),
    "nonlinear.delta_primes": ("delta_primes", _floats),
    "nonlinear.series": ("series", _flag),
    "output.path": ("out", _text),
}
SECTIONS = {key.split(".")[0] for key in SCHEMA if "." in key}


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs. ``None`` means "take it from the preset or the default".

    Rates, amplitudes and detunings are in units of κ unless ``units`` is
    ``"absolute"``, in which case they are divided by ``kappa`` on resolution.
    """

    mode: str | None = None
    preset: str | None = None
    units: str = "kappa"
    kappa: float = 1.0
    gamma_m: float | None = None
    omega_m: float | None = None
    g0: float | None = None
    eta: float | None = None
    G: float | None = None
    phi: tuple[float, ...] | None = None
    y: tuple[float, ...] | None = None
    eps_p: float | None = None
    resolved_sideband_limit: bool | None = None
    delta_prime_min: float | None = None
    delta_prime_max: float | None = None
    points: int | None = None
    g_min: float | None = None
    g_max: float | None = None
    g_points: int | None = None
    method: str | None = None
    nth: float | None = None
    ncut_cav: int | None = None
    ncut_mech: int | None = None
    convergence: bool = False
    drive_ratio: float | None = None
    ratios: tuple[float, ...] | None = None
    delta_primes: tuple[float, ...] | None = None
    series: bool = False
    out: str | None = None
    settings: Settings = field(default_factory=Settings.from_env)

    @classmethod
    def from_mapping(
        cls, data: dict[str, Any], *, source: str = "config", lines: dict[str, int] | None = None
    ) -> RunConfig:
        """Schema-check a nested mapping as read from YAML.

        Raises:
            ConfigError: unknown keys or wrong value types, with the dotted path
                and the source line when known
        """
        lines = lines or {}
        values: dict[str, Any] = {}

        def fail(dotted: str, problem: str) -> NoReturn:
            where = f"{source}:{lines[dotted]}" if dotted in lines else source
            msg = f"{where}: {dotted}: {problem}"
            raise ConfigError(msg)

        def take(dotted: str, raw: Any) -> None:
            if dotted not in SCHEMA:
                fail(dotted, "unknown key")
            name, convert = SCHEMA[dotted]
            try:
                values[name] = convert(raw)
            except ConfigError as e:
                fail(dotted, str(e))

        for key, value in data.items():
            key = str(key)
            if key in SECTIONS:
                if not isinstance(value, dict):
                    fail(key, f"section must be a mapping, got {type(value).__name__}")
                for sub, raw in value.items():
                    take(f"{key}.{sub}", raw)
            else:
                take(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> RunConfig:
        data = load_config_file(path)
        return cls.from_mapping(data, source=str(path), lines=locate_keys(path))

    def merged(self, **overrides: Any) -> RunConfig:
        """Flags override file values; ``None`` flags leave the file value alone."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            msg = f"unknown option(s): {', '.join(sorted(unknown))}"
            raise ConfigError(msg)
        converters = {name: convert for name, convert in SCHEMA.values()}
        given = {}
        for name, value in overrides.items():
            if value is None:
                continue
            convert = converters.get(name)
            try:
                given[name] = convert(value) if convert is not None else value
            except ConfigError as e:
                msg = f"--{name.replace('_', '-')}: {e}"
                raise ConfigError(msg) from e
        return replace(self, **given)


@dataclass(frozen=True)
class ResolvedRun:
    """A RunConfig with every value filled in and normalized to κ = 1."""

    mode: str
    preset: Preset | None
    params: SystemParams
    G: float
    phis: tuple[float, ...]
    ys: tuple[float, ...]
    eps_p: float
    resolved_sideband_limit: bool
    grid: tuple[float, float, int]
    g_grid: tuple[float, float, int]
    method: Method
    n_th: float
    truncation: TruncationSpec
    convergence: bool
    drive_ratio: float
    ratios: tuple[float, ...]
    delta_primes: tuple[float, ...]
    series: bool
    out: Path
    units: str
    kappa: float
    settings: Settings

    def delta_prime_grid(self) -> list[float]:
        lo, hi, points = self.grid
        if points == 1:
            return [0.5 * (lo + hi)]
        step = (hi - lo) / (points - 1)
        return [lo + i * step for i in range(points - 1)] + [hi]

    def metadata(self) -> dict[str, Any]:
        data = asdict(self)
        data["preset"] = None if self.preset is None else self.preset.name
        data["out"] = str(self.out)
        data["version"] = __version__
        return data


def _pick(*values: Any) -> Any:
    return next(v for v in values if v is not None)


def resolve(config: RunConfig, catalog: PresetCatalog = DEFAULT_CATALOG) -> ResolvedRun:
    """Fill every gap from the preset, then from the built-in defaults.

    Raises:
        ConfigError: unknown mode, preset, method or units
        InvalidParameters: values violating the model invariants
    """
    preset = catalog[config.preset] if config.preset is not None else None
    mode = config.mode or (preset.mode if preset else "spectrum")
    if mode not in MODES:
        msg = f"unknown mode {mode!r}; expected one of {', '.join(MODES)}"
        raise ConfigError(msg)
    if config.units not in ("kappa", "absolute"):
        msg = f"units must be 'kappa' or 'absolute', got {config.units!r}"
        raise ConfigError(msg)
    if config.units == "kappa" and config.kappa != 1.0:
        msg = "kappa can only be set together with units: absolute"
        raise ConfigError(msg)
    if not config.kappa > 0.0:
        msg = f"kappa must be positive, got {config.kappa}"
        raise ConfigError(msg)
    scale = 1.0 / config.kappa

    def rate(value: float | None, fallback: float) -> float:
        return fallback if value is None else value * scale

    base = preset or Preset("custom", "-", "custom run", "spectrum", 1.0 / 3.0, (0.0,), 0.05)
    params = SystemParams(
        gamma_m=rate(config.gamma_m, base.gamma_m),
        omega_m=rate(config.omega_m, base.omega_m),
        g0=rate(config.g0, base.g0),
        eta=_pick(config.eta, base.eta),
    )
    narrow = base.grid == "narrow"
    half = 5.0 * params.gamma_m if narrow else params.kappa
    default_points = 21 if mode == "lindblad" else 2001
    lo = rate(config.delta_prime_min, -half)
    hi = rate(config.delta_prime_max, half)
    points = _pick(config.points, default_points)
    if points < 1 or (points > 1 and not hi > lo):
        msg = f"grid needs points >= 1 and delta_prime_max > delta_prime_min, got {points}, [{lo}, {hi}]"
        raise ConfigError(msg)
    g_lo, g_hi = base.g_range
    g_grid = (rate(config.g_min, g_lo), rate(config.g_max, g_hi), _pick(config.g_points, 500))

    try:
        method = Method.parse(_pick(config.method, "exact"))
    except InvalidParameters as e:
        raise ConfigError(str(e)) from e

    trunc_default = base.truncation or (5, 20)
    truncation = TruncationSpec(_pick(config.ncut_cav, trunc_default[0]), _pick(config.ncut_mech, trunc_default[1]))
    n_th = _pick(config.nth, base.n_th if preset and preset.mode == "lindblad" else 3.0)

    name = preset.name if preset else mode
    out = Path(config.out) if config.out else Path(config.settings.output_dir) / f"{name}.csv"
    return ResolvedRun(
        mode=mode,
        preset=preset,
        params=params,
        G=rate(config.G, base.G),
        phis=_pick(config.phi, base.phis),
        ys=_pick(config.y, base.ys),
        eps_p=rate(config.eps_p, base.eps_p),
        resolved_sideband_limit=_pick(config.resolved_sideband_limit, base.resolved_sideband_limit),
        grid=(lo, hi, points),
        g_grid=g_grid,
        method=method,
        n_th=n_th,
        truncation=truncation,
        convergence=config.convergence,
        drive_ratio=_pick(config.drive_ratio, 1e-3),
        ratios=_pick(config.ratios, ()),
        delta_primes=tuple(d * scale for d in config.delta_primes) if config.delta_primes else (-0.5, 0.0, 0.5),
        series=config.series,
        out=out,
        units=config.units,
        kappa=config.kappa,
        settings=config.settings,
    )


def _curve_path(out: Path, labels: list[str]) -> Path:
    if not labels:
        return out
    return out.with_name(f"{out.stem}_{'_'.join(labels)}{out.suffix or '.csv'}")


def _phase_label(phi: float) -> str:
    return f"phi{phi / math.pi:.6g}pi"


def _curves(run: ResolvedRun) -> list[tuple[float, float, Path]]:
    curves = []
    for phi in run.phis:
        for y in run.ys:
            labels = []
            if len(run.phis) > 1:
                labels.append(_phase_label(phi))
            if len(run.ys) > 1:
                labels.append(f"y{y:g}")
            curves.append((phi, y, _curve_path(run.out, labels)))
    return curves


def _derived(run: ResolvedRun, phi: float, y: float) -> dict[str, Any]:
    params, wp, drives = _working_point(run, phi, y)
    t_max = t_max_estimate(params.kappa, params.gamma_m, y) if y > 0.0 else 1.0
    linearity = linearity_bound(t_max, abs(drives.eps_p), abs(drives.eps_c), run.settings)
    return {
        "working_point": wp,
        "drives": drives,
        "resolved_params": params,
        "cooperativity": wp.cooperativity,
        "phi_total": wp.phi_total,
        "sideband_phase": sideband_phase(params.kappa, params.omega_m),
        "t_max_estimate": t_max,
        "linearity_margin": linearity.margin,
        "linearity_status": linearity.status,
    }


def _working_point(run: ResolvedRun, phi: float, y: float, delta_prime: float = 0.0) -> tuple[SystemParams, Any, Any]:
    wp, drives = working_point_from_G(
        run.params,
        run.G,
        run.params.omega_m,
        y,
        phi,
        run.eps_p,
        delta_prime=delta_prime,
        resolved_sideband_limit=run.resolved_sideband_limit,
    )
    return run.params.with_delta0(wp.delta0), wp, drives


def _write(run: ResolvedRun, path: Path, writer: Any, payload: Any, extra: dict[str, Any]) -> Path:
    writer(path, payload)
    write_sidecar(path, {"run": run.metadata(), **extra})
    return path


def _run_spectrum(run: ResolvedRun) -> list[Path]:
    written = []
    for phi, y, path in _curves(run):
        params, wp, drives = _working_point(run, phi, y)
        spectrum = compute_spectrum(
            wp, run.delta_prime_grid(), run.method, params=params, drives=drives, settings=run.settings
        )
        extra = {**_derived(run, phi, y), "phi": phi, "y": y}
        written.append(_write(run, path, write_spectrum, spectrum, extra))
    return written


def _run_sweep(run: ResolvedRun) -> list[Path]:
    lo, hi, points = run.g_grid
    grid = log_coupling_grid(lo, hi, points)
    written = []
    for phi, y, path in _curves(run):
        sweep = sweep_coupling(
            grid,
            kappa=run.params.kappa,
            gamma_m=run.params.gamma_m,
            eta=run.params.eta,
            y=y,
            phi_total=phi,
            settings=run.settings,
        )
        g_best, t_best = sweep.argmax()
        extra = {
            "phi": phi,
            "y": y,
            "t_max_on_grid": t_best,
            "G_at_t_max": g_best,
            "t_max_estimate": t_max_estimate(run.params.kappa, run.params.gamma_m, y),
        }
        written.append(_write(run, path, write_sweep, sweep, extra))
        console.print(f"Φ={phi:.4g} y={y:g}: max T = {t_best:.6g} at |G| = {g_best:.6g}")
    return written


def _run_lindblad(run: ResolvedRun) -> list[Path]:
    written = []
    for phi, y, path in _curves(run):
        params, wp, drives = _working_point(run, phi, y)
        comparison = compare_spectrum(
            wp, params, drives, run.delta_prime_grid(), run.truncation, run.n_th, run.settings
        )
        if comparison.relative_error > 0.02:
            logger.warning("Master-equation spectrum deviates by {:.3g} at Phi={:.4g}", comparison.relative_error, phi)
        extra = {**_derived(run, phi, y), "phi": phi, "y": y, "relative_error": comparison.relative_error}
        written.append(_write(run, path, write_comparison, comparison, extra))
        console.print(f"Φ={phi:.4g}: master equation vs linear response, error {comparison.relative_error:.3g}")
        if run.convergence:
            n_cav, n_mech = run.truncation.n_cav, run.truncation.n_mech
            ladder = [
                TruncationSpec(max(1, n_cav - 2), max(1, n_mech // 2)),
                TruncationSpec(max(1, n_cav - 1), max(1, 3 * n_mech // 4)),
                run.truncation,
            ]
            model = LindbladModel.from_working_point(wp, params, drives, run.n_th)
            table = convergence_sweep(model, ladder, run.settings)
            conv_path = path.with_name(f"{path.stem}.convergence.csv")
            written.append(_write(run, conv_path, write_convergence, table, {"converged": table.converged}))
    return written


def _run_nonlinear(run: ResolvedRun) -> list[Path]:
    written = []
    for phi, y, path in _curves(run):
        results = []
        for dp in run.delta_primes:
            params, wp, reference = _working_point(run, phi, y, dp)
            control = abs(reference.eps_c)
            _, _, drives = _working_point(replace(run, eps_p=run.drive_ratio * control), phi, y, dp)
            results.append(sideband_response(params, drives, settings=run.settings))
        extra = {**_derived(run, phi, y), "phi": phi, "y": y, "drive_ratio": run.drive_ratio}
        written.append(_write(run, path, write_sidebands, results, extra))
        worst = max(r.relative_deviation for r in results)
        console.print(f"Φ={phi:.4g}: largest sideband deviation from linear response {worst:.3g}")
        if run.series:
            series_path = path.with_name(f"{path.stem}.series.csv")
            first = results[0]
            written.append(_write(run, series_path, write_series, first.series, {"delta_prime": first.delta_prime}))
        if run.ratios:
            report = validate_linearity(
                run.params, run.G, phi, y, run.ratios, delta_prime=run.delta_primes[0], settings=run.settings
            )
            report_path = path.with_name(f"{path.stem}.validation.csv")
            written.append(_write(run, report_path, write_validation, report, {"monotone": report.monotone}))
    return written


def _run_classify(run: ResolvedRun) -> list[Path]:
    written = []
    for phi, y, path in _curves(run):
        params, wp, _ = _working_point(run, phi, y)
        report = classify_regime(wp, params.kappa, params.gamma_m, y, run.settings)
        table = Table(title=f"Regime at |G| = {abs(wp.G):.6g}, Φ = {phi:.4g}, y = {y:g}")
        table.add_column("quantity", style="cyan")
        table.add_column("value", style="green")
        rows = [(k, v) for k, v in asdict(report).items()]
        for key, value in rows:
            table.add_row(key, str(value))
        console.print(table)

        def flatten(value: Any) -> str:
            if isinstance(value, tuple):
                return ";".join(format(float(v), ".17g") for v in value)
            if value is None:
                return ""
            if isinstance(value, float):
                return format(value, ".17g")
            return str(value)

        write_csv(path, ("quantity", "value"), [(k, flatten(v)) for k, v in rows])
        write_sidecar(path, {"run": run.metadata(), "report": report, **_derived(run, phi, y)})
        written.append(path)
    return written


_DISPATCH = {
    "spectrum": _run_spectrum,
    "sweep-g": _run_sweep,
    "lindblad": _run_lindblad,
    "nonlinear-check": _run_nonlinear,
    "classify": _run_classify,
}


def run(config: RunConfig, catalog: PresetCatalog = DEFAULT_CATALOG) -> int:
    """Resolve, compute and write artifacts; return the process exit status."""
    try:
        resolved = resolve(config, catalog)
    except (ConfigError, InvalidParameters) as e:
        console.print(f"[red]Error: {e}[/red]")
        return EXIT_CONFIG

    logger.debug("Running {} with {}", resolved.mode, resolved.preset.name if resolved.preset else "custom parameters")
    try:
        written = _DISPATCH[resolved.mode](resolved)
    except OmitPhaseError as e:
        console.print(f"[red]Error ({type(e).__name__}): {e}[/red]")
        return EXIT_NUMERIC

    for path in written:
        console.print(f"[green]Wrote[/green] {path}")
    return EXIT_OK


def execute(config_path: str | None = None, **overrides: Any) -> int:
    """Load an optional YAML file, apply flag overrides and run."""
    try:
        base = RunConfig.from_file(config_path) if config_path else RunConfig()
        config = base.merged(**overrides)
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        return EXIT_CONFIG
    return run(config)
