# this_file: src/omit_phase/artifacts.py
"""CSV artifacts and their JSON metadata sidecars.

Floats are written with 17 significant digits, rows end in a bare LF, and
nothing time- or host-dependent goes into a CSV, so identical runs produce
identical files.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
from loguru import logger

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from omit_phase.dynamics import LinearityReport, MeanFieldSeries, SidebandResponse
    from omit_phase.lindblad import ConvergenceTable, SpectrumComparison
    from omit_phase.response import CouplingSweep, Spectrum

SPECTRUM_HEADER = ("delta_prime", "re_epsT", "im_epsT", "re_scriptT", "im_scriptT", "T")
SWEEP_HEADER = ("G", "re_epsT", "im_epsT", "re_scriptT", "im_scriptT", "T")
LINDBLAD_HEADER = ("delta_prime", "re_epsT_num", "im_epsT_num", "re_epsT_ana", "im_epsT_ana", "abs_err")
CONVERGENCE_HEADER = ("n_cav", "n_mech", "re_c", "im_c", "difference")
SERIES_HEADER = ("t", "re_c", "im_c", "re_b", "im_b")
VALIDATION_HEADER = ("eps_p_over_eps_c", "margin", "rel_deviation")
SIDEBAND_HEADER = (
    "delta_prime",
    "re_epsT_nl",
    "im_epsT_nl",
    "re_epsT_ana",
    "im_epsT_ana",
    "rel_deviation",
    "rwa_deviation",
    "counter_rotating_ratio",
)


def fmt(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int | np.integer) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    logger.debug("Wrote {} rows to {}", count, path)
    return path


def spectrum_rows(spectrum: Spectrum) -> list[tuple[float, ...]]:
    return [
        (p.delta_prime, p.eps_T.real, p.eps_T.imag, p.script_T.real, p.script_T.imag, p.T) for p in spectrum.points
    ]


def write_spectrum(path: str | Path, spectrum: Spectrum) -> Path:
    return write_csv(path, SPECTRUM_HEADER, spectrum_rows(spectrum))


def write_sweep(path: str | Path, sweep: CouplingSweep) -> Path:
    rows = (
        (float(g), p.eps_T.real, p.eps_T.imag, p.script_T.real, p.script_T.imag, p.T)
        for g, p in zip(sweep.G, sweep.points, strict=True)
    )
    return write_csv(path, SWEEP_HEADER, rows)


def write_comparison(path: str | Path, comparison: SpectrumComparison) -> Path:
    rows = (
        (
            r.delta_prime,
            r.eps_T_numeric.real,
            r.eps_T_numeric.imag,
            r.eps_T_analytic.real,
            r.eps_T_analytic.imag,
            r.abs_err,
        )
        for r in comparison.rows
    )
    return write_csv(path, LINDBLAD_HEADER, rows)


def write_convergence(path: str | Path, table: ConvergenceTable) -> Path:
    rows = (
        (r.truncation.n_cav, r.truncation.n_mech, r.cavity_mean.real, r.cavity_mean.imag, r.difference)
        for r in table.rows
    )
    return write_csv(path, CONVERGENCE_HEADER, rows)


def write_series(path: str | Path, series: MeanFieldSeries) -> Path:
    rows = zip(series.t, series.c.real, series.c.imag, series.b.real, series.b.imag, strict=True)
    return write_csv(path, SERIES_HEADER, rows)


def write_validation(path: str | Path, report: LinearityReport) -> Path:
    rows = ((r.eps_p_over_eps_c, r.margin, r.rel_deviation) for r in report.rows)
    return write_csv(path, VALIDATION_HEADER, rows)


def write_sidebands(path: str | Path, results: Sequence[SidebandResponse]) -> Path:
    rows = (
        (
            r.delta_prime,
            r.eps_T_nonlinear.real,
            r.eps_T_nonlinear.imag,
            r.eps_T_analytic.real,
            r.eps_T_analytic.imag,
            r.relative_deviation,
            r.rwa_deviation,
            r.fit.counter_rotating_ratio,
        )
        for r in results
    )
    return write_csv(path, SIDEBAND_HEADER, rows)


def to_jsonable(value: Any) -> Any:
    """Dataclasses, enums, numpy scalars and complex numbers as plain JSON values.

    Complex numbers become ``[re, im]``; non-finite floats become strings.
    """
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, complex | np.complexfloating):
        return [to_jsonable(float(value.real)), to_jsonable(float(value.imag))]
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_sidecar(path: str | Path, metadata: dict[str, Any]) -> Path:
    """Write ``<path>.meta.json`` next to an artifact."""
    target = sidecar_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(to_jsonable(metadata), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Wrote metadata {}", target)
    return target
