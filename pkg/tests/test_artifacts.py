# this_file: tests/test_artifacts.py
"""Test suite for CSV artifacts and metadata sidecars."""

import json
import math

import numpy as np
import pytest

from omit_phase.artifacts import (
    SPECTRUM_HEADER,
    SWEEP_HEADER,
    fmt,
    sidecar_path,
    to_jsonable,
    write_csv,
    write_series,
    write_sidecar,
    write_spectrum,
    write_sweep,
)
from omit_phase.dynamics import MeanFieldSeries
from omit_phase.response import LinearityStatus, Method, compute_spectrum, log_coupling_grid, sweep_coupling


class TestFormatting:
    @pytest.mark.parametrize(
        ("value", "text"),
        [(0.1, "0.10000000000000001"), (1.0, "1"), (3, "3"), (np.int64(7), "7"), (None, ""), ("x", "x")],
    )
    def test_fmt(self, value, text):
        assert fmt(value) == text

    def test_fmt_round_trips(self):
        value = 1.0 / 3.0
        assert float(fmt(value)) == value


class TestCsv:
    """Byte-level layout of the CSV files."""

    def test_lf_line_endings(self, tmp_path):
        path = write_csv(tmp_path / "sub" / "t.csv", ("a", "b"), [(1.0, 2.5), (0.1, -3)])
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw == b"a,b\n1,2.5\n0.10000000000000001,-3\n"

    def test_spectrum_header_and_rows(self, tmp_path, fig2_phi0):
        params, wp, drives = fig2_phi0
        spectrum = compute_spectrum(wp, [-0.5, 0.0, 0.5], Method.EXACT, params=params, drives=drives)
        path = write_spectrum(tmp_path / "s.csv", spectrum)
        lines = path.read_text().splitlines()
        assert tuple(lines[0].split(",")) == SPECTRUM_HEADER
        assert len(lines) == 4
        middle = [float(v) for v in lines[2].split(",")]
        assert middle[0] == 0.0
        assert middle[1] == pytest.approx(0.14988775, abs=1e-8)
        assert middle[5] == pytest.approx(0.72269084, abs=1e-8)

    def test_identical_runs_identical_bytes(self, tmp_path, fig2_phi0):
        params, wp, drives = fig2_phi0
        spectrum = compute_spectrum(wp, np.linspace(-1.0, 1.0, 11), Method.EXACT, params=params, drives=drives)
        first = write_spectrum(tmp_path / "a.csv", spectrum).read_bytes()
        second = write_spectrum(tmp_path / "b.csv", spectrum).read_bytes()
        assert first == second

    def test_sweep(self, tmp_path):
        grid = log_coupling_grid(1e-4, 1.0, 5)
        sweep = sweep_coupling(grid, kappa=1.0, gamma_m=1e-3, eta=1.0, y=1.0, phi_total=math.pi)
        lines = write_sweep(tmp_path / "g.csv", sweep).read_text().splitlines()
        assert tuple(lines[0].split(",")) == SWEEP_HEADER
        assert len(lines) == 6

    def test_series(self, tmp_path):
        series = MeanFieldSeries(np.array([0.0, 1.0]), np.array([1 + 2j, 3 - 4j]), np.array([0j, 1j]))
        lines = write_series(tmp_path / "t.csv", series).read_text().splitlines()
        assert lines[1:] == ["0,1,2,0,0", "1,3,-4,0,1"]


class TestSidecar:
    """JSON metadata next to each artifact."""

    def test_path(self, tmp_path):
        assert sidecar_path(tmp_path / "fig2a.csv") == tmp_path / "fig2a.csv.meta.json"

    def test_contents(self, tmp_path, fig2_phi0):
        _, wp, _ = fig2_phi0
        target = write_sidecar(
            tmp_path / "x.csv", {"working_point": wp, "status": LinearityStatus.WARN, "value": math.inf}
        )
        data = json.loads(target.read_text())
        assert data["status"] == "warn"
        assert data["value"] == "inf"
        re, im = data["working_point"]["c_s"]
        assert complex(re, im) == pytest.approx(wp.c_s)
        assert data["working_point"]["stable"] is True

    def test_to_jsonable(self):
        assert to_jsonable(1 + 2j) == [1.0, 2.0]
        assert to_jsonable(np.array([1j])) == [[0.0, 1.0]]
        assert to_jsonable((np.float64(0.5), np.bool_(True))) == [0.5, True]
        assert to_jsonable({1: math.nan}) == {"1": "nan"}
