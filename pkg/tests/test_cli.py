# this_file: tests/test_cli.py
"""Test suite for omit_phase CLI."""

from unittest.mock import patch

import pytest
from rich.table import Table

from omit_phase import __version__
from omit_phase.cli import CLI, main


class TestCLI:
    """Test suite for the CLI class."""

    @pytest.fixture
    def cli(self, tmp_path):
        """Create a CLI instance writing into a temporary directory."""
        return CLI(output_dir=str(tmp_path))

    @pytest.fixture
    def mock_execute(self):
        """Mock the run entry point."""
        with patch("omit_phase.cli.execute", return_value=0) as mock:
            yield mock

    @pytest.fixture
    def mock_console(self):
        with patch("omit_phase.cli.console") as mock:
            yield mock

    def test_output_dir(self, cli, tmp_path):
        assert cli._settings.output_dir == str(tmp_path)

    def test_output_dir_from_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("OMIT_PHASE_OUTPUT_DIR", str(tmp_path / "env"))
        assert CLI()._settings.output_dir == str(tmp_path / "env")

    def test_spectrum_forwards_flags(self, cli, mock_execute):
        cli.spectrum(preset="fig2c", points=11, phi="pi")
        mock_execute.assert_called_once()
        args, kwargs = mock_execute.call_args
        assert args == (None,)
        assert kwargs["mode"] == "spectrum"
        assert kwargs["preset"] == "fig2c"
        assert kwargs["points"] == 11
        assert kwargs["phi"] == "pi"
        assert kwargs["G"] is None
        assert kwargs["settings"] is cli._settings

    def test_config_file_is_passed_through(self, cli, mock_execute):
        cli.lindblad(config="run.yaml", nth=10.0)
        args, kwargs = mock_execute.call_args
        assert args == ("run.yaml",)
        assert kwargs["mode"] == "lindblad"
        assert kwargs["nth"] == 10.0

    @pytest.mark.parametrize("code", [2, 3])
    def test_failure_exits_with_status(self, cli, code):
        with patch("omit_phase.cli.execute", return_value=code):
            with pytest.raises(SystemExit) as excinfo:
                cli.classify(preset="fig2a")
        assert excinfo.value.code == code

    def test_run_takes_mode_from_flags(self, cli, mock_execute):
        cli.run("run.yaml", mode="sweep-g", g_points=10)
        args, kwargs = mock_execute.call_args
        assert args == ("run.yaml",)
        assert kwargs["mode"] == "sweep-g"
        assert kwargs["g_points"] == 10

    def test_run_without_mode(self, cli, mock_execute):
        cli.run("run.yaml")
        assert mock_execute.call_args.kwargs["mode"] is None

    def test_nonlinear_check(self, cli, mock_execute):
        cli.nonlinear_check(delta_primes="-0.5,0.5", ratios="1e-3,1e-2")
        kwargs = mock_execute.call_args.kwargs
        assert kwargs["mode"] == "nonlinear-check"
        assert kwargs["delta_primes"] == "-0.5,0.5"

    def test_presets_json(self, cli, mock_console):
        cli.presets(json_output=True)
        mock_console.print_json.assert_called_once()
        data = mock_console.print_json.call_args.kwargs["data"]
        assert len(data) == 18
        assert data[0]["name"] == "fig2a"

    def test_presets_table(self, cli, mock_console):
        cli.presets()
        table = mock_console.print.call_args.args[0]
        assert isinstance(table, Table)
        assert table.row_count == 18

    def test_version(self, cli, mock_console):
        cli.version()
        mock_console.print.assert_called_once()
        assert __version__ in mock_console.print.call_args.args[0]

    def test_spectrum_end_to_end(self, cli, tmp_path):
        cli.spectrum(preset="fig2a", points=5)
        assert (tmp_path / "fig2a.csv").exists()
        assert (tmp_path / "fig2a.csv.meta.json").exists()

    def test_bad_preset_exits_with_config_status(self, cli):
        with pytest.raises(SystemExit) as excinfo:
            cli.spectrum(preset="nope")
        assert excinfo.value.code == 2


def test_main_uses_fire():
    with patch("omit_phase.cli.fire.Fire") as fire:
        main()
    fire.assert_called_once_with(CLI)
