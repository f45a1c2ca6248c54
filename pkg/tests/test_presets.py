# this_file: tests/test_presets.py
"""Test suite for the preset catalog."""

import math

import pytest

from omit_phase.errors import ConfigError, InvalidParameters, UnknownPreset
from omit_phase.lindblad import TruncationSpec
from omit_phase.presets import DEFAULT_CATALOG, Preset, PresetCatalog, default_presets
from omit_phase.response import response_exact


class TestCatalog:
    """Lookup behaviour."""

    def test_every_panel_present(self):
        assert len(DEFAULT_CATALOG) == 18
        expected = [f"fig2{s}" for s in "abcd"] + [f"fig3{s}" for s in "abcdef"]
        expected += [f"fig4{s}" for s in "abcdef"] + ["fig5a", "fig5b"]
        assert list(DEFAULT_CATALOG) == expected

    def test_contains(self):
        assert "fig4d" in DEFAULT_CATALOG
        assert "fig9" not in DEFAULT_CATALOG

    def test_unknown_name_suggests(self):
        with pytest.raises(UnknownPreset) as excinfo:
            DEFAULT_CATALOG["Fig2a"]
        assert excinfo.value.suggestions[0] == "fig2a"
        assert "did you mean" in str(excinfo.value)
        assert isinstance(excinfo.value, ConfigError)

    def test_duplicates_rejected(self):
        preset = DEFAULT_CATALOG["fig2a"]
        with pytest.raises(InvalidParameters):
            PresetCatalog([preset, preset])

    def test_custom_catalog(self):
        custom = Preset("mine", "-", "test", "spectrum", 0.1, (0.0,), 0.5)
        catalog = PresetCatalog([custom])
        assert catalog.list_presets() == [custom]

    @pytest.mark.parametrize("preset", default_presets(), ids=lambda p: p.name)
    def test_every_preset_validates(self, preset):
        preset.validate()


class TestPresetValues:
    """Selected panels against their published parameters."""

    def test_fig2c_resonant_transmission(self):
        params, wp, drives = DEFAULT_CATALOG["fig2c"].working_point()
        point = response_exact(wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, 0.0)
        assert point.T == pytest.approx(1.32120946, rel=1e-6)

    def test_fig4d_maximal_gain(self):
        params, wp, drives = DEFAULT_CATALOG["fig4d"].working_point()
        point = response_exact(wp, params.kappa, params.gamma_m, params.eta, drives.eps_p, drives.eps_a, 0.0)
        assert point.T == pytest.approx(1000.0, rel=1e-8)

    def test_fig3_narrow_grid(self):
        preset = DEFAULT_CATALOG["fig3a"]
        assert preset.grid == "narrow"
        assert preset.G == pytest.approx(5e-4)
        assert DEFAULT_CATALOG["fig3d"].grid == "wide"

    def test_sweep_presets_overlay_y(self):
        preset = DEFAULT_CATALOG["fig4b"]
        assert preset.mode == "sweep-g"
        assert preset.ys == (0.5, 1.0, 2.0)
        assert preset.phi == pytest.approx(math.pi)

    def test_thermal_presets(self):
        preset = DEFAULT_CATALOG["fig5a"]
        assert preset.mode == "lindblad"
        assert preset.n_th == 10.0
        assert preset.truncation_spec() == TruncationSpec(5, 50)
        assert DEFAULT_CATALOG["fig5b"].phis == pytest.approx((math.pi / 2, 3 * math.pi / 2))
        assert DEFAULT_CATALOG["fig2a"].truncation_spec() is None

    def test_working_point_overrides(self):
        params, wp, _ = DEFAULT_CATALOG["fig5a"].working_point(phi=math.pi, delta_prime=0.25)
        assert wp.phi_total == pytest.approx(math.pi, abs=1e-12)
        assert params.delta0 == pytest.approx(wp.delta0)

    def test_as_dict(self):
        data = DEFAULT_CATALOG["fig4a"].as_dict()
        assert data["name"] == "fig4a"
        assert data["ys"] == (0.5, 1.0, 2.0)
        assert data["eta"] == 1.0

    def test_empty_phases_rejected(self):
        with pytest.raises(InvalidParameters):
            Preset("broken", "-", "no phases", "spectrum", 0.1, (), 0.5).validate()
