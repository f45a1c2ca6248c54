# this_file: src/omit_phase/presets.py
"""Named parameter sets for each published figure panel."""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

from omit_phase.errors import InvalidParameters, UnknownPreset
from omit_phase.lindblad import TruncationSpec
from omit_phase.model import DriveSet, SystemParams, WorkingPoint, working_point_from_G

Mode = Literal["spectrum", "sweep-g", "lindblad"]
GridKind = Literal["wide", "narrow"]

PI = math.pi
GAMMA_M = 1e-3


@dataclass(frozen=True)
class Preset:
    """One figure panel: device, working point and what to compute.

    ``phis`` and ``ys`` list several values for panels that overlay curves.
    All working points sit on the red sideband, Δ = ω_m.
    """

    name: str
    figure: str
    description: str
    mode: Mode
    G: float
    phis: tuple[float, ...]
    eta: float
    ys: tuple[float, ...] = (1.0,)
    gamma_m: float = GAMMA_M
    omega_m: float = 10.0
    g0: float = 1e-3
    eps_p: float = 1.0 / 30.0
    grid: GridKind = "wide"
    n_th: float = 0.0
    truncation: tuple[int, int] | None = None
    resolved_sideband_limit: bool = False
    g_range: tuple[float, float] = field(default=(1e-5, 10.0))

    @property
    def phi(self) -> float:
        return self.phis[0]

    @property
    def y(self) -> float:
        return self.ys[0]

    def params(self) -> SystemParams:
        return SystemParams(gamma_m=self.gamma_m, omega_m=self.omega_m, g0=self.g0, eta=self.eta)

    def truncation_spec(self) -> TruncationSpec | None:
        return None if self.truncation is None else TruncationSpec(*self.truncation)

    def working_point(
        self,
        *,
        phi: float | None = None,
        y: float | None = None,
        delta_prime: float = 0.0,
    ) -> tuple[SystemParams, WorkingPoint, DriveSet]:
        """Resolved parameters (with Δ0), working point and drives for one curve."""
        params = self.params()
        wp, drives = working_point_from_G(
            params,
            self.G,
            params.omega_m,
            self.y if y is None else y,
            self.phi if phi is None else phi,
            self.eps_p,
            delta_prime=delta_prime,
            resolved_sideband_limit=self.resolved_sideband_limit,
        )
        return params.with_delta0(wp.delta0), wp, drives

    def validate(self) -> None:
        """Round-trip every curve of the preset through the model constructors."""
        if not self.phis or not self.ys:
            msg = f"preset {self.name} needs at least one phase and one amplitude ratio"
            raise InvalidParameters(msg)
        self.truncation_spec()
        for phi in self.phis:
            for y in self.ys:
                self.working_point(phi=phi, y=y)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


def _fig2(suffix: str, phi: float, label: str) -> Preset:
    return Preset(
        name=f"fig2{suffix}",
        figure=f"Fig. 2({suffix})",
        description=f"GWI-like spectrum, |G| = kappa/3, Phi = {label}",
        mode="spectrum",
        G=1.0 / 3.0,
        phis=(phi,),
        eta=0.05,
    )


def _fig3(suffix: str, phi: float, G: float, grid: GridKind, label: str) -> Preset:
    return Preset(
        name=f"fig3{suffix}",
        figure=f"Fig. 3({suffix})",
        description=f"weak-control spectrum, {label}, {grid} grid",
        mode="spectrum",
        G=G,
        phis=(phi,),
        eta=0.05,
        grid=grid,
    )


def _fig4(suffix: str, phi: float, G: float, label: str) -> Preset:
    return Preset(
        name=f"fig4{suffix}",
        figure=f"Fig. 4({suffix})",
        description=f"over-coupled spectrum, eta = 1, {label}",
        mode="spectrum",
        G=G,
        phis=(phi,),
        eta=1.0,
    )


def default_presets() -> list[Preset]:
    max_gain = math.sqrt(GAMMA_M) / 2.0
    return [
        _fig2("a", 0.0, "0"),
        _fig2("b", PI / 2, "pi/2"),
        _fig2("c", PI, "pi"),
        _fig2("d", 3 * PI / 2, "3pi/2"),
        _fig3("a", 0.0, GAMMA_M / 2, "narrow", "Phi = 0, |G| = gamma_m/2"),
        _fig3("b", PI, GAMMA_M / 2, "narrow", "Phi = pi, |G| = gamma_m/2"),
        _fig3("c", PI, GAMMA_M, "narrow", "Phi = pi, |G| = gamma_m"),
        _fig3("d", 0.0, GAMMA_M / 2, "wide", "Phi = 0, |G| = gamma_m/2"),
        _fig3("e", PI, GAMMA_M / 2, "wide", "Phi = pi, |G| = gamma_m/2"),
        _fig3("f", PI, GAMMA_M, "wide", "Phi = pi, |G| = gamma_m"),
        Preset(
            name="fig4a",
            figure="Fig. 4(a)",
            description="T(delta_prime = 0) versus |G| at Phi = 0 for several y",
            mode="sweep-g",
            G=max_gain,
            phis=(0.0,),
            eta=1.0,
            ys=(0.5, 1.0, 2.0),
        ),
        Preset(
            name="fig4b",
            figure="Fig. 4(b)",
            description="T(delta_prime = 0) versus |G| at Phi = pi for several y",
            mode="sweep-g",
            G=max_gain,
            phis=(PI,),
            eta=1.0,
            ys=(0.5, 1.0, 2.0),
        ),
        _fig4("c", 0.0, max_gain, "Phi = 0, |G| = sqrt(kappa gamma_m)/2"),
        _fig4("d", PI, max_gain, "Phi = pi, maximal gain |G| = sqrt(kappa gamma_m)/2"),
        _fig4("e", 0.0, 1.0, "Phi = 0, perfect absorption |G| = kappa"),
        _fig4("f", PI, GAMMA_M / 4, "Phi = pi, perfect absorption |G| = gamma_m/4"),
        Preset(
            name="fig5a",
            figure="Fig. 5(a)",
            description="master equation versus linear response, Phi = 0 and pi, N_th = 10",
            mode="lindblad",
            G=1.0 / 3.0,
            phis=(0.0, PI),
            eta=0.05,
            n_th=10.0,
            truncation=(5, 50),
        ),
        Preset(
            name="fig5b",
            figure="Fig. 5(b)",
            description="master equation versus linear response, Phi = pi/2 and 3pi/2, N_th = 10",
            mode="lindblad",
            G=1.0 / 3.0,
            phis=(PI / 2, 3 * PI / 2),
            eta=0.05,
            n_th=10.0,
            truncation=(5, 50),
        ),
    ]


class PresetCatalog(Mapping[str, Preset]):
    """Read-only name → preset lookup with close-match suggestions on misses."""

    def __init__(self, presets: Iterable[Preset] | None = None):
        self._presets: dict[str, Preset] = {}
        for preset in default_presets() if presets is None else presets:
            if preset.name in self._presets:
                msg = f"duplicate preset name {preset.name!r}"
                raise InvalidParameters(msg)
            self._presets[preset.name] = preset

    def __getitem__(self, name: str) -> Preset:
        try:
            return self._presets[name]
        except KeyError:
            raise UnknownPreset(name, self._presets) from None

    def __contains__(self, name: object) -> bool:
        return name in self._presets

    def __iter__(self) -> Iterator[str]:
        return iter(self._presets)

    def __len__(self) -> int:
        return len(self._presets)

    def list_presets(self) -> list[Preset]:
        return list(self._presets.values())


DEFAULT_CATALOG = PresetCatalog()
