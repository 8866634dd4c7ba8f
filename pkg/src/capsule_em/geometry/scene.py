"""Capsule, phantom and antenna scene description."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..materials import material_names
from .outline import (
    DipoleParams, GeometryError, LoopParams, PatchParams, WireDipoleParams, build_antenna_outline,
)

AntennaParams = DipoleParams | LoopParams | PatchParams | WireDipoleParams


@dataclass(frozen=True)
class CapsuleSpec:
    """Cylindrical capsule with hemispherical caps; all lengths in mm."""

    length: float = 32.0
    diameter: float = 12.0
    shell_thickness: float = 0.2
    shell_material: str = "PLA"
    filler_material: str = "PLA"

    def __post_init__(self):
        if not 0 < self.shell_thickness < self.diameter / 2:
            raise GeometryError(
                f"CapsuleSpec: shell_thickness must satisfy 0 < t < diameter/2 = {self.diameter / 2:g} mm"
                f" (got {self.shell_thickness:g})")
        if not self.length > self.diameter:
            raise GeometryError("CapsuleSpec: length must exceed diameter")
        for m in (self.shell_material, self.filler_material):
            _check_material(m)

    @property
    def outer_radius(self) -> float:
        return self.diameter / 2.0

    @property
    def inner_radius(self) -> float:
        return self.diameter / 2.0 - self.shell_thickness

    @property
    def straight_length(self) -> float:
        """Length of the cylindrical section between the caps."""
        return self.length - self.diameter


@dataclass(frozen=True)
class PortSpec:
    """Reference impedance of the lumped port (the feed follows the antenna outline)
    and an optional lossless series tuning inductor in front of it (nH)."""

    z0: float = 50.0
    series_inductance: float = 0.0  # nH

    def __post_init__(self):
        if not self.z0 > 0:
            raise GeometryError("PortSpec: z0 must be > 0")
        if self.series_inductance < 0:
            raise GeometryError("PortSpec: series_inductance must be >= 0")


# broadband: Cole-Cole properties evaluated at the run frequency
PHANTOM_VARIANTS = ("nominal", "measured", "broadband")


@dataclass(frozen=True)
class Scene:
    phantom_diameter: float = 100.0
    phantom_material: str = "GI_avg"
    phantom_variant: str = "nominal"
    capsule: CapsuleSpec = field(default_factory=CapsuleSpec)
    antenna: AntennaParams | None = None
    substrate_thickness: float = 100.0  # micrometres
    substrate_material: str = "substrate"
    port: PortSpec = field(default_factory=PortSpec)

    def __post_init__(self):
        _check_material(self.phantom_material)
        _check_material(self.substrate_material)
        if self.phantom_variant not in PHANTOM_VARIANTS:
            raise GeometryError(f"Scene: phantom_variant must be one of {PHANTOM_VARIANTS}")
        if not self.phantom_diameter > 0:
            raise GeometryError("Scene: phantom_diameter must be > 0")
        if self.substrate_thickness < 0:
            raise GeometryError("Scene: substrate_thickness must be >= 0")
        if self.capsule.length / 2.0 >= self.phantom_diameter / 2.0:
            raise GeometryError("Scene: capsule does not fit inside the phantom")
        if self.substrate_thickness * 1e-3 >= self.capsule.inner_radius:
            raise GeometryError("Scene: substrate thicker than the capsule interior")
        if self.antenna is not None:
            self.check_antenna_fits()

    @property
    def phantom_radius(self) -> float:
        return self.phantom_diameter / 2.0

    def outline(self):
        return None if self.antenna is None else build_antenna_outline(self.antenna)

    def check_antenna_fits(self) -> None:
        du, dv = self.outline().size
        circ = 2.0 * math.pi * self.capsule.inner_radius
        if du > circ + 1e-9:
            raise GeometryError(
                f"Scene: antenna width {du:g} mm exceeds the inner circumference {circ:.3f} mm")
        if dv > self.capsule.straight_length + 1e-9:
            raise GeometryError(
                f"Scene: antenna height {dv:g} mm exceeds the straight capsule section"
                f" {self.capsule.straight_length:g} mm")


def _check_material(name: str) -> None:
    if name not in material_names():
        raise GeometryError(f"unknown material '{name}'")
