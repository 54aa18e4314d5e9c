"""Physical constants and unit conversions.

Everything downstream computes in SI. Interfaces (configs, CLI flags,
reports) speak the lab units the quantities are usually quoted in:
mW/cm^2, G/cm, uK, nm, eV. Conversions happen here and only here.

Constant values are CODATA 2018, hard-coded on purpose: importing them
from a library would silently track whatever CODATA vintage the
installed version ships, and reproducibility across environments
matters more than the 9th digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnitError


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values, SI."""

    boltzmann_k: float = 1.380649e-23        # J/K (exact)
    planck_h: float = 6.62607015e-34         # J*s (exact)
    hbar: float = 1.054571817e-34            # J*s
    bohr_magneton: float = 9.2740100783e-24  # J/T
    electron_mass: float = 9.1093837015e-31  # kg
    atomic_mass_unit: float = 1.66053906660e-27  # kg
    speed_of_light: float = 299792458.0      # m/s (exact)
    electron_volt: float = 1.602176634e-19   # J (exact)

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"constant {name} must be positive and finite")


CONSTANTS = Constants()

# Module-level shortcuts; these are what the physics modules import.
KB = CONSTANTS.boltzmann_k
H = CONSTANTS.planck_h
HBAR = CONSTANTS.hbar
MU_B = CONSTANTS.bohr_magneton
M_E = CONSTANTS.electron_mass
AMU = CONSTANTS.atomic_mass_unit
C = CONSTANTS.speed_of_light
EV = CONSTANTS.electron_volt

# Species masses by mass number. The derived quantities of interest
# (energy partition, mean speeds) are quoted to two digits, so integer
# mass numbers are the convention used throughout.
MASS_CR = 52 * AMU   # kg, 52Cr
MASS_RB = 87 * AMU   # kg, 87Rb

# unit string -> multiplier to SI, grouped by tag
_LENGTH_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9}

UNIT_TAGS: dict[str, dict[str, float]] = {
    "intensity": {"W/m^2": 1.0, "mW/cm^2": 10.0},
    "field_gradient": {"T/m": 1.0, "G/cm": 1e-2},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6},
    "length": dict(_LENGTH_UNITS),
    "wavelength": dict(_LENGTH_UNITS),
    "energy": {"J": 1.0, "eV": EV},
    "rate": {"1/s": 1.0, "/s": 1.0, "atoms/s": 1.0},
    "volume": {"m^3": 1.0, "cm^3": 1e-6, "mm^3": 1e-9},
    "loss_coefficient": {"m^3/s": 1.0, "cm^3/s": 1e-6},
    "time": {"s": 1.0, "ms": 1e-3},
    "count": {"atoms": 1.0},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6},
    "detuning": {"rad/s": 1.0},
}


def infer_tag(unit: str) -> str:
    """Tag for a unit string; rejects unknown and ambiguous units."""
    matches = [tag for tag, units in UNIT_TAGS.items() if unit in units]
    if not matches:
        raise UnitError(f"unknown unit {unit!r}")
    if len(matches) > 1:
        raise UnitError(
            f"unit {unit!r} is ambiguous between tags {matches}; pass an explicit tag"
        )
    return matches[0]


def to_si(value: float, unit: str, tag: str | None = None) -> float:
    """Convert value in `unit` to SI. `tag` resolves ambiguous units."""
    if tag is None:
        tag = infer_tag(unit)
    try:
        units = UNIT_TAGS[tag]
    except KeyError:
        raise UnitError(f"unknown unit tag {tag!r}") from None
    if unit not in units:
        raise UnitError(f"unit {unit!r} is not a {tag} unit; expected one of {sorted(units)}")
    return value * units[unit]


def from_si(value_si: float, unit: str, tag: str | None = None) -> float:
    """Inverse of to_si."""
    if tag is None:
        tag = infer_tag(unit)
    if tag not in UNIT_TAGS:
        raise UnitError(f"unknown unit tag {tag!r}")
    if unit not in UNIT_TAGS[tag]:
        raise UnitError(f"unit {unit!r} is not a {tag} unit")
    return value_si / UNIT_TAGS[tag][unit]


@dataclass(frozen=True)
class Quantity:
    """A value with a unit, pinned to one unit tag.

    Arithmetic is deliberately minimal: add/subtract within a tag,
    scale by plain numbers. This is bookkeeping, not a units engine.
    """

    value: float
    unit: str
    tag: str = field(default="")

    def __post_init__(self):
        tag = self.tag or infer_tag(self.unit)
        if tag not in UNIT_TAGS:
            raise UnitError(f"unknown unit tag {tag!r}")
        if self.unit not in UNIT_TAGS[tag]:
            raise UnitError(f"unit {self.unit!r} is not a {tag} unit")
        object.__setattr__(self, "tag", tag)

    @property
    def si(self) -> float:
        return to_si(self.value, self.unit, self.tag)

    def to(self, unit: str) -> "Quantity":
        return Quantity(from_si(self.si, unit, self.tag), unit, self.tag)

    def _check_tag(self, other: "Quantity"):
        if not isinstance(other, Quantity):
            raise UnitError(f"cannot combine Quantity with {type(other).__name__}")
        if other.tag != self.tag:
            raise UnitError(f"incompatible unit tags {self.tag!r} and {other.tag!r}")

    def __add__(self, other: "Quantity") -> "Quantity":
        self._check_tag(other)
        return Quantity(from_si(self.si + other.si, self.unit, self.tag), self.unit, self.tag)

    def __sub__(self, other: "Quantity") -> "Quantity":
        self._check_tag(other)
        return Quantity(from_si(self.si - other.si, self.unit, self.tag), self.unit, self.tag)

    def __mul__(self, scalar) -> "Quantity":
        if isinstance(scalar, Quantity):
            raise UnitError("Quantity*Quantity is not supported; work in SI floats")
        return Quantity(self.value * scalar, self.unit, self.tag)

    __rmul__ = __mul__


def intensity_to_si(i_mw_cm2: float) -> float:
    """mW/cm^2 -> W/m^2 (factor 10)."""
    if not math.isfinite(i_mw_cm2) or i_mw_cm2 < 0.0:
        raise ValueError(f"intensity must be finite and >= 0, got {i_mw_cm2}")
    return i_mw_cm2 * 10.0


def gradient_to_si(g_g_cm: float) -> float:
    """G/cm -> T/m (factor 1e-2)."""
    if not math.isfinite(g_g_cm):
        raise ValueError(f"field gradient must be finite, got {g_g_cm}")
    return g_g_cm * 1e-2


def photon_energy(wavelength: float) -> float:
    """Photon energy h*c/lambda in J for wavelength in m."""
    if not (wavelength > 0.0 and math.isfinite(wavelength)):
        raise ValueError(f"wavelength must be positive and finite, got {wavelength}")
    return H * C / wavelength
