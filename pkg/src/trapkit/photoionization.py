"""Excited-state population and photoionization loss channel.

The chain is: saturation parameter s -> excited fraction rho_ee ->
ionization rate per excited atom Gamma_if = sigma_p * Phi -> one-body
loss rate gamma_p = Gamma_if * rho_ee. Plus the kinematics of the
ejected photoelectron.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import BelowThresholdFlag
from .units import EV, M_E, photon_energy


@dataclass(frozen=True)
class TransitionSpec:
    """Constants of the driven optical transition.

    natural_linewidth is angular (rad/s). clebsch_gordan_sq is the
    line-strength-averaged squared Clebsch-Gordan coefficient.
    excited_state_ionization_energy is the energy needed to ionize out
    of the excited state, in J.
    """

    natural_linewidth: float
    saturation_intensity: float
    clebsch_gordan_sq: float
    transition_wavelength: float
    excited_state_ionization_energy: float

    def __post_init__(self):
        if not self.natural_linewidth > 0.0:
            raise ValueError("natural_linewidth must be > 0")
        if not self.saturation_intensity > 0.0:
            raise ValueError("saturation_intensity must be > 0")
        if not 0.0 < self.clebsch_gordan_sq <= 1.0:
            raise ValueError("clebsch_gordan_sq must be in (0, 1]")
        if not self.transition_wavelength > 0.0:
            raise ValueError("transition_wavelength must be > 0")
        if not self.excited_state_ionization_energy > 0.0:
            raise ValueError("excited_state_ionization_energy must be > 0")


# Rb D2 line defaults: linewidth 2*pi*6.07 MHz, I_s = 1.6 mW/cm^2,
# averaged CG weight 7/15, ionization threshold of the 5P state 2.6 eV.
RB_D2 = TransitionSpec(
    natural_linewidth=2.0 * math.pi * 6.07e6,  # rad/s
    saturation_intensity=16.0,                 # W/m^2
    clebsch_gordan_sq=7.0 / 15.0,
    transition_wavelength=780e-9,              # m
    excited_state_ionization_energy=2.6 * EV,  # J
)


@dataclass(frozen=True)
class LightField:
    """One laser configuration: total intensity, detuning, wavelength.

    detuning is in rad/s. Only its square enters the saturation
    parameter, so it may be given signed or as a magnitude.
    """

    total_intensity: float
    detuning: float
    wavelength: float

    def __post_init__(self):
        if not self.total_intensity >= 0.0:
            raise ValueError("total_intensity must be >= 0")
        if not math.isfinite(self.detuning):
            raise ValueError("detuning must be finite")
        if not self.wavelength > 0.0:
            raise ValueError("wavelength must be > 0")


@dataclass(frozen=True)
class IonizationChannel:
    """Ionizing light acting on the excited state of `transition`.

    A channel whose photon energy is below threshold is constructible;
    it just produces zero rate (with a flag). That models a detuned or
    wrong-color beam, not a programming error.
    """

    cross_section: float
    ionizing_wavelength: float
    transition: TransitionSpec

    def __post_init__(self):
        if not self.cross_section >= 0.0:
            raise ValueError("cross_section must be >= 0")
        if not self.ionizing_wavelength > 0.0:
            raise ValueError("ionizing_wavelength must be > 0")


def saturation_parameter(field: LightField, spec: TransitionSpec) -> float:
    """s = <C>^2 (I/I_s) / (1 + (2 delta/Gamma)^2)."""
    ratio = 2.0 * field.detuning / spec.natural_linewidth
    return (
        spec.clebsch_gordan_sq
        * (field.total_intensity / spec.saturation_intensity)
        / (1.0 + ratio * ratio)
    )


def excited_fraction(s: float) -> float:
    """Steady-state excited-state population rho_ee = s / (2(s+1)).

    Monotone in s, 0 at s = 0, supremum 1/2 at full saturation.
    """
    if s < 0.0:
        raise ValueError(f"saturation parameter must be >= 0, got {s}")
    return s / (2.0 * (s + 1.0))


def photon_flux(intensity: float, wavelength: float) -> float:
    """Photon flux Phi = I / (h c / lambda) in photons/(m^2 s)."""
    if intensity < 0.0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    return intensity / photon_energy(wavelength)


def ionization_rate(channel: IonizationChannel, flux: float) -> float:
    """Per-excited-atom ionization rate sigma_p * Phi, in 1/s.

    Returns 0 and warns BelowThresholdFlag when the photon energy does
    not exceed the ionization threshold of the excited state: the
    channel is energetically closed, not broken.
    """
    if flux < 0.0:
        raise ValueError(f"photon flux must be >= 0, got {flux}")
    e_photon = photon_energy(channel.ionizing_wavelength)
    e_ion = channel.transition.excited_state_ionization_energy
    if e_photon <= e_ion:
        warnings.warn(
            f"photon energy {e_photon / EV:.3f} eV <= ionization threshold "
            f"{e_ion / EV:.3f} eV; channel closed, rate = 0",
            BelowThresholdFlag,
            stacklevel=2,
        )
        return 0.0
    return channel.cross_section * flux


def ionization_loss_rate(gamma_if: float, rho_ee: float) -> float:
    """One-body loss rate gamma_p = Gamma_if * rho_ee."""
    if gamma_if < 0.0:
        raise ValueError(f"ionization rate must be >= 0, got {gamma_if}")
    if not 0.0 <= rho_ee < 0.5:
        raise ValueError(f"excited fraction must be in [0, 1/2), got {rho_ee}")
    return gamma_if * rho_ee


def photoelectron_velocity(ionizing_wavelength: float, e_ion: float, ion_mass: float) -> float:
    """Speed of the photoelectron after ionizing the excited state.

    The pair starts essentially at rest, so electron and ion leave with
    equal and opposite momenta and the excess energy E_photon - E_ion
    splits with the electron taking the fraction m_ion/(m_ion + m_e).
    """
    if not ion_mass > 0.0:
        raise ValueError("ion_mass must be > 0")
    if not e_ion > 0.0:
        raise ValueError("e_ion must be > 0")
    excess = photon_energy(ionizing_wavelength) - e_ion
    if excess <= 0.0:
        raise ValueError(
            f"photon energy must exceed the ionization threshold; "
            f"excess was {excess / EV:.3e} eV"
        )
    fraction = ion_mass / (ion_mass + M_E)
    return math.sqrt(2.0 * excess * fraction / M_E)


def mot_suppression_factor(gamma_rb: float, gamma_p: float) -> float:
    """Steady-state atom-number suppression (gamma_rb + gamma_p)/gamma_rb.

    With loading unchanged, the steady state of the one-body rate
    equation scales as 1/gamma, so this is the factor by which the
    trapped number drops when the ionization channel is on.
    """
    if not gamma_rb > 0.0:
        raise ValueError("gamma_rb must be > 0")
    if gamma_p < 0.0:
        raise ValueError("gamma_p must be >= 0")
    return (gamma_rb + gamma_p) / gamma_rb
