"""Effective interspecies collision volume and trap energetics.

The density overlap of a Gaussian-ish cloud of size sigma_bar sitting
on an exponential-profile cloud of 1/e-length z reduces to a single
shape factor varsigma(sigma_bar/z), normalized so the overlap integral
becomes N1*N2/V_bar with V_bar = 8*pi*z^3 / varsigma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import erfcx

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Branch switch for varsigma. Above this the closed form is a difference
# of two almost-equal numbers and loses digits; the asymptotic series is
# already accurate to ~3e-8 relative here, and the two branches agree to
# the same level at the switch itself.
ASYMPTOTIC_SWITCH = 25.0


def _varsigma_closed(x: float) -> float:
    # e^{x^2/2} (x^2+1) erfc(x/sqrt(2)) - sqrt(2/pi) x, with the
    # exp*erfc pair fused into erfcx: the separate factors overflow and
    # cancel catastrophically beyond x ~ 8.
    return (x * x + 1.0) * float(erfcx(x / math.sqrt(2.0))) - _SQRT_2_OVER_PI * x


def _varsigma_asymptotic(x: float) -> float:
    # Large-x expansion: 2 sqrt(2/pi) x^-3 (1 - 6/x^2 + 45/x^4 - 420/x^6 + ...)
    inv2 = 1.0 / (x * x)
    series = 1.0 + inv2 * (-6.0 + inv2 * (45.0 - 420.0 * inv2))
    return 2.0 * _SQRT_2_OVER_PI * series / (x * x * x)


def varsigma(sigma_bar: float, z: float) -> float:
    """Overlap shape factor; 1 at sigma_bar = 0, falls off like x^-3."""
    if not z > 0.0:
        raise ValueError(f"z must be > 0, got {z}")
    if sigma_bar < 0.0:
        raise ValueError(f"sigma_bar must be >= 0, got {sigma_bar}")
    x = sigma_bar / z
    if x > ASYMPTOTIC_SWITCH:
        return _varsigma_asymptotic(x)
    return _varsigma_closed(x)


def varsigma_branch(sigma_bar: float, z: float) -> str:
    """Which formula varsigma used for these lengths."""
    if not z > 0.0:
        raise ValueError(f"z must be > 0, got {z}")
    return "asymptotic" if sigma_bar / z > ASYMPTOTIC_SWITCH else "closed-form"


def mt_volume(z: float) -> float:
    """Magnetic-trap reference volume 8*pi*z^3."""
    if not z > 0.0:
        raise ValueError(f"z must be > 0, got {z}")
    return 8.0 * math.pi * z**3


def effective_volume(sigma_bar: float, z: float) -> float:
    """Effective collision volume V_bar = mt_volume(z) / varsigma.

    Tends to the trap volume 8*pi*z^3 for sigma_bar << z and grows
    proportionally to sigma_bar^3 for sigma_bar >> z.
    """
    return mt_volume(z) / varsigma(sigma_bar, z)


def overlap_density_factor(n_cr: float, n_rb: float, v_bar: float) -> float:
    """The factor F = N_Cr*N_Rb/V_bar multiplying beta in the rate equations."""
    if not v_bar > 0.0:
        raise ValueError(f"v_bar must be > 0, got {v_bar}")
    if n_cr < 0.0 or n_rb < 0.0:
        raise ValueError("atom numbers must be >= 0")
    return n_cr * n_rb / v_bar


def magnetic_potential(moment: float, gradient: float, r: float) -> float:
    """Zeeman energy mu * B' * r along the coil axis of a linear quadrupole."""
    if moment < 0.0 or gradient < 0.0 or r < 0.0:
        raise ValueError("moment, gradient and r must all be >= 0")
    return moment * gradient * r


@dataclass(frozen=True)
class MtCloud:
    """Magnetically trapped cloud: exponential profile, 1/e-length z."""

    one_over_e_length: float   # m
    atom_number: float
    temperature: float         # K
    magnetic_moment: float     # J/T
    axial_gradient: float      # T/m

    def __post_init__(self):
        if not self.one_over_e_length > 0.0:
            raise ValueError("one_over_e_length must be > 0")
        if self.atom_number < 0.0:
            raise ValueError("atom_number must be >= 0")
        if not self.temperature > 0.0:
            raise ValueError("temperature must be > 0")
        if not self.axial_gradient > 0.0:
            raise ValueError("axial_gradient must be > 0")


@dataclass(frozen=True)
class MotCloud:
    """Magneto-optically trapped cloud: Gaussian, mean 1/sqrt(e)-size sigma_bar."""

    mean_size: float     # m
    atom_number: float
    temperature: float   # K

    def __post_init__(self):
        if not self.mean_size > 0.0:
            raise ValueError("mean_size must be > 0")
        if self.atom_number < 0.0:
            raise ValueError("atom_number must be >= 0")
        if not self.temperature > 0.0:
            raise ValueError("temperature must be > 0")
