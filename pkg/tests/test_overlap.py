"""Overlap shape factor against an arbitrary-precision oracle.

The oracle restates the exact expression with mpmath at 60 digits. It
must use erfc directly; 1 - erf underflows to 0 past x ~ 20 and would
silently validate garbage.
"""

import math

import mpmath as mp
import numpy as np
import pytest

from trapkit import (
    KB,
    MU_B,
    MotCloud,
    MtCloud,
    effective_volume,
    magnetic_potential,
    mt_volume,
    overlap_density_factor,
    varsigma,
    varsigma_branch,
)
from trapkit.overlap import ASYMPTOTIC_SWITCH, _varsigma_asymptotic, _varsigma_closed

mp.mp.dps = 60


def _oracle(x: float) -> float:
    x = mp.mpf(x)
    exact = (x * x + 1) * mp.exp(x * x / 2) * mp.erfc(x / mp.sqrt(2)) \
        - mp.sqrt(2 / mp.pi) * x
    return float(exact)


def test_varsigma_is_one_at_zero():
    assert varsigma(0.0, 1.0) == 1.0


def test_varsigma_strictly_decreasing_across_both_branches():
    ratios = np.linspace(0.0, 30.0, 100)
    values = [varsigma(r, 1.0) for r in ratios]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_varsigma_matches_oracle_on_closed_branch():
    for x in (0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 25.0):
        assert varsigma(x, 1.0) == pytest.approx(_oracle(x), rel=1e-9), x


def test_varsigma_matches_oracle_on_asymptotic_branch():
    for x in (25.5, 30.0, 50.0, 100.0):
        assert varsigma(x, 1.0) == pytest.approx(_oracle(x), rel=1e-6), x


def test_varsigma_known_values():
    assert varsigma(1.0, 1.0) == pytest.approx(0.24842860665762813, rel=1e-12)
    assert varsigma(1e-3, 1e-3) == pytest.approx(0.24842860665762813, rel=1e-12)
    # leading asymptotic term 2 sqrt(2/pi) x^-3 is a 1%-level statement at x = 30
    lead = 2.0 * math.sqrt(2.0 / math.pi) / 30.0**3
    assert varsigma(30.0, 1.0) == pytest.approx(lead, rel=1e-2)


def test_branch_continuity_at_the_switch():
    x = ASYMPTOTIC_SWITCH
    jump = abs(_varsigma_closed(x) - _varsigma_asymptotic(x)) / _oracle(x)
    assert jump < 1e-6


def test_asymptotic_formula_accuracy_near_the_switch():
    # the series is usable well below the switch; these margins justify it
    assert abs(_varsigma_asymptotic(20.0) - _oracle(20.0)) / _oracle(20.0) < 1e-2
    assert abs(_varsigma_asymptotic(25.0) - _oracle(25.0)) / _oracle(25.0) < 1e-3


def test_varsigma_validation():
    with pytest.raises(ValueError):
        varsigma(1.0, 0.0)
    with pytest.raises(ValueError):
        varsigma(-1.0, 1.0)
    with pytest.raises(ValueError):
        varsigma_branch(1.0, -1.0)


def test_varsigma_branch_names():
    assert varsigma_branch(1e-3, 1e-3) == "closed-form"
    assert varsigma_branch(30e-3, 1e-3) == "asymptotic"
    # the switch point itself stays on the closed form
    assert varsigma_branch(25.0, 1.0) == "closed-form"


def test_mt_volume():
    assert mt_volume(1e-3) == pytest.approx(2.5132741228718345e-8, rel=1e-15)
    assert mt_volume(2e-3) == pytest.approx(8.0 * mt_volume(1e-3), rel=1e-12)
    with pytest.raises(ValueError):
        mt_volume(0.0)


def test_effective_volume():
    assert effective_volume(1e-3, 1e-3) == pytest.approx(1.011668566146854e-7, rel=1e-12)
    assert effective_volume(0.0, 1e-3) == mt_volume(1e-3)
    product = effective_volume(2e-3, 1e-3) * varsigma(2e-3, 1e-3)
    assert product == pytest.approx(mt_volume(1e-3), rel=1e-12)


def test_effective_volume_grows_as_sigma_cubed():
    # deep in the asymptotic regime V_bar tracks sigma_bar^3
    v30 = effective_volume(30e-3, 1e-3)
    v60 = effective_volume(60e-3, 1e-3)
    assert v60 / v30 == pytest.approx(8.0, rel=1e-2)


def test_overlap_density_factor():
    v_bar = effective_volume(1e-3, 1e-3)
    assert overlap_density_factor(5e7, 2.3e5, v_bar) == pytest.approx(
        1.1367359217060676e20, rel=1e-12)
    assert overlap_density_factor(0.0, 2.3e5, v_bar) == 0.0
    assert overlap_density_factor(1e7, 1e5, v_bar) * 4.0 == pytest.approx(
        overlap_density_factor(2e7, 2e5, v_bar), rel=1e-12)
    with pytest.raises(ValueError):
        overlap_density_factor(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        overlap_density_factor(-1.0, 1.0, 1.0)


def test_magnetic_potential():
    u = magnetic_potential(6.0 * MU_B, 0.25, 1e-3)
    assert u == pytest.approx(1.391101511745e-26, rel=1e-12)
    assert u / KB == pytest.approx(1.0075707234387596e-3, rel=1e-12)
    assert magnetic_potential(6.0 * MU_B, 0.25, 0.0) == 0.0
    assert magnetic_potential(2.0 * 6.0 * MU_B, 0.25, 1e-3) == pytest.approx(2.0 * u, rel=1e-15)
    assert magnetic_potential(6.0 * MU_B, 0.5, 1e-3) == pytest.approx(2.0 * u, rel=1e-15)
    with pytest.raises(ValueError):
        magnetic_potential(-1.0, 0.25, 1e-3)


def test_cloud_dataclasses_validate():
    MtCloud(one_over_e_length=1e-3, atom_number=5e7, temperature=320e-6,
            magnetic_moment=6.0 * MU_B, axial_gradient=0.25)
    MotCloud(mean_size=1e-3, atom_number=2.3e5, temperature=100e-6)
    with pytest.raises(ValueError):
        MtCloud(one_over_e_length=0.0, atom_number=5e7, temperature=320e-6,
                magnetic_moment=6.0 * MU_B, axial_gradient=0.25)
    with pytest.raises(ValueError):
        MtCloud(one_over_e_length=1e-3, atom_number=-1.0, temperature=320e-6,
                magnetic_moment=6.0 * MU_B, axial_gradient=0.25)
    with pytest.raises(ValueError):
        MotCloud(mean_size=1e-3, atom_number=2.3e5, temperature=0.0)
