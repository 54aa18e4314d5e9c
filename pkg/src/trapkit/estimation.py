"""Inverse pipeline: trace fits and closed-form extractions.

Nonlinear fits run damped least squares with analytic Jacobians of the
closed-form models. Parameter uncertainties come from the fit
covariance scaled by the reduced chi-square; negative or otherwise
suspicious extracted values are flagged, never clipped, so downstream
averages stay unbiased.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dynamics import DataTrace
from .errors import BelowBackgroundFlag, EstimationError, UnphysicalValueFlag
from .photoionization import (LightField, TransitionSpec, RB_D2,
                              excited_fraction, photon_flux, saturation_parameter)
from .units import KB, MU_B

DEFAULT_IONIZING_WAVELENGTH = 426e-9  # m
_MAX_NFEV = 400


@dataclass(frozen=True)
class FitResult:
    """Estimated parameters with 1-sigma uncertainties.

    converged False means the optimizer gave up; the values are the
    last iterate and must not be treated as authoritative.
    """

    params: dict
    uncertainties: dict
    residual_rms: float
    dof: int
    converged: bool
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, unc in self.uncertainties.items():
            if not (math.isnan(unc) or unc >= 0.0):
                raise ValueError(f"uncertainty for {name} must be >= 0 or nan")

    @property
    def authoritative(self) -> bool:
        return self.converged


@dataclass(frozen=True)
class SigmaPRun:
    """One grid point of the cross-section measurement.

    rb_intensity and ionizing_intensity in W/m^2; gamma_tot is the
    fitted total one-body loss rate of the loading curve, 1/s.
    """

    rb_intensity: float
    ionizing_intensity: float
    gamma_tot: float

    def __post_init__(self):
        for name in ("rb_intensity", "ionizing_intensity", "gamma_tot"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")


def _fit_weights(trace: DataTrace) -> np.ndarray:
    if trace.sigma is not None:
        return 1.0 / trace.sigma
    return np.ones_like(trace.values)


def _covariance(jac: np.ndarray, residuals: np.ndarray, n_params: int) -> np.ndarray:
    dof = residuals.size - n_params
    scale = float(residuals @ residuals) / dof if dof > 0 else float("nan")
    # equilibrate columns first: raw J^T J spans ~16 decades when the
    # parameters do (atoms vs 1/s), and pinv would truncate real directions
    norms = np.linalg.norm(jac, axis=0)
    norms[norms == 0.0] = 1.0
    balanced = jac / norms
    jtj_inv = np.linalg.pinv(balanced.T @ balanced) / np.outer(norms, norms)
    return scale * jtj_inv


def _check_not_flat(values: np.ndarray, what: str):
    spread = float(np.ptp(values))
    scale = max(abs(float(np.mean(values))), 1.0)
    if spread <= 1e-12 * scale:
        raise EstimationError(f"flat trace: {what} is unidentifiable")


def fit_loading(trace: DataTrace) -> FitResult:
    """Fit N(t) = (L/g)(1 - e^{-g t}) + N0 e^{-g t}; reports L, gamma, N0
    and the derived steady state N_ss = L/gamma."""
    if trace.value_kind != "atom_number":
        raise EstimationError(f"loading fit needs an atom-number trace, got {trace.value_kind!r}")
    if len(trace) < 6:
        raise EstimationError(f"loading fit needs >= 6 points, got {len(trace)}")
    t, y = trace.times, trace.values
    w = _fit_weights(trace)
    _check_not_flat(y, "gamma")
    span = float(t[-1] - t[0])

    n0_guess = max(float(y[0]), 0.0)
    nss_guess = float(y[-1])
    gamma_guess = 3.0 / span
    load_guess = max(abs(nss_guess - n0_guess), 1.0) * gamma_guess

    def residual(p):
        load, gamma, n0 = p
        decay = np.exp(-gamma * t)
        return w * ((load / gamma) * (1.0 - decay) + n0 * decay - y)

    def jacobian(p):
        load, gamma, n0 = p
        decay = np.exp(-gamma * t)
        d_load = (1.0 - decay) / gamma
        d_gamma = (load / gamma) * t * decay - (load / gamma**2) * (1.0 - decay) - n0 * t * decay
        d_n0 = decay
        return w[:, None] * np.stack([d_load, d_gamma, d_n0], axis=1)

    sol = least_squares(residual, x0=[load_guess, gamma_guess, n0_guess], jac=jacobian,
                        bounds=([0.0, 1e-9 / span, 0.0], [np.inf, np.inf, np.inf]),
                        max_nfev=_MAX_NFEV, x_scale="jac")
    load, gamma, n0 = sol.x
    if span * gamma < 1.0:
        raise EstimationError(
            f"trace spans {span * gamma:.2f} fitted lifetimes; need >= 1 for identifiability")
    cov = _covariance(jacobian(sol.x), sol.fun, 3)
    sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
    n_ss = load / gamma
    # N_ss = L/gamma, propagated with the L-gamma covariance term
    var_nss = (cov[0, 0] / gamma**2 + (load**2 / gamma**4) * cov[1, 1]
               - 2.0 * (load / gamma**3) * cov[0, 1])
    model = (load / gamma) * (1.0 - np.exp(-gamma * t)) + n0 * np.exp(-gamma * t)
    return FitResult(
        params={"loading_rate": float(load), "gamma": float(gamma), "n0": float(n0),
                "n_ss": float(n_ss)},
        uncertainties={"loading_rate": float(sd[0]), "gamma": float(sd[1]), "n0": float(sd[2]),
                       "n_ss": float(math.sqrt(max(var_nss, 0.0)))},
        residual_rms=float(np.sqrt(np.mean((model - y) ** 2))),
        dof=len(trace) - 3,
        converged=bool(sol.success),
        details={"n_iterations": int(sol.nfev)},
    )


def fit_decay(trace: DataTrace) -> FitResult:
    """Fit N(t) = N0 e^{-gamma t}; reports gamma, N0 and lifetime 1/gamma."""
    if trace.value_kind != "atom_number":
        raise EstimationError(f"decay fit needs an atom-number trace, got {trace.value_kind!r}")
    if len(trace) < 6:
        raise EstimationError(f"decay fit needs >= 6 points, got {len(trace)}")
    t, y = trace.times, trace.values
    w = _fit_weights(trace)
    _check_not_flat(y, "gamma")
    span = float(t[-1] - t[0])

    positive = y > 0.0
    if positive.sum() < 2:
        raise EstimationError("decay fit needs at least 2 positive samples")
    # log-linear starting point
    log_slope, log_n0 = np.polyfit(t[positive], np.log(y[positive]), 1)
    gamma_guess = max(-log_slope, 1e-6 / span)
    n0_guess = math.exp(log_n0)

    def residual(p):
        gamma, n0 = p
        return w * (n0 * np.exp(-gamma * t) - y)

    def jacobian(p):
        gamma, n0 = p
        decay = np.exp(-gamma * t)
        return w[:, None] * np.stack([-n0 * t * decay, decay], axis=1)

    sol = least_squares(residual, x0=[gamma_guess, n0_guess], jac=jacobian,
                        bounds=([1e-9 / span, 0.0], [np.inf, np.inf]),
                        max_nfev=_MAX_NFEV, x_scale="jac")
    gamma, n0 = sol.x
    if span * gamma < 1.0:
        raise EstimationError(
            f"trace spans {span * gamma:.2f} fitted lifetimes; need >= 1 for identifiability")
    cov = _covariance(jacobian(sol.x), sol.fun, 2)
    sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
    model = n0 * np.exp(-gamma * t)
    return FitResult(
        params={"gamma": float(gamma), "n0": float(n0), "lifetime": float(1.0 / gamma)},
        uncertainties={"gamma": float(sd[0]), "n0": float(sd[1]),
                       "lifetime": float(sd[0] / gamma**2)},
        residual_rms=float(np.sqrt(np.mean((model - y) ** 2))),
        dof=len(trace) - 2,
        converged=bool(sol.success),
        details={"n_iterations": int(sol.nfev)},
    )


def fit_heating_rate(trace: DataTrace) -> FitResult:
    """Weighted linear fit T(t) = T0 + rate*t on a temperature trace."""
    if trace.value_kind != "temperature":
        raise EstimationError(f"heating fit needs a temperature trace, got {trace.value_kind!r}")
    if len(trace) < 4:
        raise EstimationError(f"heating fit needs >= 4 points, got {len(trace)}")
    t, y = trace.times, trace.values
    w = _fit_weights(trace)
    design = w[:, None] * np.stack([t, np.ones_like(t)], axis=1)
    rhs = w * y
    coef, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    rate, t0 = coef
    resid = design @ coef - rhs
    cov = _covariance(design, resid, 2)
    sd = np.sqrt(np.maximum(np.diag(cov), 0.0))
    model = rate * t + t0
    return FitResult(
        params={"rate": float(rate), "t0": float(t0)},
        uncertainties={"rate": float(sd[0]), "t0": float(sd[1])},
        residual_rms=float(np.sqrt(np.mean((model - y) ** 2))),
        dof=len(trace) - 2,
        converged=True,
    )


def extract_gamma_p(gamma_tot: float, gamma_rb: float) -> float:
    """Photoionization rate gamma_tot - gamma_rb.

    A negative value (loss below background, i.e. noise) is returned
    as-is with a BelowBackgroundFlag so averages stay unbiased.
    """
    if gamma_tot < 0.0 or gamma_rb < 0.0:
        raise ValueError("rates must be >= 0")
    gamma_p = gamma_tot - gamma_rb
    if gamma_p < 0.0:
        warnings.warn(f"gamma_tot - gamma_rb = {gamma_p:.3e} 1/s is below background",
                      BelowBackgroundFlag, stacklevel=2)
    return gamma_p


def extract_sigma_p(runs: list, *, transition: TransitionSpec = RB_D2,
                    detuning: float | None = None,
                    ionizing_wavelength: float = DEFAULT_IONIZING_WAVELENGTH,
                    gamma_rb: float | None = None, pool_gamma_bg: bool = True,
                    diagnostic_intercept: bool = False) -> FitResult:
    """Photoionization cross section from a grid of loading-rate runs.

    Per trap-light intensity group: rho_ee from the saturation model,
    Gamma = (gamma_tot - gamma_bg)/rho_ee, then a least-squares line
    Gamma = sigma_p * Phi through the origin (the rate law has no
    intercept). The pooled estimate is the mean over groups with the
    group-to-group dispersion as its uncertainty.

    gamma_rb fixes the background rate; when None it is estimated from
    the runs with zero ionizing intensity, either pooled over all
    groups (default) or per group. diagnostic_intercept additionally
    reports a free-intercept line per group to expose offsets.
    """
    if not runs:
        raise EstimationError("no runs given")
    if detuning is None:
        detuning = 2.25 * transition.natural_linewidth

    groups: dict[float, list] = {}
    for run in runs:
        groups.setdefault(run.rb_intensity, []).append(run)

    background = [run for run in runs if run.ionizing_intensity == 0.0]
    if gamma_rb is None and not background:
        raise EstimationError(
            "gamma_rb not given and no zero-ionizing-intensity runs to estimate it from")
    pooled_bg = float(np.mean([run.gamma_tot for run in background])) if background else None

    group_fits = []
    all_phi, all_gamma_if = [], []
    for rb_intensity in sorted(groups):
        members = groups[rb_intensity]
        if gamma_rb is not None:
            gamma_bg = gamma_rb
        elif pool_gamma_bg:
            gamma_bg = pooled_bg
        else:
            own_bg = [run.gamma_tot for run in members if run.ionizing_intensity == 0.0]
            if not own_bg:
                warnings.warn(f"group I_Rb = {rb_intensity} W/m^2 has no background run; skipped",
                              UserWarning, stacklevel=2)
                continue
            gamma_bg = float(np.mean(own_bg))

        distinct_phi = {photon_flux(run.ionizing_intensity, ionizing_wavelength)
                        for run in members}
        if len(distinct_phi) < 2:
            warnings.warn(f"group I_Rb = {rb_intensity} W/m^2 has fewer than 2 distinct "
                          "photon fluxes; skipped", UserWarning, stacklevel=2)
            continue

        field_ = LightField(total_intensity=rb_intensity, detuning=detuning,
                            wavelength=transition.transition_wavelength)
        rho_ee = excited_fraction(saturation_parameter(field_, transition))
        if rho_ee == 0.0:
            warnings.warn(f"group I_Rb = {rb_intensity} W/m^2 has rho_ee = 0; skipped",
                          UserWarning, stacklevel=2)
            continue

        phi = np.array([photon_flux(run.ionizing_intensity, ionizing_wavelength)
                        for run in members if run.ionizing_intensity > 0.0])
        gamma_if = np.array([extract_gamma_p(run.gamma_tot, gamma_bg) / rho_ee
                             for run in members if run.ionizing_intensity > 0.0])

        slope = float(phi @ gamma_if / (phi @ phi))
        resid = gamma_if - slope * phi
        if phi.size > 1:
            stderr = math.sqrt(float(resid @ resid) / (phi.size - 1) / float(phi @ phi))
        else:
            stderr = float("nan")
        entry = {"rb_intensity": float(rb_intensity), "sigma_p": slope, "stderr": stderr,
                 "n_points": int(phi.size), "gamma_bg": float(gamma_bg), "rho_ee": float(rho_ee),
                 "phi": [float(v) for v in phi], "gamma_if": [float(v) for v in gamma_if]}
        if diagnostic_intercept and phi.size >= 2:
            free_slope, free_intercept = np.polyfit(phi, gamma_if, 1)
            entry["free_slope"] = float(free_slope)
            entry["free_intercept"] = float(free_intercept)
        group_fits.append(entry)
        all_phi.append(phi)
        all_gamma_if.append(gamma_if)

    if not group_fits:
        raise EstimationError("all intensity groups were skipped; no identifiable slope")

    estimates = np.array([entry["sigma_p"] for entry in group_fits])
    sigma_p = float(np.mean(estimates))
    if len(estimates) >= 2:
        unc = float(np.std(estimates, ddof=1))
    else:
        unc = group_fits[0]["stderr"]
    phi = np.concatenate(all_phi)
    gamma_if = np.concatenate(all_gamma_if)
    rms = float(np.sqrt(np.mean((gamma_if - sigma_p * phi) ** 2))) if phi.size else 0.0
    return FitResult(
        params={"sigma_p": sigma_p},
        uncertainties={"sigma_p": unc},
        residual_rms=rms,
        dof=int(phi.size - len(group_fits)),
        converged=True,
        details={"groups": group_fits,
                 "gamma_bg_mode": ("fixed" if gamma_rb is not None
                                   else "pooled" if pool_gamma_bg else "per-group")},
    )


def mean_relative_speed(t_cr: float, m_cr: float, t_rb: float, m_rb: float) -> float:
    """Mean relative speed sqrt(8 k_B/pi (T_Cr/m_Cr + T_Rb/m_Rb))."""
    if t_cr < 0.0 or t_rb < 0.0:
        raise ValueError("temperatures must be >= 0")
    if not (m_cr > 0.0 and m_rb > 0.0):
        raise ValueError("masses must be > 0")
    return math.sqrt(8.0 * KB / math.pi * (t_cr / m_cr + t_rb / m_rb))


def inelastic_cross_section(beta: float, v_rel: float) -> float:
    """Cross section beta / v_rel.

    This is the dimensionally consistent combination (m^3/s over m/s
    gives m^2); the product beta * v_rel would carry m^4/s^2 and is not
    implemented.
    """
    if not v_rel > 0.0:
        raise ValueError(f"v_rel must be > 0, got {v_rel}")
    if beta < 0.0:
        warnings.warn(f"negative loss coefficient {beta:.3e} m^3/s gives a negative "
                      "cross section", UnphysicalValueFlag, stacklevel=2)
    return beta / v_rel


def extract_beta_rbcr(alpha: float, loading_rate: float, factor: float) -> float:
    """Loss coefficient from the initial slope: beta = (L - alpha)/F.

    alpha is the initial slope of the loading curve with the other
    species present; F is the (assumed constant) interspecies factor
    N_Cr N_Rb / V_bar over the slope window. alpha > L means the trap
    filled faster than its own loading rate; the negative beta is
    returned with an UnphysicalValueFlag.
    """
    if not factor > 0.0:
        raise ValueError(f"factor must be > 0, got {factor}")
    beta = (loading_rate - alpha) / factor
    if beta < 0.0:
        warnings.warn(f"extracted beta = {beta:.3e} m^3/s is negative (slope exceeds "
                      "loading rate)", UnphysicalValueFlag, stacklevel=2)
    return beta


def beta_crrb_bounds(delta_n_rate: float, f_min: float, f_max: float) -> tuple:
    """Bounds on the coefficient from the excess loss rate.

    delta_n_rate is the with/without difference in atoms/s over the
    analysis window; dividing by the extreme values of the interspecies
    factor gives (beta_lo, beta_hi) = (rate/F_max, rate/F_min).
    """
    if not (0.0 < f_min <= f_max):
        raise ValueError(f"need 0 < f_min <= f_max, got f_min={f_min}, f_max={f_max}")
    if delta_n_rate < 0.0:
        raise ValueError(f"delta_n_rate must be >= 0, got {delta_n_rate}")
    return (delta_n_rate / f_max, delta_n_rate / f_min)


def energy_partition(m_receiver: float, m_partner: float) -> float:
    """Kinetic-energy fraction the receiver takes in a two-body release.

    Momentum conservation from rest gives equal momenta, so the lighter
    partner carries the larger energy share m_partner/(m_rec + m_part).
    """
    if not (m_receiver > 0.0 and m_partner > 0.0):
        raise ValueError("masses must be > 0")
    return m_partner / (m_receiver + m_partner)


def zeeman_release_energy(b_field: float, channel: str = "ground") -> float:
    """Energy released by a spin flip near the trap center.

    3/2 mu_B B for the ground channel, 4/3 mu_B B for the excited one.
    """
    if b_field < 0.0:
        raise ValueError(f"b_field must be >= 0, got {b_field}")
    if channel == "ground":
        return 1.5 * MU_B * b_field
    if channel == "excited":
        return (4.0 / 3.0) * MU_B * b_field
    raise ValueError(f"channel must be 'ground' or 'excited', got {channel!r}")
