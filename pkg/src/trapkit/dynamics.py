"""Forward models: one-body closed forms, the coupled two-species
system, and synthetic traces with controlled noise.

Sign conventions: loss rates gamma and loss coefficients beta are all
non-negative; losses carry explicit minus signs in the equations.

    dN_Cr/dt = -gamma_Cr N_Cr - beta_CrRb * F
    dN_Rb/dt = L_Rb - gamma_Rb N_Rb - beta_RbCr * F
    F        = N_Cr N_Rb / V_bar

V_bar stays fixed during a run (the clouds' geometry does not evolve
here). For estimator studies F itself can be frozen to a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .overlap import effective_volume

VALUE_KINDS = ("atom_number", "temperature")


@dataclass(frozen=True)
class TwoSpeciesModel:
    """Full parameter set of the coupled system, overlap resolved to V_bar.

    The two loss coefficients are independent: the traps differ in
    depth, so the per-collision loss probabilities differ.
    """

    loading_rate_rb: float  # atoms/s
    gamma_rb: float         # 1/s
    gamma_cr: float         # 1/s
    beta_rbcr: float        # m^3/s, Rb lost per interspecies collision density
    beta_crrb: float        # m^3/s, Cr lost per interspecies collision density
    v_bar: float            # m^3

    def __post_init__(self):
        for name in ("loading_rate_rb", "gamma_rb", "gamma_cr", "beta_rbcr", "beta_crrb"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not (math.isfinite(self.v_bar) and self.v_bar > 0.0):
            raise ValueError(f"v_bar must be finite and > 0, got {self.v_bar}")

    @classmethod
    def from_geometry(cls, loading_rate_rb, gamma_rb, gamma_cr, beta_rbcr, beta_crrb,
                      sigma_bar, z):
        """Build the model with V_bar computed from the cloud geometry."""
        return cls(loading_rate_rb, gamma_rb, gamma_cr, beta_rbcr, beta_crrb,
                   effective_volume(sigma_bar, z))


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the coupled system plus solver metadata."""

    times: np.ndarray
    n_cr: np.ndarray
    n_rb: np.ndarray
    rel_tol: float = float("nan")
    abs_tol: float = float("nan")
    n_steps: int = 0
    terminated_early: bool = False

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        n_cr = np.asarray(self.n_cr, dtype=float)
        n_rb = np.asarray(self.n_rb, dtype=float)
        if not (times.shape == n_cr.shape == n_rb.shape) or times.ndim != 1:
            raise ValueError("times, n_cr, n_rb must be 1-d arrays of equal length")
        if times.size >= 2 and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(n_cr < 0.0) or np.any(n_rb < 0.0):
            raise ValueError("atom numbers must be non-negative at every sample")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "n_cr", n_cr)
        object.__setattr__(self, "n_rb", n_rb)

    def species(self, name: str) -> np.ndarray:
        if name == "cr":
            return self.n_cr
        if name == "rb":
            return self.n_rb
        raise ValueError(f"species must be 'cr' or 'rb', got {name!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative + additive Gaussian noise, reproducible under seed."""

    relative_sigma: float = 0.0
    additive_sigma: float = 0.0   # counts
    seed: int = 0

    def __post_init__(self):
        if self.relative_sigma < 0.0 or self.additive_sigma < 0.0:
            raise ValueError("noise sigmas must be >= 0")


@dataclass(frozen=True)
class DataTrace:
    """Observed or synthesized scalar time series.

    value_kind is 'atom_number' or 'temperature'. sigma, when present,
    is the per-point 1-sigma uncertainty used to weight fits.
    """

    times: np.ndarray
    values: np.ndarray
    value_kind: str = "atom_number"
    sigma: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if times.size >= 2 and not np.all(np.diff(times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.value_kind not in VALUE_KINDS:
            raise ValueError(f"value_kind must be one of {VALUE_KINDS}, got {self.value_kind!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != times.shape:
                raise ValueError("sigma must match times in shape")
            if not np.all(sigma > 0.0):
                raise ValueError("sigma must be > 0 where present")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self):
        return self.times.size


def one_body_loading(loading_rate, gamma, n0, t):
    """N(t) for loading against one-body loss.

    (L/gamma)(1 - e^{-gamma t}) + N0 e^{-gamma t}; the gamma = 0 limit
    is the linear ramp L t + N0. Vectorized over t.
    """
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if loading_rate < 0.0 or n0 < 0.0:
        raise ValueError("loading_rate and n0 must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    if gamma == 0.0:
        result = loading_rate * t + n0
    else:
        decay = np.exp(-gamma * t)
        result = (loading_rate / gamma) * (1.0 - decay) + n0 * decay
    return result if result.ndim else float(result)


def one_body_decay(gamma, n0, t):
    """N0 e^{-gamma t}, vectorized over t."""
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if n0 < 0.0:
        raise ValueError("n0 must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    result = n0 * np.exp(-gamma * t)
    return result if result.ndim else float(result)


def integrate_coupled(model: TwoSpeciesModel, n_cr0: float, n_rb0: float, t_span: float,
                      rel_tol: float = 1e-9, abs_tol: float = 1e-3,
                      t_eval: np.ndarray | None = None,
                      constant_factor: float | None = None) -> Trajectory:
    """Integrate the coupled system over [0, t_span].

    constant_factor, when given, freezes the interspecies term to
    beta * constant_factor in both equations (the constant-F
    approximation used to analyze initial slopes).

    Atom numbers are physical counts. The exact flow never leaves the
    positive quadrant (each derivative is >= 0 on its own axis), so a
    count below -abs_tol means the solver overshot; integration stops
    there, the trajectory is clamped at zero and terminated_early set.
    """
    if not 0.0 < rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must be in (0, 1e-3], got {rel_tol}")
    if not 0.0 < abs_tol <= 1e-3:
        raise ValueError(f"abs_tol must be in (0, 1e-3], got {abs_tol}")
    if not (math.isfinite(t_span) and t_span > 0.0):
        raise ValueError(f"t_span must be finite and > 0, got {t_span}")
    if n_cr0 < 0.0 or n_rb0 < 0.0:
        raise ValueError("initial atom numbers must be >= 0")

    load = model.loading_rate_rb

    if constant_factor is None:
        def rhs(t, y):
            factor = y[0] * y[1] / model.v_bar
            return (-model.gamma_cr * y[0] - model.beta_crrb * factor,
                    load - model.gamma_rb * y[1] - model.beta_rbcr * factor)
    else:
        if constant_factor < 0.0:
            raise ValueError("constant_factor must be >= 0")
        def rhs(t, y):
            return (-model.gamma_cr * y[0] - model.beta_crrb * constant_factor,
                    load - model.gamma_rb * y[1] - model.beta_rbcr * constant_factor)

    # threshold below zero so a species legitimately sitting at 0 atoms
    # (g = 0 at t = 0 counts as a down-crossing for solve_ivp) never trips it
    def cr_empty(t, y):
        return y[0] + abs_tol

    def rb_empty(t, y):
        return y[1] + abs_tol

    cr_empty.terminal = True
    cr_empty.direction = -1
    rb_empty.terminal = True
    rb_empty.direction = -1

    sol = solve_ivp(rhs, (0.0, float(t_span)), [float(n_cr0), float(n_rb0)],
                    method="RK45", rtol=rel_tol, atol=abs_tol, t_eval=t_eval,
                    events=(cr_empty, rb_empty), dense_output=False)
    if sol.status == -1:
        last_t = sol.t[-1] if sol.t.size else 0.0
        last_y = sol.y[:, -1] if sol.t.size else np.array([n_cr0, n_rb0])
        raise IntegrationError(f"integration failed at t = {last_t:.6g} s: {sol.message}",
                               last_time=last_t, last_state=last_y)
    # solver roundoff can leave values a hair below zero; they are counts
    n_cr = np.maximum(sol.y[0], 0.0)
    n_rb = np.maximum(sol.y[1], 0.0)
    return Trajectory(times=sol.t, n_cr=n_cr, n_rb=n_rb,
                      rel_tol=rel_tol, abs_tol=abs_tol, n_steps=int(sol.nfev),
                      terminated_early=(sol.status == 1))


def slope_at_origin(times: np.ndarray, values: np.ndarray, window: float) -> float:
    """Slope at t = 0 from an unweighted linear fit over [0, window]."""
    if not window > 0.0:
        raise ValueError(f"window must be > 0, got {window}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if abs(times[0]) > 1e-12:
        raise ValueError(f"series must start at t = 0, starts at {times[0]}")
    mask = times <= window
    if int(mask.sum()) < 4:
        raise ValueError(f"need >= 4 samples inside the window, found {int(mask.sum())}")
    slope, _ = np.polyfit(times[mask], values[mask], 1)
    return float(slope)


def initial_slope(traj: Trajectory, species: str = "rb", window: float = 1.0) -> float:
    """Slope at t = 0 of one trajectory component.

    With the trap initially empty and exact data this estimates
    L - beta * F_bar up to the quadratic correction of the window, with
    F_bar the window-mean interspecies factor.
    """
    return slope_at_origin(traj.times, traj.species(species), window)


def synthesize_trace(traj: Trajectory, noise: NoiseSpec, sample_rate: float,
                     species: str = "rb") -> DataTrace:
    """Resample a trajectory uniformly and apply the noise model.

    Multiplicative noise first, then additive. The per-point sigma
    recorded on the trace is the model's own hypot(rel*N, add), floored
    at its smallest positive entry so zero-count points stay usable in
    weighted fits.
    """
    if not sample_rate > 0.0:
        raise ValueError(f"sample_rate must be > 0, got {sample_rate}")
    t0, t1 = traj.times[0], traj.times[-1]
    n_samples = int(math.floor((t1 - t0) * sample_rate)) + 1
    times = t0 + np.arange(n_samples) / sample_rate
    clean = np.interp(times, traj.times, traj.species(species))

    rng = np.random.default_rng(noise.seed)
    values = clean.copy()
    if noise.relative_sigma > 0.0:
        values = values * (1.0 + noise.relative_sigma * rng.standard_normal(n_samples))
    if noise.additive_sigma > 0.0:
        values = values + noise.additive_sigma * rng.standard_normal(n_samples)

    sigma = None
    if noise.relative_sigma > 0.0 or noise.additive_sigma > 0.0:
        sigma = np.hypot(noise.relative_sigma * clean, noise.additive_sigma)
        positive = sigma[sigma > 0.0]
        floor = positive.min() if positive.size else 1.0
        sigma = np.maximum(sigma, floor)
    return DataTrace(times=times, values=values, value_kind="atom_number", sigma=sigma)
