"""Trap-loss simulation and parameter extraction for a Cr/Rb cold atom experiment.

The package models the coupled atom-number dynamics of a chromium
magnetic trap overlapped with a rubidium magneto-optical trap, and
provides the estimators needed to pull physical quantities back out of
measured traces: one-body loading and decay fits, the photoionization
cross section of excited rubidium, and the interspecies loss
coefficients in both directions.
"""

__version__ = "0.1.0"

from .dynamics import (
    DataTrace,
    NoiseSpec,
    Trajectory,
    TwoSpeciesModel,
    initial_slope,
    integrate_coupled,
    one_body_decay,
    one_body_loading,
    slope_at_origin,
    synthesize_trace,
)
from .errors import (
    BelowBackgroundFlag,
    BelowThresholdFlag,
    EstimationError,
    IntegrationError,
    PhysicsFlag,
    SchemaError,
    TraceFormatError,
    TrapkitError,
    UnitError,
    UnphysicalValueFlag,
)
from .estimation import (
    FitResult,
    SigmaPRun,
    beta_crrb_bounds,
    energy_partition,
    extract_beta_rbcr,
    extract_gamma_p,
    extract_sigma_p,
    fit_decay,
    fit_heating_rate,
    fit_loading,
    inelastic_cross_section,
    mean_relative_speed,
    zeeman_release_energy,
)
from .overlap import (
    MotCloud,
    MtCloud,
    effective_volume,
    magnetic_potential,
    mt_volume,
    overlap_density_factor,
    varsigma,
    varsigma_branch,
)
from .photoionization import (
    RB_D2,
    IonizationChannel,
    LightField,
    TransitionSpec,
    excited_fraction,
    ionization_loss_rate,
    ionization_rate,
    mot_suppression_factor,
    photoelectron_velocity,
    photon_flux,
    saturation_parameter,
)
from .traceio import read_runs, read_trace, write_report, write_runs, write_trace
from .units import (
    AMU,
    CONSTANTS,
    EV,
    H,
    HBAR,
    KB,
    MASS_CR,
    MASS_RB,
    MU_B,
    Quantity,
    from_si,
    to_si,
)

__all__ = [
    "__version__",
    "AMU",
    "BelowBackgroundFlag",
    "BelowThresholdFlag",
    "CONSTANTS",
    "DataTrace",
    "EV",
    "EstimationError",
    "FitResult",
    "H",
    "HBAR",
    "IntegrationError",
    "IonizationChannel",
    "KB",
    "LightField",
    "MASS_CR",
    "MASS_RB",
    "MotCloud",
    "MtCloud",
    "MU_B",
    "NoiseSpec",
    "PhysicsFlag",
    "Quantity",
    "RB_D2",
    "SchemaError",
    "SigmaPRun",
    "TraceFormatError",
    "Trajectory",
    "TransitionSpec",
    "TrapkitError",
    "TwoSpeciesModel",
    "UnitError",
    "UnphysicalValueFlag",
    "beta_crrb_bounds",
    "effective_volume",
    "energy_partition",
    "excited_fraction",
    "extract_beta_rbcr",
    "extract_gamma_p",
    "extract_sigma_p",
    "fit_decay",
    "fit_heating_rate",
    "fit_loading",
    "from_si",
    "inelastic_cross_section",
    "initial_slope",
    "integrate_coupled",
    "ionization_loss_rate",
    "ionization_rate",
    "magnetic_potential",
    "mean_relative_speed",
    "mot_suppression_factor",
    "mt_volume",
    "one_body_decay",
    "one_body_loading",
    "overlap_density_factor",
    "photoelectron_velocity",
    "photon_flux",
    "read_runs",
    "read_trace",
    "saturation_parameter",
    "slope_at_origin",
    "synthesize_trace",
    "to_si",
    "varsigma",
    "varsigma_branch",
    "write_report",
    "write_runs",
    "write_trace",
    "zeeman_release_energy",
]
