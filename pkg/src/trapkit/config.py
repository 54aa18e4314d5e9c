"""Config files: strict JSON schema with unit-tagged leaves.

Every physical quantity in a config is an object {"value": x, "unit":
"..."} validated against the unit registry; bare numbers are accepted
only for genuinely dimensionless fields (seeds, relative noise, CG
weight). Unknown keys anywhere are hard errors: a typo must fail the
run, not silently fall back to a default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .dynamics import NoiseSpec, TwoSpeciesModel
from .errors import SchemaError, UnitError
from .photoionization import RB_D2, TransitionSpec
from .units import to_si


def _require_dict(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, known, path: str):
    unknown = sorted(set(obj) - set(known))
    if unknown:
        raise SchemaError(f"{path}: unknown keys {unknown}; allowed keys are {sorted(known)}")


def _number(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(f"{path}: expected a number, got {type(obj).__name__}")
    if not math.isfinite(obj):
        raise SchemaError(f"{path}: must be finite")
    return float(obj)


def _integer(obj, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(f"{path}: expected an integer, got {type(obj).__name__}")
    return obj


def _quantity(obj, tag: str, path: str) -> float:
    """Parse {"value": x, "unit": u} and convert to SI under `tag`."""
    entry = _require_dict(obj, path)
    _reject_unknown(entry, ("value", "unit"), path)
    if "value" not in entry:
        raise SchemaError(f"{path}: missing 'value'")
    if "unit" not in entry:
        raise SchemaError(f"{path}: missing 'unit' (every physical quantity needs one)")
    value = _number(entry["value"], f"{path}.value")
    unit = entry["unit"]
    if not isinstance(unit, str):
        raise SchemaError(f"{path}.unit: expected a string")
    try:
        return to_si(value, unit, tag)
    except UnitError as exc:
        raise SchemaError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class SimulateConfig:
    """Validated simulate config. noise_seed None means the file did not
    pin a seed; the CLI then falls back to --seed or TRAPKIT_SEED."""

    model: TwoSpeciesModel
    n_cr0: float
    n_rb0: float
    t_end: float            # s
    sample_rate: float      # Hz
    relative_sigma: float
    additive_sigma: float   # counts
    noise_seed: int | None
    geometry: dict | None   # {"sigma_bar": m, "z": m} when V_bar came from geometry

    @property
    def has_noise(self) -> bool:
        return self.relative_sigma > 0.0 or self.additive_sigma > 0.0

    def noise_spec(self, seed: int) -> NoiseSpec:
        return NoiseSpec(relative_sigma=self.relative_sigma,
                         additive_sigma=self.additive_sigma, seed=seed)


def _parse_overlap(obj, path: str):
    entry = _require_dict(obj, path)
    if "v_bar" in entry:
        _reject_unknown(entry, ("v_bar",), path)
        return _quantity(entry["v_bar"], "volume", f"{path}.v_bar"), None
    if "sigma_bar" in entry or "z" in entry:
        _reject_unknown(entry, ("sigma_bar", "z"), path)
        for key in ("sigma_bar", "z"):
            if key not in entry:
                raise SchemaError(f"{path}: geometry overlap needs both 'sigma_bar' and 'z'")
        sigma_bar = _quantity(entry["sigma_bar"], "length", f"{path}.sigma_bar")
        z = _quantity(entry["z"], "length", f"{path}.z")
        return None, {"sigma_bar": sigma_bar, "z": z}
    raise SchemaError(f"{path}: give either 'v_bar' or the pair 'sigma_bar'/'z'")


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    return _require_dict(document, path)


def load_simulate_config(path: str) -> SimulateConfig:
    """Parse and validate a simulate config file."""
    document = _load_json(path)
    _reject_unknown(document, ("model", "initial", "time", "noise"), path)
    for section in ("model", "initial", "time"):
        if section not in document:
            raise SchemaError(f"{path}: missing section '{section}'")

    model_obj = _require_dict(document["model"], f"{path}.model")
    _reject_unknown(model_obj, ("loading_rate_rb", "gamma_rb", "gamma_cr",
                                "beta_rbcr", "beta_crrb", "overlap"), f"{path}.model")
    for key in ("loading_rate_rb", "gamma_rb", "gamma_cr", "beta_rbcr", "beta_crrb", "overlap"):
        if key not in model_obj:
            raise SchemaError(f"{path}.model: missing '{key}'")
    v_bar, geometry = _parse_overlap(model_obj["overlap"], f"{path}.model.overlap")
    try:
        if geometry is not None:
            model = TwoSpeciesModel.from_geometry(
                loading_rate_rb=_quantity(model_obj["loading_rate_rb"], "rate",
                                          f"{path}.model.loading_rate_rb"),
                gamma_rb=_quantity(model_obj["gamma_rb"], "rate", f"{path}.model.gamma_rb"),
                gamma_cr=_quantity(model_obj["gamma_cr"], "rate", f"{path}.model.gamma_cr"),
                beta_rbcr=_quantity(model_obj["beta_rbcr"], "loss_coefficient",
                                    f"{path}.model.beta_rbcr"),
                beta_crrb=_quantity(model_obj["beta_crrb"], "loss_coefficient",
                                    f"{path}.model.beta_crrb"),
                sigma_bar=geometry["sigma_bar"], z=geometry["z"])
        else:
            model = TwoSpeciesModel(
                loading_rate_rb=_quantity(model_obj["loading_rate_rb"], "rate",
                                          f"{path}.model.loading_rate_rb"),
                gamma_rb=_quantity(model_obj["gamma_rb"], "rate", f"{path}.model.gamma_rb"),
                gamma_cr=_quantity(model_obj["gamma_cr"], "rate", f"{path}.model.gamma_cr"),
                beta_rbcr=_quantity(model_obj["beta_rbcr"], "loss_coefficient",
                                    f"{path}.model.beta_rbcr"),
                beta_crrb=_quantity(model_obj["beta_crrb"], "loss_coefficient",
                                    f"{path}.model.beta_crrb"),
                v_bar=v_bar)
    except ValueError as exc:
        raise SchemaError(f"{path}.model: {exc}") from None

    initial_obj = _require_dict(document["initial"], f"{path}.initial")
    _reject_unknown(initial_obj, ("n_cr", "n_rb"), f"{path}.initial")
    for key in ("n_cr", "n_rb"):
        if key not in initial_obj:
            raise SchemaError(f"{path}.initial: missing '{key}'")
    n_cr0 = _quantity(initial_obj["n_cr"], "count", f"{path}.initial.n_cr")
    n_rb0 = _quantity(initial_obj["n_rb"], "count", f"{path}.initial.n_rb")

    time_obj = _require_dict(document["time"], f"{path}.time")
    _reject_unknown(time_obj, ("t_end", "sample_rate"), f"{path}.time")
    for key in ("t_end", "sample_rate"):
        if key not in time_obj:
            raise SchemaError(f"{path}.time: missing '{key}'")
    t_end = _quantity(time_obj["t_end"], "time", f"{path}.time.t_end")
    sample_rate = _quantity(time_obj["sample_rate"], "frequency", f"{path}.time.sample_rate")
    if not t_end > 0.0:
        raise SchemaError(f"{path}.time.t_end: must be > 0")
    if not sample_rate > 0.0:
        raise SchemaError(f"{path}.time.sample_rate: must be > 0")

    relative, additive, seed = 0.0, 0.0, None
    if "noise" in document:
        noise_obj = _require_dict(document["noise"], f"{path}.noise")
        _reject_unknown(noise_obj, ("relative_sigma", "additive_sigma", "seed"), f"{path}.noise")
        if "relative_sigma" in noise_obj:
            relative = _number(noise_obj["relative_sigma"], f"{path}.noise.relative_sigma")
        if "additive_sigma" in noise_obj:
            additive = _quantity(noise_obj["additive_sigma"], "count",
                                 f"{path}.noise.additive_sigma")
        if "seed" in noise_obj:
            seed = _integer(noise_obj["seed"], f"{path}.noise.seed")
        if relative < 0.0 or additive < 0.0:
            raise SchemaError(f"{path}.noise: sigmas must be >= 0")

    return SimulateConfig(model=model, n_cr0=n_cr0, n_rb0=n_rb0, t_end=t_end,
                          sample_rate=sample_rate, relative_sigma=relative,
                          additive_sigma=additive, noise_seed=seed, geometry=geometry)


@dataclass(frozen=True)
class FieldConfig:
    """Light-field and transition parameters for the cross-section fit."""

    transition: TransitionSpec
    detuning: float             # rad/s
    ionizing_wavelength: float  # m
    gamma_rb: float | None      # 1/s, None = estimate from background runs


def _parse_transition(obj, path: str) -> TransitionSpec:
    entry = _require_dict(obj, path)
    known = ("natural_linewidth", "saturation_intensity", "clebsch_gordan_sq",
             "transition_wavelength", "excited_state_ionization_energy")
    _reject_unknown(entry, known, path)
    kwargs = {}
    if "natural_linewidth" in entry:
        # quoted as an ordinary frequency (Gamma/2pi) or directly angular
        lw = _require_dict(entry["natural_linewidth"], f"{path}.natural_linewidth")
        _reject_unknown(lw, ("value", "unit"), f"{path}.natural_linewidth")
        if "unit" not in lw or "value" not in lw:
            raise SchemaError(f"{path}.natural_linewidth: needs 'value' and 'unit'")
        if lw["unit"] == "rad/s":
            kwargs["natural_linewidth"] = _number(lw["value"], f"{path}.natural_linewidth.value")
        else:
            ordinary = _quantity(lw, "frequency", f"{path}.natural_linewidth")
            kwargs["natural_linewidth"] = 2.0 * math.pi * ordinary
    if "saturation_intensity" in entry:
        kwargs["saturation_intensity"] = _quantity(entry["saturation_intensity"], "intensity",
                                                   f"{path}.saturation_intensity")
    if "clebsch_gordan_sq" in entry:
        kwargs["clebsch_gordan_sq"] = _number(entry["clebsch_gordan_sq"],
                                              f"{path}.clebsch_gordan_sq")
    if "transition_wavelength" in entry:
        kwargs["transition_wavelength"] = _quantity(entry["transition_wavelength"], "wavelength",
                                                    f"{path}.transition_wavelength")
    if "excited_state_ionization_energy" in entry:
        kwargs["excited_state_ionization_energy"] = _quantity(
            entry["excited_state_ionization_energy"], "energy",
            f"{path}.excited_state_ionization_energy")
    defaults = {
        "natural_linewidth": RB_D2.natural_linewidth,
        "saturation_intensity": RB_D2.saturation_intensity,
        "clebsch_gordan_sq": RB_D2.clebsch_gordan_sq,
        "transition_wavelength": RB_D2.transition_wavelength,
        "excited_state_ionization_energy": RB_D2.excited_state_ionization_energy,
    }
    defaults.update(kwargs)
    try:
        return TransitionSpec(**defaults)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def load_field_config(path: str | None) -> FieldConfig:
    """Parse a field config; None gives the built-in defaults."""
    if path is None:
        return FieldConfig(transition=RB_D2, detuning=2.25 * RB_D2.natural_linewidth,
                           ionizing_wavelength=426e-9, gamma_rb=None)
    document = _load_json(path)
    _reject_unknown(document, ("transition", "detuning", "ionizing_wavelength", "gamma_rb"),
                    path)
    transition = _parse_transition(document["transition"], f"{path}.transition") \
        if "transition" in document else RB_D2

    detuning = 2.25 * transition.natural_linewidth
    if "detuning" in document:
        entry = _require_dict(document["detuning"], f"{path}.detuning")
        _reject_unknown(entry, ("value", "unit"), f"{path}.detuning")
        if "unit" not in entry or "value" not in entry:
            raise SchemaError(f"{path}.detuning: needs 'value' and 'unit'")
        value = _number(entry["value"], f"{path}.detuning.value")
        if entry["unit"] == "linewidths":
            detuning = value * transition.natural_linewidth
        else:
            detuning = _quantity(entry, "detuning", f"{path}.detuning")

    ionizing_wavelength = 426e-9
    if "ionizing_wavelength" in document:
        ionizing_wavelength = _quantity(document["ionizing_wavelength"], "wavelength",
                                        f"{path}.ionizing_wavelength")

    gamma_rb = None
    if "gamma_rb" in document:
        gamma_rb = _quantity(document["gamma_rb"], "rate", f"{path}.gamma_rb")
        if gamma_rb < 0.0:
            raise SchemaError(f"{path}.gamma_rb: must be >= 0")

    return FieldConfig(transition=transition, detuning=detuning,
                       ionizing_wavelength=ionizing_wavelength, gamma_rb=gamma_rb)
