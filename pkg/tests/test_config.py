"""Config parsing: strict schema, units resolved at the boundary."""

import json
import math

import pytest

from trapkit import RB_D2, SchemaError, effective_volume
from trapkit.config import load_field_config, load_simulate_config


def _quantity(value, unit):
    return {"value": value, "unit": unit}


def _base_config():
    return {
        "model": {
            "loading_rate_rb": _quantity(2.6e4, "atoms/s"),
            "gamma_rb": _quantity(1.0 / 9.0, "1/s"),
            "gamma_cr": _quantity(0.1, "1/s"),
            "beta_rbcr": _quantity(1.4e-17, "m^3/s"),
            "beta_crrb": _quantity(1e-15, "m^3/s"),
            "overlap": {"v_bar": _quantity(1.15e-8, "m^3")},
        },
        "initial": {"n_cr": _quantity(5e7, "atoms"), "n_rb": _quantity(0, "atoms")},
        "time": {"t_end": _quantity(40, "s"), "sample_rate": _quantity(20, "Hz")},
    }


def _write(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def test_valid_config_with_direct_volume(tmp_path):
    cfg = load_simulate_config(_write(tmp_path, _base_config()))
    assert cfg.model.loading_rate_rb == 2.6e4
    assert cfg.model.v_bar == 1.15e-8
    assert cfg.n_cr0 == 5e7 and cfg.n_rb0 == 0.0
    assert cfg.t_end == 40.0 and cfg.sample_rate == 20.0
    assert not cfg.has_noise
    assert cfg.noise_seed is None
    assert cfg.geometry is None


def test_units_are_converted(tmp_path):
    document = _base_config()
    document["model"]["beta_rbcr"] = _quantity(1.4e-11, "cm^3/s")
    document["time"]["t_end"] = _quantity(40000, "ms")
    document["time"]["sample_rate"] = _quantity(0.02, "kHz")
    cfg = load_simulate_config(_write(tmp_path, document))
    assert cfg.model.beta_rbcr == pytest.approx(1.4e-17, rel=1e-12)
    assert cfg.t_end == pytest.approx(40.0, rel=1e-12)
    assert cfg.sample_rate == pytest.approx(20.0, rel=1e-12)


def test_geometry_overlap(tmp_path):
    document = _base_config()
    document["model"]["overlap"] = {"sigma_bar": _quantity(1, "mm"), "z": _quantity(1, "mm")}
    cfg = load_simulate_config(_write(tmp_path, document))
    assert cfg.model.v_bar == pytest.approx(effective_volume(1e-3, 1e-3), rel=1e-12)
    assert cfg.geometry == {"sigma_bar": 1e-3, "z": 1e-3}


def test_noise_section(tmp_path):
    document = _base_config()
    document["noise"] = {"relative_sigma": 0.05, "additive_sigma": _quantity(30, "atoms"),
                         "seed": 42}
    cfg = load_simulate_config(_write(tmp_path, document))
    assert cfg.has_noise
    assert cfg.noise_seed == 42
    spec = cfg.noise_spec(7)
    assert spec.relative_sigma == 0.05
    assert spec.additive_sigma == 30.0
    assert spec.seed == 7


def test_unknown_keys_fail_everywhere(tmp_path):
    for mutate in (
        lambda d: d.update(extra=1),
        lambda d: d["model"].update(gamma_xe=_quantity(1, "1/s")),
        lambda d: d["model"]["overlap"].update(z=_quantity(1, "mm")),
        lambda d: d["initial"].update(n_xe=_quantity(1, "atoms")),
        lambda d: d["time"].update(step=_quantity(1, "s")),
        lambda d: d["model"]["gamma_rb"].update(comment="typo"),
    ):
        document = _base_config()
        mutate(document)
        with pytest.raises(SchemaError, match="unknown keys"):
            load_simulate_config(_write(tmp_path, document))


def test_unknown_noise_key(tmp_path):
    document = _base_config()
    document["noise"] = {"sigma": 0.05}
    with pytest.raises(SchemaError, match="unknown keys"):
        load_simulate_config(_write(tmp_path, document))


def test_missing_pieces(tmp_path):
    document = _base_config()
    del document["time"]
    with pytest.raises(SchemaError, match="missing section 'time'"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    del document["model"]["gamma_cr"]
    with pytest.raises(SchemaError, match="gamma_cr"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["model"]["gamma_rb"] = {"value": 0.11}
    with pytest.raises(SchemaError, match="missing 'unit'"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["model"]["gamma_rb"] = {"unit": "1/s"}
    with pytest.raises(SchemaError, match="missing 'value'"):
        load_simulate_config(_write(tmp_path, document))


def test_wrong_unit_for_slot(tmp_path):
    document = _base_config()
    document["model"]["gamma_rb"] = _quantity(0.11, "mm")
    with pytest.raises(SchemaError, match="rate"):
        load_simulate_config(_write(tmp_path, document))


def test_values_must_be_numbers(tmp_path):
    document = _base_config()
    document["model"]["gamma_rb"] = _quantity("0.11", "1/s")
    with pytest.raises(SchemaError, match="expected a number"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["model"]["gamma_rb"] = _quantity(True, "1/s")
    with pytest.raises(SchemaError, match="expected a number"):
        load_simulate_config(_write(tmp_path, document))


def test_seed_must_be_an_integer(tmp_path):
    document = _base_config()
    document["noise"] = {"seed": 1.5}
    with pytest.raises(SchemaError, match="integer"):
        load_simulate_config(_write(tmp_path, document))


def test_overlap_variants_rejected(tmp_path):
    document = _base_config()
    document["model"]["overlap"] = {}
    with pytest.raises(SchemaError, match="either"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["model"]["overlap"] = {"z": _quantity(1, "mm")}
    with pytest.raises(SchemaError, match="both"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["model"]["overlap"] = {"v_bar": _quantity(1.15e-8, "m^3"),
                                    "sigma_bar": _quantity(1, "mm")}
    with pytest.raises(SchemaError, match="unknown keys"):
        load_simulate_config(_write(tmp_path, document))


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_simulate_config(str(path))


def test_time_section_validation(tmp_path):
    document = _base_config()
    document["time"]["t_end"] = _quantity(0, "s")
    with pytest.raises(SchemaError, match="t_end"):
        load_simulate_config(_write(tmp_path, document))

    document = _base_config()
    document["time"]["sample_rate"] = _quantity(-1, "Hz")
    with pytest.raises(SchemaError, match="sample_rate"):
        load_simulate_config(_write(tmp_path, document))


def test_negative_model_rate_is_rejected(tmp_path):
    document = _base_config()
    document["model"]["gamma_cr"] = _quantity(-0.1, "1/s")
    with pytest.raises(SchemaError):
        load_simulate_config(_write(tmp_path, document))


def test_negative_noise_rejected(tmp_path):
    document = _base_config()
    document["noise"] = {"relative_sigma": -0.05}
    with pytest.raises(SchemaError, match="sigmas"):
        load_simulate_config(_write(tmp_path, document))


# --- field config ---------------------------------------------------------


def test_field_config_defaults():
    cfg = load_field_config(None)
    assert cfg.transition is RB_D2
    assert cfg.detuning == pytest.approx(2.25 * RB_D2.natural_linewidth, rel=1e-15)
    assert cfg.ionizing_wavelength == 426e-9
    assert cfg.gamma_rb is None


def test_field_config_detuning_in_linewidths(tmp_path):
    path = _write(tmp_path, {"detuning": {"value": 3.0, "unit": "linewidths"}}, "field.json")
    cfg = load_field_config(path)
    assert cfg.detuning == pytest.approx(3.0 * RB_D2.natural_linewidth, rel=1e-15)


def test_field_config_detuning_in_rad_s(tmp_path):
    path = _write(tmp_path, {"detuning": {"value": 8.5e7, "unit": "rad/s"}}, "field.json")
    assert load_field_config(path).detuning == 8.5e7


def test_field_config_linewidth_units(tmp_path):
    path = _write(tmp_path, {"transition": {"natural_linewidth": _quantity(6.07, "MHz")}},
                  "field.json")
    cfg = load_field_config(path)
    assert cfg.transition.natural_linewidth == pytest.approx(2 * math.pi * 6.07e6, rel=1e-12)
    # partial overrides keep the bundled defaults elsewhere
    assert cfg.transition.saturation_intensity == RB_D2.saturation_intensity

    path = _write(tmp_path, {"transition": {"natural_linewidth": _quantity(3.8e7, "rad/s")}},
                  "field2.json")
    assert load_field_config(path).transition.natural_linewidth == 3.8e7


def test_field_config_gamma_rb(tmp_path):
    path = _write(tmp_path, {"gamma_rb": _quantity(0.11, "1/s")}, "field.json")
    assert load_field_config(path).gamma_rb == 0.11


def test_field_config_rejects_unknown_keys(tmp_path):
    path = _write(tmp_path, {"wavelength": _quantity(426, "nm")}, "field.json")
    with pytest.raises(SchemaError, match="unknown keys"):
        load_field_config(path)

    path = _write(tmp_path, {"transition": {"linewidth": _quantity(6.07, "MHz")}},
                  "field2.json")
    with pytest.raises(SchemaError, match="unknown keys"):
        load_field_config(path)
