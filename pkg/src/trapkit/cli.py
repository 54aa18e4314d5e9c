"""Command line front end.

Every subcommand writes a JSON report into the output directory and prints
a short summary to stdout.  Reports are deterministic for a fixed seed and
fixed inputs except for the ``generated_at`` timestamp.  Physics warnings
raised during a run are echoed to stderr and recorded in the report's
``flags`` list; they never change the exit status.  Errors print one line
to stderr and exit with status 1 (argparse usage errors keep status 2).
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
import warnings

import numpy as np

from . import __version__
from .config import load_field_config, load_simulate_config
from .dynamics import (
    DataTrace,
    integrate_coupled,
    one_body_decay,
    one_body_loading,
    slope_at_origin,
    synthesize_trace,
)
from .errors import PhysicsFlag, SchemaError, TrapkitError
from .estimation import (
    beta_crrb_bounds,
    extract_beta_rbcr,
    extract_sigma_p,
    fit_decay,
    fit_heating_rate,
    fit_loading,
)
from .overlap import effective_volume, mt_volume, varsigma, varsigma_branch
from .traceio import jsonable, read_runs, read_trace, sha256_file, write_report, write_trace
from .units import to_si

SEED_ENV_VAR = "TRAPKIT_SEED"


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _resolve_seed(flag_value: int | None, config_value: int | None = None) -> int:
    """Seed precedence: --seed flag, then config file, then environment, then 0."""
    if flag_value is not None:
        return flag_value
    if config_value is not None:
        return config_value
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            raise SchemaError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")
    return 0


def _emit_report(out_dir: str, name: str, command: str, inputs: dict, results: dict, flags: list) -> str:
    path = os.path.join(out_dir, name)
    report = {
        "command": command,
        "version": __version__,
        "generated_at": _utc_now(),
        "inputs": inputs,
        "results": results,
        "flags": flags,
    }
    write_report(path, report)
    return path


def _input_entry(path: str) -> dict:
    return {"path": path, "sha256": sha256_file(path)}


def _fmt_value(value: float) -> str:
    return f"{value:.6g}"


# --- simulate ---------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    cfg = load_simulate_config(args.config)
    seed = _resolve_seed(args.seed, cfg.noise_seed)
    times = np.arange(int(np.floor(cfg.t_end * cfg.sample_rate)) + 1, dtype=float) / cfg.sample_rate
    traj = integrate_coupled(
        cfg.model,
        cfg.n_cr0,
        cfg.n_rb0,
        cfg.t_end,
        rel_tol=args.rel_tol,
        abs_tol=args.abs_tol,
        t_eval=times,
    )

    common_meta = {
        "loading_rate_rb_per_s": f"{cfg.model.loading_rate_rb:.17g}",
        "gamma_rb_per_s": f"{cfg.model.gamma_rb:.17g}",
        "gamma_cr_per_s": f"{cfg.model.gamma_cr:.17g}",
        "beta_rbcr_m3_per_s": f"{cfg.model.beta_rbcr:.17g}",
        "beta_crrb_m3_per_s": f"{cfg.model.beta_crrb:.17g}",
        "effective_volume_m3": f"{cfg.model.v_bar:.17g}",
        "sample_rate_hz": f"{cfg.sample_rate:.17g}",
    }
    written = []
    for species, offset in (("cr", 0), ("rb", 1)):
        meta = dict(common_meta)
        meta["species"] = species
        if cfg.has_noise:
            # one stream per species so the two traces are independent
            noise = cfg.noise_spec(seed + offset)
            trace = synthesize_trace(traj, noise, cfg.sample_rate, species=species)
            meta["noise_seed"] = str(noise.seed)
        else:
            trace = DataTrace(times=traj.times, values=traj.species(species), value_kind="atom_number")
        path = os.path.join(args.out, f"n_{species}.csv")
        write_trace(path, trace, metadata=meta)
        written.append(path)

    if args.figures:
        from .figures import save_trajectory_figure

        written.append(save_trajectory_figure(os.path.join(args.out, "trajectory.png"), traj))

    results = {
        "model": {
            "loading_rate_rb": cfg.model.loading_rate_rb,
            "gamma_rb": cfg.model.gamma_rb,
            "gamma_cr": cfg.model.gamma_cr,
            "beta_rbcr": cfg.model.beta_rbcr,
            "beta_crrb": cfg.model.beta_crrb,
            "v_bar": cfg.model.v_bar,
        },
        "initial": {"n_cr": cfg.n_cr0, "n_rb": cfg.n_rb0},
        "time": {"t_end": cfg.t_end, "sample_rate": cfg.sample_rate},
        "noise": {
            "relative_sigma": cfg.relative_sigma,
            "additive_sigma": cfg.additive_sigma,
            "seed": seed if cfg.has_noise else None,
        },
        "solver": {
            "rel_tol": traj.rel_tol,
            "abs_tol": traj.abs_tol,
            "n_steps": traj.n_steps,
            "terminated_early": traj.terminated_early,
        },
        "outputs": written,
        "final": {"n_cr": float(traj.n_cr[-1]), "n_rb": float(traj.n_rb[-1])},
    }
    inputs = {"config": _input_entry(args.config)}
    lines = [f"wrote {p}" for p in written]
    lines.append(
        f"final atom numbers: cr={_fmt_value(traj.n_cr[-1])} rb={_fmt_value(traj.n_rb[-1])}"
        + (" (terminated early)" if traj.terminated_early else "")
    )
    return "simulate_report.json", inputs, results, lines


# --- fit --------------------------------------------------------------------

_FITTERS = {
    "loading": fit_loading,
    "decay": fit_decay,
    "heating": fit_heating_rate,
}


def _cmd_fit(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    trace, metadata = read_trace(args.trace)
    result = _FITTERS[args.kind](trace)

    if args.figures:
        from .figures import save_trace_fit_figure

        p = result.params
        model_times = np.linspace(trace.times[0], trace.times[-1], 400)
        if args.kind == "loading":
            model_values = one_body_loading(p["loading_rate"], p["gamma"], p["n0"], model_times)
        elif args.kind == "decay":
            model_values = one_body_decay(p["gamma"], p["n0"], model_times)
        else:
            model_values = p["t0"] + p["rate"] * model_times
        save_trace_fit_figure(os.path.join(args.out, f"fit_{args.kind}.png"), trace,
                              model_times, model_values, f"{args.kind} fit")

    results = {
        "kind": args.kind,
        "params": result.params,
        "uncertainties": result.uncertainties,
        "residual_rms": result.residual_rms,
        "dof": result.dof,
        "converged": result.converged,
        "details": result.details,
        "n_points": len(trace),
        "trace_metadata": metadata,
    }
    inputs = {"trace": _input_entry(args.trace)}
    lines = [
        f"{name} = {_fmt_value(value)} +/- {_fmt_value(result.uncertainties[name])}"
        for name, value in result.params.items()
    ]
    return f"fit_{args.kind}_report.json", inputs, results, lines


# --- sigma-p ----------------------------------------------------------------


def _cmd_sigma_p(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    runs = read_runs(args.runs)
    field = load_field_config(args.field_config)
    gamma_rb = args.gamma_bg if args.gamma_bg is not None else field.gamma_rb
    result = extract_sigma_p(
        runs,
        transition=field.transition,
        detuning=field.detuning,
        ionizing_wavelength=field.ionizing_wavelength,
        gamma_rb=gamma_rb,
        pool_gamma_bg=args.pool_gamma_bg,
    )
    sigma_p = result.params["sigma_p"]
    sigma_err = result.uncertainties["sigma_p"]

    if args.figures:
        from .figures import save_sigma_p_figure

        save_sigma_p_figure(os.path.join(args.out, "sigma_p.png"), result.details["groups"], sigma_p)

    results = {
        "sigma_p_m2": sigma_p,
        "sigma_p_err_m2": sigma_err,
        "residual_rms": result.residual_rms,
        "dof": result.dof,
        "n_runs": len(runs),
        "details": result.details,
    }
    inputs = {"runs": _input_entry(args.runs)}
    if args.field_config is not None:
        inputs["field_config"] = _input_entry(args.field_config)
    lines = [
        f"sigma_p = {sigma_p:.6e} +/- {sigma_err:.3e} m^2 "
        f"({len(result.details['groups'])} intensity groups)"
    ]
    return "sigma_p_report.json", inputs, results, lines


# --- beta -------------------------------------------------------------------


def _cmd_beta_slope(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    direct = [args.alpha is not None, args.factor is not None]
    traced = [args.rb_trace is not None, args.cr_trace is not None, args.vbar is not None]
    inputs: dict = {}
    if all(direct) and not any(traced):
        alpha = args.alpha
        factor = args.factor
        mode = "direct"
    elif all(traced) and not any(direct):
        rb_trace, rb_meta = read_trace(args.rb_trace)
        cr_trace, cr_meta = read_trace(args.cr_trace)
        if len(rb_trace) != len(cr_trace) or not np.allclose(rb_trace.times, cr_trace.times):
            raise SchemaError("rb and cr traces must share one time grid")
        alpha = slope_at_origin(rb_trace.times, rb_trace.values, args.window)
        mask = rb_trace.times <= args.window
        factor = float(np.mean(rb_trace.values[mask] * cr_trace.values[mask] / args.vbar))
        inputs["rb_trace"] = _input_entry(args.rb_trace)
        inputs["cr_trace"] = _input_entry(args.cr_trace)
        mode = "traces"
    else:
        missing = []
        if not all(direct):
            missing.append("--alpha and --factor")
        if not all(traced):
            missing.append("--rb-trace, --cr-trace and --vbar")
        raise SchemaError(
            "beta slope needs either the direct pair or the trace triple, "
            f"got a partial set; complete one of: {'; or '.join(missing)}"
        )

    beta = extract_beta_rbcr(alpha, args.loading_rate, factor)
    results = {
        "mode": mode,
        "alpha_per_s": alpha,
        "loading_rate_per_s": args.loading_rate,
        "factor_mean": factor,
        "window_s": args.window if mode == "traces" else None,
        "beta_rbcr_m3_per_s": beta,
    }
    lines = [f"beta_rbcr = {beta:.6e} m^3/s (alpha = {_fmt_value(alpha)} /s, factor = {_fmt_value(factor)})"]
    return "beta_slope_report.json", inputs, results, lines


def _cmd_beta_bounds(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    lo, hi = beta_crrb_bounds(args.delta_n_rate, args.f_min, args.f_max)
    results = {
        "delta_n_rate_per_s": args.delta_n_rate,
        "f_min": args.f_min,
        "f_max": args.f_max,
        "beta_crrb_lower_m3_per_s": lo,
        "beta_crrb_upper_m3_per_s": hi,
    }
    lines = [f"beta_crrb in [{lo:.6e}, {hi:.6e}] m^3/s"]
    return "beta_bounds_report.json", {}, results, lines


def _cmd_beta(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    if args.mode == "slope":
        return _cmd_beta_slope(args)
    return _cmd_beta_bounds(args)


# --- overlap ----------------------------------------------------------------


def _parse_quantity_arg(pair: list[str], flag: str, tag: str) -> float:
    try:
        value = float(pair[0])
    except ValueError:
        raise SchemaError(f"{flag} value must be a number, got {pair[0]!r}")
    return to_si(value, pair[1], tag=tag)


def _cmd_overlap(args: argparse.Namespace) -> tuple[str, dict, dict, list[str]]:
    sigma_bar = _parse_quantity_arg(args.sigma_bar, "--sigma-bar", "length")
    z = _parse_quantity_arg(args.z, "--z", "length")
    factor = varsigma(sigma_bar, z)
    results = {
        "sigma_bar_m": sigma_bar,
        "z_m": z,
        "size_ratio": sigma_bar / z,
        "varsigma": factor,
        "branch": varsigma_branch(sigma_bar, z),
        "mt_volume_m3": mt_volume(z),
        "effective_volume_m3": effective_volume(sigma_bar, z),
    }
    lines = [
        f"varsigma = {factor:.12g} ({results['branch']})",
        f"mt_volume = {results['mt_volume_m3']:.6e} m^3",
        f"effective_volume = {results['effective_volume_m3']:.6e} m^3",
    ]
    return "overlap_report.json", {}, results, lines


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapkit",
        description="Trap-loss simulation and parameter extraction for a two-species cold atom experiment.",
    )
    parser.add_argument("--version", action="version", version=f"trapkit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="integrate the coupled loss model and write per-species traces")
    p_sim.add_argument("--config", required=True, help="JSON config with model, initial, time, noise sections")
    p_sim.add_argument("--seed", type=int, default=None, help="noise seed (overrides config and environment)")
    p_sim.add_argument("--rel-tol", type=float, default=1e-9)
    p_sim.add_argument("--abs-tol", type=float, default=1e-3)
    p_sim.set_defaults(handler=_cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a single-species model to one trace")
    p_fit.add_argument("kind", choices=sorted(_FITTERS))
    p_fit.add_argument("--trace", required=True, help="CSV trace to fit")
    p_fit.set_defaults(handler=_cmd_fit)

    p_sig = sub.add_parser("sigma-p", help="extract the photoionization cross section from rate runs")
    p_sig.add_argument("--runs", required=True, help="CSV of (rb intensity, ionizing intensity, total rate) rows")
    p_sig.add_argument("--field-config", default=None, help="JSON overriding transition and detuning defaults")
    p_sig.add_argument("--gamma-bg", type=float, default=None, help="fixed background rate in 1/s")
    p_sig.add_argument(
        "--pool-gamma-bg",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="share one background rate across intensity groups",
    )
    p_sig.set_defaults(handler=_cmd_sigma_p)

    p_beta = sub.add_parser("beta", help="interspecies loss coefficient from slopes or from bounds")
    p_beta.add_argument("mode", choices=["slope", "bounds"])
    p_beta.add_argument("--loading-rate", type=float, default=None, help="rb loading rate in atoms/s (slope mode)")
    p_beta.add_argument("--alpha", type=float, default=None, help="initial rb slope in atoms/s")
    p_beta.add_argument("--factor", type=float, default=None, help="window-mean of n_cr*n_rb/v_bar in atoms^2/m^3")
    p_beta.add_argument("--rb-trace", default=None)
    p_beta.add_argument("--cr-trace", default=None)
    p_beta.add_argument("--vbar", type=float, default=None, help="effective volume in m^3")
    p_beta.add_argument("--window", type=float, default=1.0, help="slope window in s")
    p_beta.add_argument("--delta-n-rate", type=float, default=None, help="cr loss rate difference in atoms/s")
    p_beta.add_argument("--f-min", type=float, default=None)
    p_beta.add_argument("--f-max", type=float, default=None)
    p_beta.set_defaults(handler=_cmd_beta)

    p_ov = sub.add_parser("overlap", help="overlap suppression factor and effective volume")
    p_ov.add_argument("--sigma-bar", nargs=2, metavar=("VALUE", "UNIT"), required=True)
    p_ov.add_argument("--z", nargs=2, metavar=("VALUE", "UNIT"), required=True)
    p_ov.set_defaults(handler=_cmd_overlap)

    for p in (p_sim, p_fit, p_sig, p_beta, p_ov):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--figures", action="store_true", help="also render PNG figures")

    return parser


def _validate_beta_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.subcommand != "beta":
        return
    if args.mode == "slope":
        if args.loading_rate is None:
            parser.error("beta slope requires --loading-rate")
    else:
        missing = [
            flag
            for flag, value in (
                ("--delta-n-rate", args.delta_n_rate),
                ("--f-min", args.f_min),
                ("--f-max", args.f_max),
            )
            if value is None
        ]
        if missing:
            parser.error(f"beta bounds requires {', '.join(missing)}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_beta_args(parser, args)
    os.makedirs(args.out, exist_ok=True)

    try:
        with warnings.catch_warnings(record=True) as captured:
            warnings.simplefilter("always")
            report_name, inputs, results, lines = args.handler(args)
        flags = [
            {"category": type(w.message).__name__, "message": str(w.message)}
            for w in captured
            if issubclass(w.category, UserWarning)
        ]
        for flag in flags:
            print(f"warning [{flag['category']}]: {flag['message']}", file=sys.stderr)
        report_path = _emit_report(args.out, report_name, args.subcommand, inputs, jsonable(results), flags)
    except TrapkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for line in lines:
        print(line)
    print(f"report: {report_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
