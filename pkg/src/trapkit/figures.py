"""File-only figure rendering for CLI reports.

Importing this module selects the Agg backend: these helpers exist to
write PNGs next to the CSV/JSON outputs, never to open windows. The
PNG metadata text chunk is stripped so identical runs give identical
bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def save_trajectory_figure(path: str, traj, title: str = "coupled two-species run") -> str:
    """Two stacked panels: magnetically trapped and MOT atom numbers."""
    fig, (ax_cr, ax_rb) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 5.0))
    ax_cr.plot(traj.times, traj.n_cr, color="tab:blue", lw=1.2)
    ax_cr.set_ylabel("N_Cr (atoms)")
    ax_cr.set_title(title)
    ax_rb.plot(traj.times, traj.n_rb, color="tab:red", lw=1.2)
    ax_rb.set_ylabel("N_Rb (atoms)")
    ax_rb.set_xlabel("time (s)")
    for ax in (ax_cr, ax_rb):
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_trace_fit_figure(path: str, trace, model_times, model_values, title: str) -> str:
    """Measured points with the fitted model curve."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if trace.sigma is not None:
        ax.errorbar(trace.times, trace.values, yerr=trace.sigma, fmt=".", ms=3,
                    color="0.4", ecolor="0.75", elinewidth=0.8, label="data")
    else:
        ax.plot(trace.times, trace.values, ".", ms=3, color="0.4", label="data")
    ax.plot(model_times, model_values, color="tab:red", lw=1.5, label="fit")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("temperature (K)" if trace.value_kind == "temperature" else "atoms")
    ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def save_sigma_p_figure(path: str, group_points: list, pooled_sigma_p: float) -> str:
    """Ionization rate vs photon flux per intensity group, with fits."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for entry in group_points:
        phi = entry["phi"]
        label = f"I_Rb = {entry['rb_intensity'] / 10.0:g} mW/cm^2"
        points = ax.plot(phi, entry["gamma_if"], "o", ms=4, label=label)
        if len(phi):
            top = max(phi)
            ax.plot([0.0, top], [0.0, entry["sigma_p"] * top], "--", lw=1.0,
                    color=points[0].get_color(), alpha=0.7)
    ax.set_xlabel("photon flux (1/m^2 s)")
    ax.set_ylabel("ionization rate (1/s)")
    ax.set_title(f"pooled cross section {pooled_sigma_p:.3e} m^2")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path
