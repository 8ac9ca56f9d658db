"""Figure rendering for the report paths: risk-curve panels for simulation
studies, posterior-probability profiles for decision runs, and log-log scaling
plots for benchmarks.  Figures are written next to the delimited outputs."""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_PANORDER = (("fp", "fn"), ("fdp", "fnp"), ("fdp", "mdp"), ("fdp", "amdp"))


def _panels_for(report):
    names = set(report.procedures())
    panels = [("fp", "fn"), ("fdp", "fnp")]
    if any(n.startswith("FDP_AMDP") for n in names):
        panels.append(("fdp", "amdp"))
    else:
        panels.append(("fdp", "mdp"))
    return panels


def render_risk_figure(report, path) -> str:
    """One panel per risk pair; each procedure contributes its sweep curve
    (cost ratios for the Bayes rules, levels for the step-up baseline)."""
    panels = _panels_for(report)
    fig, axes = plt.subplots(1, len(panels), figsize=(5.0 * len(panels), 4.2))
    if len(panels) == 1:
        axes = [axes]
    for ax, (xm, ym) in zip(axes, panels):
        for proc in report.procedures():
            x, y = report.curve(proc, xm, ym)
            style = dict(marker="o", linestyle="--") if proc == "BH" else dict(marker="s")
            ax.plot(x, y, label=proc, markersize=4, **style)
        ax.set_xlabel(f"mean {xm.upper()}")
        ax.set_ylabel(f"mean {ym.upper()}")
        ax.grid(True, alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.suptitle(f"{report.config.scenario}: empirical risk pairs "
                 f"({report.config.n_sims} replicates)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_decision_figure(phi, action, k_star, path, title="posterior profile") -> str:
    """Sorted posterior alternative probabilities with the rejected components
    highlighted and the selected rejection count marked."""
    phi = np.asarray(phi, dtype=np.float64)
    action = np.asarray(action)
    order = np.argsort(-phi, kind="stable")
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ranks = np.arange(1, phi.size + 1)
    colors = np.where(action[order] == 1, "tab:red", "tab:gray")
    ax.scatter(ranks, phi[order], c=colors, s=12)
    ax.axvline(k_star + 0.5, color="tab:blue", linestyle="--", linewidth=1,
               label=f"k* = {k_star}")
    ax.set_xlabel("component rank (by posterior probability)")
    ax.set_ylabel("posterior alternative probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_bench_figure(times, path) -> str:
    """Log-log wall time against problem size with fitted growth exponents;
    times maps solver-path name to (sizes, seconds) arrays."""
    fig, ax = plt.subplots(figsize=(6.0, 4.4))
    for name, (sizes, secs) in times.items():
        sizes = np.asarray(sizes, dtype=np.float64)
        secs = np.asarray(secs, dtype=np.float64)
        slope = fitted_slope(sizes, secs)
        ax.loglog(sizes, secs, marker="o", label=f"{name} (slope {slope:.2f})")
    ax.set_xlabel("number of components")
    ax.set_ylabel("seconds per solve")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title("solver scaling")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def fitted_slope(sizes, secs) -> float:
    """Least-squares slope of log time against log size."""
    sizes = np.asarray(sizes, dtype=np.float64)
    secs = np.asarray(secs, dtype=np.float64)
    if sizes.size < 2:
        return float("nan")
    return float(np.polyfit(np.log(sizes), np.log(np.maximum(secs, 1e-9)), 1)[0])
