"""Figure rendering for experiment result tables.

Each experiment kind gets one matplotlib figure written next to its CSV.
The CSV stays the machine-readable contract; the figures are the quick
visual check that a run reproduced the expected shapes.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .experiments import ResultTable  # noqa: E402

__all__ = ["render_table"]

_MARKERS = {"min": "o", "harmonic": "s"}


def _finite(x):
    return x is not None and isinstance(x, (int, float)) and math.isfinite(x)


def _plot_collision_curve(table: ResultTable, ax):
    col = {name: i for i, name in enumerate(table.columns)}
    policies = sorted({r[col["policy"]] for r in table.rows})
    for policy in policies:
        rows = sorted((r for r in table.rows if r[col["policy"]] == policy),
                      key=lambda r: r[col["lambda_over_c"]])
        x = [r[col["lambda_over_c"]] for r in rows]
        analytic = [r[col["analytic"]] for r in rows]
        mc = [r[col["mc_rate"]] for r in rows]
        err = [3 * r[col["mc_stderr"]] for r in rows]
        if all(_finite(a) for a in analytic):
            ax.plot(x, analytic, "-", label=f"{policy} (numerical)")
        ax.errorbar(x, mc, yerr=err, fmt=_MARKERS.get(policy, "x"), mfc="none",
                    capsize=3, linestyle="none", label=f"{policy} (Monte Carlo)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\lambda/c$")
    ax.set_ylabel("collision probability")
    ax.set_title("Timer collision probability vs. spread ratio")


def _plot_topology_study(table: ResultTable, ax):
    col = {name: i for i, name in enumerate(table.columns)}
    cases = []
    for r in table.rows:
        if r[col["case"]] not in cases:
            cases.append(r[col["case"]])
    combos = sorted({(r[col["exponent_v"]], r[col["policy"]]) for r in table.rows})
    for v, policy in combos:
        ys = []
        for case in cases:
            match = [r for r in table.rows
                     if r[col["case"]] == case and r[col["policy"]] == policy
                     and r[col["exponent_v"]] == v]
            ys.append(match[0][col["collision"]] if match else math.nan)
        ax.plot(range(len(cases)), ys, marker=_MARKERS.get(policy, "x"),
                label=f"{policy}, v={v:g}")
    ax.set_xticks(range(len(cases)), cases)
    ax.set_yscale("log")
    ax.set_xlabel("topology case")
    ax.set_ylabel("collision probability")
    ax.set_title("Collision probability across relay placements")


def _plot_outage_curve(table: ResultTable, ax):
    col = {name: i for i, name in enumerate(table.columns)}
    rows = sorted(table.rows, key=lambda r: r[col["snr_db"]])
    x = [r[col["snr_db"]] for r in rows]
    pe = [r[col["pe"]] for r in rows]
    err = [3 * r[col["stderr"]] for r in rows]
    label = table.metadata.get("scheme", "outage")
    ax.errorbar(x, pe, yerr=err, fmt="o-", capsize=3, label=label)
    slope = table.metadata.get("diversity_slope")
    if slope is not None:
        ax.annotate(f"fitted diversity slope: {float(slope):.2f}",
                    xy=(0.04, 0.06), xycoords="axes fraction")
    ax.set_yscale("log")
    ax.set_xlabel(r"SNR $\rho$ (dB)")
    ax.set_ylabel("outage probability")
    ax.set_title("Outage probability vs. SNR")


def _plot_proto_trace(table: ResultTable, ax):
    col = {name: i for i, name in enumerate(table.columns)}
    first = [r for r in table.rows if r[col["round"]] == 0]
    for r in first:
        relay = r[col["relay"]]
        ax.plot([r[col["cts_arrival"]]], [relay], "k|", markersize=12)
        mark = "^" if r[col["fired"]] else "v"
        color = "tab:red" if r[col["fired"]] else "tab:blue"
        ax.plot([r[col["scheduled_fire"]]], [relay], mark, color=color)
        if _finite(r[col["hear_time"]]):
            ax.plot([r[col["hear_time"]]], [relay], "g.", markersize=8)
    ax.set_xlabel("time (us)")
    ax.set_ylabel("relay index")
    ax.set_title("Round 0 timeline (|: CTS, ^/v: fired/suppressed, .: heard)")


def _plot_oracle_audit(table: ResultTable, ax):
    col = {name: i for i, name in enumerate(table.columns)}
    labels = [f"M{r[col['m']]}/{r[col['policy']][:4]}/{r[col['lambda_over_c']]:g}"
              for r in table.rows]
    z = [r[col["z_score"]] for r in table.rows]
    ax.bar(range(len(z)), z)
    ax.axhline(3.0, color="tab:red", linestyle="--", linewidth=1)
    ax.axhline(-3.0, color="tab:red", linestyle="--", linewidth=1)
    ax.set_xticks(range(len(labels)), labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("z score (MC vs numerical)")
    ax.set_title("Oracle audit residuals")


_PLOTTERS = {
    "collision_curve": _plot_collision_curve,
    "topology_study": _plot_topology_study,
    "outage_curve": _plot_outage_curve,
    "proto_trace": _plot_proto_trace,
    "oracle_audit": _plot_oracle_audit,
}


def render_table(table: ResultTable, path) -> None:
    """Render the figure for `table` to `path` (format from the extension)."""
    kind = table.metadata.get("experiment")
    plotter = _PLOTTERS.get(kind)
    if plotter is None:
        raise ValueError(f"no figure defined for experiment kind {kind!r}")
    fig, ax = plt.subplots(figsize=(7, 5))
    plotter(table, ax)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
