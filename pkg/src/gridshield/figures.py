"""Figure rendering for the report path.

Each helper writes one PNG next to the delimited output and returns the
path. Rendering is headless (Agg) and deterministic.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 10,
    "font.size": 10,
    "legend.fontsize": 9,
    "lines.linewidth": 1.6,
}


def _new_axes():
    plt.rcParams.update(STYLE)
    fig, ax = plt.subplots()
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_utilization(report, path) -> Path:
    fig, ax = _new_axes()
    t = [p[0] for p in report.utilization_series]
    u = [p[1] for p in report.utilization_series]
    ax.plot(t, u, color="tab:red")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("link utilization")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"Bottleneck utilization, {report.defender_count} defender(s)")
    return _save(fig, path)


def plot_active_bots(report, path) -> Path:
    fig, ax = _new_axes()
    t = [p[0] for p in report.active_bot_series]
    n = [p[1] for p in report.active_bot_series]
    ax.plot(t, n, color="tab:purple")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("active bots")
    ax.set_title(f"Active attacking units, {report.defender_count} defender(s)")
    return _save(fig, path)


def plot_sweep(reports, path) -> Path:
    """Mean utilization, delay, and cancellation against defender count."""
    plt.rcParams.update(STYLE)
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))
    by_count: dict[int, list] = {}
    for r in reports:
        by_count.setdefault(r.defender_count, []).append(r)
    counts = sorted(by_count)

    def mean(values):
        return sum(values) / len(values)

    utils = [mean([r.mean_utilization for r in by_count[c]]) for c in counts]
    delays = [mean([r.benign_delay_mean * 1000 for r in by_count[c]]) for c in counts]
    cancels = [mean([r.cancellation_rate for r in by_count[c]]) for c in counts]

    for ax, values, label in zip(
        axes,
        (utils, delays, cancels),
        ("mean utilization", "benign delay (ms)", "cancellation rate"),
    ):
        ax.plot(counts, values, marker="o")
        ax.set_xlabel("defenders")
        ax.set_ylabel(label)
    fig.suptitle("Joint defense benefit vs defender count")
    return _save(fig, path)


def plot_phase_portrait(trajectory, equilibrium, path) -> Path:
    fig, ax = _new_axes()
    u = [s.num_unit for s in trajectory]
    a = [s.num_actv for s in trajectory]
    ax.plot(u, a, color="tab:blue", label="orbit")
    ax.plot(*equilibrium.coexistence, "r*", markersize=12, label="coexistence")
    ax.set_xlabel("defending units")
    ax.set_ylabel("active attacking units")
    ax.legend()
    ax.set_title("Phase portrait")
    return _save(fig, path)


def plot_expense_table(rows, max_peers, path) -> Path:
    fig, ax = _new_axes()
    peers = list(range(1, max_peers + 1))
    for row in rows:
        base, cells = row[0], row[1:]
        ax.plot(peers, [float(c) for c in cells], marker="o",
                label=f"base ${base}")
    ax.set_xlabel("cooperating peers")
    ax.set_ylabel("attack expense ($)")
    ax.legend()
    ax.set_title("Expense to compromise one object")
    return _save(fig, path)
