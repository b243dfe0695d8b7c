"""Rendering of the two demo figure types from parsed results.

Plotting is read-only over already-parsed CSVs; it never re-runs
experiments.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import EmptyResults


def _check(results):
    if not results or all(not r.aggregate for r in results):
        raise EmptyResults("no rate samples to plot")


def plot_rates(results: list, path) -> str:
    """Aggregate arrival-rate curve per result, one labeled line each."""
    _check(results)
    fig, ax = plt.subplots(figsize=(7, 4))
    for r in results:
        xs = [t for t, _ in r.aggregate]
        ys = [bps / 1e9 for _, bps in r.aggregate]
        ax.plot(xs, ys, label=r.label)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("aggregate arrival rate (Gbps)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


TIMING_PHASES = (("topology_build_s", "build"), ("run_wall_s", "run"))


def plot_timings(results: list, path) -> str:
    """Grouped bar chart of wall-clock phases, one group per result."""
    _check(results)
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(TIMING_PHASES)
    for j, (key, phase) in enumerate(TIMING_PHASES):
        xs = [i + j * width for i in range(len(results))]
        ys = [r.report_float(key) for r in results]
        ax.bar(xs, ys, width=width, label=phase)
    ax.set_xticks([i + width / 2 for i in range(len(results))])
    ax.set_xticklabels([r.label for r in results], rotation=30, ha="right")
    ax.set_ylabel("wall time (s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)
