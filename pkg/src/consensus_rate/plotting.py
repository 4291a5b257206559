"""Figure rendering for CLI reports (matplotlib, non-interactive backend)."""

from __future__ import annotations

from collections import defaultdict


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def histogram_figure(report, path) -> None:
    """Bar chart of the ratio counts per 5% bin."""
    plt = _pyplot()
    edges = report.bin_edges
    widths = [b - a for a, b in zip(edges[:-1], edges[1:])]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(edges[:-1], report.counts, width=widths, align="edge", edgecolor="black")
    ax.set_xlabel("rho / rho bound")
    ax.set_ylabel("occurrences")
    ax.set_xlim(0, 1)
    ax.set_title(f"{report.trials} random two-periodic systems")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def sweep_figure(result, path) -> None:
    """Rate bound against gamma, one curve per tree count, with ``1 - gamma``."""
    plt = _pyplot()
    curves = defaultdict(list)
    for row in result.rows:
        curves[row["q"]].append((row["gamma"], row["rho_q"]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for q, pts in sorted(curves.items()):
        pts.sort()
        ax.plot([g for g, _ in pts], [r for _, r in pts], label=f"q={q}")
    gammas = sorted({row["gamma"] for row in result.rows})
    ax.plot(gammas, [1 - g for g in gammas], "k--", label="1 - gamma")
    ax.set_xlabel("gamma")
    ax.set_ylabel("rate bound")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
