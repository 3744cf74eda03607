"""Figures drawn from the same numbers that go into the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_LABELS = {
    "num_antennas": "Number of antennas N",
    "rate_target": "Minimum rate r (bits/s/Hz)",
    "span": "Span L (wavelengths)",
}


def _save(fig, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps repeated renders identical
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)


def plot_convergence(results, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for L, res in results.items():
        ax.plot(range(len(res.trace)), res.trace.objectives, marker=".", label=f"L = {L:g}")
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Total transmit power")
    ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_sweep(parameter, records, path):
    xs = [r.value for r in records]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(xs, [r.proposed for r in records], "o-", label="Proposed")
    ax.errorbar(xs, [r.rpa_mean for r in records], yerr=[r.rpa_se for r in records],
                fmt="s--", label="RPA")
    ax.plot(xs, [r.fpa for r in records], "^:", label="FPA")
    ax.set_xlabel(_LABELS.get(parameter, parameter))
    ax.set_ylabel("Total transmit power")
    ax.grid(alpha=0.3)
    ax.legend()
    _save(fig, path)


def plot_complexity(rows, path):
    ms = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.plot(ms, [r[1] for r in rows], "o-", label="Closed-form gradient")
    ax.plot(ms, [r[2] for r in rows], "s--", label="Difference-quotient gradient")
    ax.set_xlabel("Number of users M")
    ax.set_ylabel("Complex multiplications")
    ax.grid(alpha=0.3)
    ax.legend()
    _save(fig, path)
