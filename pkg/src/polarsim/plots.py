"""Report figures, rendered with the Agg backend to PNG files.

Everything drawn here is computed by the modules first; figures only
restate report data, so two runs with the same config produce
byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 120


def _finish(fig, path):
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _direction_label(vec) -> str:
    return "({:.3g}, {:.3g}, {:.3g})".format(*vec)


def strategy_figure(path, d, predicted, groups) -> None:
    """Running outcome mean plus per-observable frequency bars."""
    fig, (ax_run, ax_grp) = plt.subplots(1, 2, figsize=(9.6, 3.8))
    k = np.arange(1, d.size + 1)
    ax_run.plot(k, np.cumsum(d) / k, lw=1.0, label="running mean of d")
    ax_run.plot(
        k,
        np.cumsum(2.0 * predicted - 1.0) / k,
        lw=1.0,
        ls="--",
        label="predicted",
    )
    ax_run.set_xlabel("event k")
    ax_run.set_ylabel("mean outcome")
    ax_run.set_ylim(-1.05, 1.05)
    ax_run.legend(loc="lower right", fontsize=8)
    ax_run.grid(alpha=0.3)

    labels = [_direction_label(g.direction) for g in groups]
    nus = [g.frequency.nu for g in groups]
    errs = [g.frequency.stderr for g in groups]
    preds = [g.predicted_frequency for g in groups]
    x = np.arange(len(groups))
    ax_grp.bar(x, nus, yerr=errs, capsize=3, color="#4878d0", label="observed")
    ax_grp.plot(x, preds, "k_", markersize=18, label="predicted")
    ax_grp.set_xticks(x)
    ax_grp.set_xticklabels(labels, fontsize=7)
    ax_grp.set_xlabel("observable direction")
    ax_grp.set_ylabel("frequency of +1")
    ax_grp.set_ylim(0.0, 1.05)
    ax_grp.legend(loc="lower right", fontsize=8)
    ax_grp.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    _finish(fig, path)


def dynamics_figure(path, ts, ratios, p1s, threshold, revivals, pulse) -> None:
    """Coherence visibility and channel population along the evolution."""
    fig, (ax_c, ax_p) = plt.subplots(2, 1, figsize=(7.2, 5.4), sharex=True)
    ax_c.plot(ts, ratios, lw=1.2)
    ax_c.axhline(threshold, color="crimson", lw=0.8, ls="--", label="threshold")
    for i, t in enumerate(revivals):
        ax_c.axvline(
            t, color="seagreen", lw=0.8, ls=":", label="revival" if i == 0 else None
        )
    ax_c.set_ylabel("coherence ratio")
    ax_c.set_ylim(-0.05, 1.1)
    ax_c.legend(loc="lower right", fontsize=8)
    ax_c.grid(alpha=0.3)

    ax_p.plot(ts, p1s, lw=1.2, color="#4878d0")
    ax_p.axvspan(pulse[0], pulse[1], color="gold", alpha=0.15, label="pulse window")
    ax_p.set_xlabel("time")
    ax_p.set_ylabel("P(vertical channel)")
    ax_p.set_ylim(-0.05, 1.05)
    ax_p.legend(loc="lower right", fontsize=8)
    ax_p.grid(alpha=0.3)
    fig.tight_layout()
    _finish(fig, path)


def epr_figure(path, labels, empirical, stderrs, analytic) -> None:
    """Empirical vs analytic covariance per setting pair."""
    fig, ax = plt.subplots(figsize=(6.8, 3.8))
    x = np.arange(len(labels))
    width = 0.38
    ax.bar(x - width / 2, empirical, width, yerr=stderrs, capsize=3,
           color="#4878d0", label="empirical")
    ax.bar(x + width / 2, analytic, width, color="#bbbbbb", label="analytic")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("covariance")
    ax.set_ylim(-1.15, 1.15)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    _finish(fig, path)


def chsh_figure(path, labels, empirical, stderrs, analytic, s_value, s_stderr) -> None:
    """Per-term correlations and the resulting CHSH sum."""
    fig, ax = plt.subplots(figsize=(6.8, 3.8))
    x = np.arange(len(labels))
    width = 0.38
    ax.bar(x - width / 2, empirical, width, yerr=stderrs, capsize=3,
           color="#4878d0", label="empirical E")
    ax.bar(x + width / 2, analytic, width, color="#bbbbbb", label="analytic E")
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("correlation E")
    ax.set_ylim(-1.15, 1.15)
    ax.set_title(
        "S = {:.4f} +/- {:.4f}   (local deterministic max 2, quantum 2*sqrt(2))".format(
            s_value, s_stderr
        ),
        fontsize=9,
    )
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    _finish(fig, path)


def qkd_figure(path, counts, qber) -> None:
    """Key material at each protocol stage plus the estimated error rate."""
    fig, ax = plt.subplots(figsize=(6.2, 3.8))
    labels = list(counts)
    values = [counts[k] for k in labels]
    ax.bar(np.arange(len(labels)), values, color="#4878d0")
    ax.set_xticks(np.arange(len(labels)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("bits")
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=8)
    ax.set_title("QBER estimate: {:.4f}".format(qber), fontsize=9)
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    _finish(fig, path)
