"""File-rendered figures for the report paths.

matplotlib loads lazily with the Agg backend so headless runs and library
users who never plot pay nothing.
"""

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def forecast_figure(path, targets, predictions, sample_period_s=0.5,
                    anchors=None, label="model"):
    """Actual vs predicted delivery ratio over the test timeline."""
    plt = _plt()
    targets = np.asarray(targets, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if anchors is None:
        anchors = np.arange(targets.size)
    minutes = np.asarray(anchors) * sample_period_s / 60.0
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(minutes, targets, lw=0.9, label="actual", color="#444444")
    ax.plot(minutes, predictions, lw=0.9, label=label, color="#c0392b", alpha=0.85)
    ax.set_xlabel("time (min)")
    ax.set_ylabel("delivery ratio")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="lower left", frameon=False)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def error_histogram_figure(path, errors_pct, label="model", bins=60):
    """Distribution of signed prediction errors, in percent."""
    plt = _plt()
    errors_pct = np.asarray(errors_pct, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(errors_pct, bins=bins, color="#2c6fbb", alpha=0.85)
    ax.axvline(0.0, color="#444444", lw=0.8)
    ax.set_xlabel("prediction error (%)")
    ax.set_ylabel("count")
    ax.set_title(label, fontsize=10)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def training_curve_figure(path, traces):
    """Per-epoch validation loss for one or more labeled runs."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for label, trace in traces.items():
        epochs = np.arange(1, len(trace) + 1)
        ax.plot(epochs, trace, marker="o", ms=3, lw=1.0, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation MSE")
    ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.25, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
