"""Static line plots rendered from a run's series CSV."""
import csv

import numpy as np


def read_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body]) if body else np.zeros((0, len(header)))
    return header, data


def plot_series(csv_path, png_path, title=None):
    """Energy drift, monitor drifts and constraint residuals against time."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_series(csv_path)
    t = data[:, header.index("time")]
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    groups = [("energy", [h for h in header if h == "energy"]),
              ("monitor drift", [h for h in header if h.startswith("monitor:")]),
              ("constraint max-norm", [h for h in header if h.startswith("constraint:")])]
    for ax, (label, cols) in zip(axes, groups):
        for col in cols:
            y = data[:, header.index(col)]
            if label != "constraint max-norm":
                y0 = y[0] if y.size else 0.0
                y = np.abs(y - y0) / (abs(y0) if y0 != 0.0 else 1.0)
            ax.semilogy(t, np.maximum(y, 1e-300), label=col)
        ax.set_ylabel(label if label == "constraint max-norm" else f"relative {label}")
        if cols:
            ax.legend(fontsize=7)
        else:
            ax.text(0.5, 0.5, "none", transform=ax.transAxes, ha="center")
    axes[-1].set_xlabel("time")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(png_path, dpi=100)
    plt.close(fig)
    return png_path
