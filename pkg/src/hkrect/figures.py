"""Figure rendering for the report path.

Everything draws with the Agg backend straight to files; the CLI report
command writes these PNGs alongside its CSV output.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_gamma_curve", "save_beta_histogram", "save_cloud_projection"]


def save_gamma_curve(reports, path, labels=None):
    """Packing ratio against threshold for one or more reports."""
    if not isinstance(reports, (list, tuple)):
        reports = [reports]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for i, rep in enumerate(reports):
        eps = [row.epsilon for row in rep.rows]
        gam = [row.gamma_hat for row in rep.rows]
        label = labels[i] if labels else f"levels {rep.j_min}..{rep.j_max}"
        ax.plot(eps, gam, "o-", label=label)
    ax.set_xlabel("threshold")
    ax.set_ylabel("packing ratio")
    ax.set_title("bad-cube packing against flatness threshold")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_beta_histogram(profile, path, by_level=True):
    """Distribution of beta values from a sweep, stacked per level when asked."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if by_level:
        levels = sorted({bv.scale for _, bv in profile})
        for s in levels:
            vals = [bv.value for _, bv in profile if bv.scale == s]
            ax.hist(vals, bins=24, alpha=0.55, label=f"scale {s:.3g}")
        ax.legend(fontsize=7)
    else:
        ax.hist([bv.value for _, bv in profile], bins=32)
    ax.set_xlabel("beta")
    ax.set_ylabel("cubes")
    ax.set_title("flatness per cube ball")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_cloud_projection(cloud, path, max_points=20_000):
    """Two coordinate projections of the cloud, colored by piece label."""
    n = len(cloud)
    idx = np.arange(n)
    if n > max_points:
        idx = np.random.Generator(np.random.PCG64(0)).choice(n, max_points, replace=False)
    style = {"s": 2}
    if cloud.labels is not None:
        style = {"s": 2, "c": cloud.labels[idx], "cmap": "tab10"}
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.2))
    axes[0].scatter(cloud.v[idx, 0], cloud.v[idx, 1], **style)
    axes[0].set_xlabel("v1")
    axes[0].set_ylabel("v2")
    axes[1].scatter(cloud.v[idx, 0], cloud.t[idx], **style)
    axes[1].set_xlabel("v1")
    axes[1].set_ylabel("t")
    fig.suptitle("cloud projections")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
