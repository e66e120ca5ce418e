"""Matplotlib figures for the CLI report path.

Everything renders off-screen to files; nothing here is needed by the
numerical library.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIELD_CMAP = "viridis"

_RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(ncols=1, width=4.5, height=3.2):
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, height), squeeze=False)
    return fig, axes[0]


def _save(fig, path):
    with plt.rc_context(_RC):
        fig.savefig(path)
    plt.close(fig)
    return path


def _field_panel(ax, a, title, vmin, vmax, mask=None):
    shown = np.ma.masked_where(~mask, a) if mask is not None else a
    ax.set_facecolor("black")
    im = ax.imshow(shown, aspect="auto", origin="lower", cmap=FIELD_CMAP, vmin=vmin, vmax=vmax,
                   interpolation="nearest")
    ax.set_xlabel("azimuth ray")
    ax.set_ylabel("range gate")
    ax.set_title(title)
    return im


def field_figure(path, a, title="reflectivity (dBZ)", mask=None):
    a = np.asarray(a)
    fig, (ax,) = _figure(height=4.0)
    im = _field_panel(ax, a, title, a.min(), a.max(), mask)
    fig.colorbar(im, ax=ax, label="dBZ")
    return _save(fig, path)


def singular_value_figure(path, sigma):
    sigma = np.asarray(sigma)
    fig, (ax,) = _figure()
    rel = sigma / sigma[0] if sigma.size and sigma[0] > 0 else sigma
    ax.semilogy(np.arange(1, sigma.size + 1), np.maximum(rel, np.finfo(float).tiny), ".-", ms=3)
    ax.set_xlabel("index k")
    ax.set_ylabel(r"$\sigma_k / \sigma_1$")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def histogram_figure(path, hists):
    fig, axes = _figure(ncols=len(hists), width=3.2)
    for ax, (name, h) in zip(axes, hists.items()):
        ax.stairs(h.counts, h.bin_edges, fill=True, alpha=0.8)
        ax.set_xlabel("dBZ")
        ax.set_title(name)
    axes[0].set_ylabel("cells")
    return _save(fig, path)


def residual_figure(path, history, tolerance=None):
    fig, (ax,) = _figure()
    ax.semilogy(np.arange(1, len(history) + 1), history)
    if tolerance is not None:
        ax.axhline(tolerance, ls="--", color="k", lw=0.8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative residual on observed set")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def doppler_figure(path, velocities, power, expected=None, nyquist=None):
    fig, (ax,) = _figure()
    floor = np.finfo(float).tiny
    ax.plot(velocities, 10 * np.log10(np.maximum(power, floor)), lw=1, label="periodogram")
    if expected is not None:
        ax.plot(velocities, 10 * np.log10(np.maximum(expected, floor)), "k--", lw=0.8, label="model")
        ax.legend()
    if nyquist is not None:
        ax.set_xlim(-nyquist, nyquist)
    ax.set_xlabel("radial velocity (m/s)")
    ax.set_ylabel("power (dBm per bin)")
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def pipeline_figure(path, original, lowrank, omega_mask, reconstructed, report=None):
    """Four-panel field comparison: original, low-rank, sampled, reconstructed."""
    panels = [
        ("original", original, None),
        ("low-rank input", lowrank, None),
        ("sampled entries", lowrank, omega_mask),
        ("SVT reconstruction", reconstructed, None),
    ]
    vmin = min(float(np.min(p[1])) for p in panels)
    vmax = max(float(np.max(p[1])) for p in panels)
    fig, axes = _figure(ncols=4, width=3.0, height=4.0)
    for ax, (title, a, mask) in zip(axes, panels):
        im = _field_panel(ax, np.asarray(a), title, vmin, vmax, mask)
    for ax in axes[1:]:
        ax.set_ylabel("")
    fig.colorbar(im, ax=list(axes), label="dBZ", shrink=0.8)
    if report is not None:
        fig.suptitle(f"eps1 = {report.epsilon1:.3g}   eps2 = {report.epsilon2:.3g}")
    return _save(fig, path)
