"""Figures written to files (Agg backend, no display needed)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy.special import ndtr  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_race_trace(trace, path) -> Path:
    """E_q(x) against log x with the limiting mean rho(q) - 1."""
    x, e = trace.plot_data()
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(x, e, lw=0.6)
    ax.axhline(trace.q.rho - 1, color="k", ls="--", lw=0.8, label=r"$\rho(q)-1$")
    ax.axhline(0, color="r", lw=0.6)
    ax.set_xscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel(r"$E_q(x)$")
    ax.set_title(f"q = {trace.q.q}")
    ax.legend(loc="upper right")
    return _save(fig, path)


def plot_normalized_cdf(model, path, grid=None) -> Path:
    """Distribution of (X - mean)/sd next to the standard Gaussian, with their difference."""
    from .dist import normalized_cdf

    if grid is None:
        grid = np.linspace(-5, 5, 401)
    F = normalized_cdf(model, grid)
    G = ndtr(grid)
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    a1.plot(grid, F, label="race")
    a1.plot(grid, G, ls="--", label="Gaussian")
    a1.legend()
    a1.set_ylabel("CDF")
    a2.plot(grid, F - G)
    a2.axhline(0, color="k", lw=0.5)
    a2.set_ylabel("difference")
    a2.set_xlabel("normalized value")
    if model.q is not None:
        a1.set_title(f"q = {model.q}")
    return _save(fig, path)


def plot_characteristic_function(model, path, xi_max: float | None = None) -> Path:
    """|phi(xi)| on a log scale."""
    from .dist import characteristic_function

    if xi_max is None:
        xi_max = 12.0 / max(np.sqrt(model.variance), 1e-3)
    xi = np.linspace(1e-3, xi_max, 2000)
    phi = np.abs(characteristic_function(model, xi))
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.semilogy(xi, np.maximum(phi, 1e-300))
    ax.set_xlabel(r"$\xi$")
    ax.set_ylabel(r"$|\phi(\xi)|$")
    return _save(fig, path)


def plot_hardy(lf, zeros, path, t_max: float | None = None) -> Path:
    """Hardy's Z(t) with the located zeros marked."""
    g = zeros.gammas
    t_max = t_max or min(zeros.height, 60.0)
    t = np.linspace(0.0, t_max, 1500)
    z = np.array([lf.hardy(float(s)) for s in t])
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(t, z, lw=0.8)
    ax.axhline(0, color="k", lw=0.5)
    sel = g[g <= t_max]
    ax.plot(sel, np.zeros_like(sel), "r.", ms=4)
    ax.set_xlabel("t")
    ax.set_ylabel("Z(t)")
    ax.set_title(f"{len(sel)} zeros up to {t_max:g}")
    return _save(fig, path)


def plot_table(rows, path) -> Path:
    """1 - delta on a log scale for computed rows against the reference values."""
    qs = [r["q"] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ref = [1 - r["reference_delta"] for r in rows]
    ax.semilogy(range(len(qs)), ref, "o-", label="reference")
    comp = [(i, 1 - r["delta"]) for i, r in enumerate(rows) if r.get("delta") is not None]
    if comp:
        i, v = zip(*comp)
        ax.semilogy(i, v, "x", ms=9, label="computed")
    ax.set_xticks(range(len(qs)))
    ax.set_xticklabels([str(q) for q in qs], rotation=30)
    ax.set_ylabel(r"$1-\delta(q;NR,R)$")
    ax.legend()
    return _save(fig, path)
