"""
File-to-file figure rendering from omcontrol sweep CSVs.

Each plotting function reads one CSV (plus its .meta.json sidecar when
available), draws a publication-style panel, and writes a PNG at fixed DPI;
it returns the matplotlib Figure so callers and tests can inspect it.  The
repository style file keeps output reproducible for a pinned toolchain.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

STYLE_FILE = resources.files("figplots") / "style.mplstyle"


class FigplotsError(RuntimeError):
    """Raised for unusable input files."""


def load_columns(csv_path: str | Path) -> dict[str, np.ndarray]:
    """Parse a sweep CSV into named float arrays ('true'/'false' -> 1/0)."""
    path = Path(csv_path)
    if not path.exists():
        raise FigplotsError(f"no such CSV: {path}")
    lines = path.read_text().strip().splitlines()
    if len(lines) < 2:
        raise FigplotsError(f"{path} has no data rows")
    header = lines[0].split(",")

    def parse(cell: str) -> float:
        if cell == "true":
            return 1.0
        if cell == "false":
            return 0.0
        return float(cell)

    rows = [[parse(c) for c in line.split(",")] for line in lines[1:]]
    data = np.asarray(rows)
    return {name: data[:, k] for k, name in enumerate(header)}


def load_sidecar(csv_path: str | Path) -> dict:
    meta = Path(str(csv_path) + ".meta.json")
    if meta.exists():
        return json.loads(meta.read_text())
    return {}


def require(cols: dict, names: list[str], csv_path) -> None:
    missing = [n for n in names if n not in cols]
    if missing:
        raise FigplotsError(f"{csv_path} is missing columns: {', '.join(missing)}")


def _grid(cols, xname, yname, zname):
    """Reshape long-format columns into a (ny, nx) grid."""
    xs = np.unique(cols[xname])
    ys = np.unique(cols[yname])
    Z = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, cols[xname])
    yi = np.searchsorted(ys, cols[yname])
    Z[yi, xi] = cols[zname]
    return xs, ys, Z


def plot_phase_diagram(csv_path: str | Path, out_path: str | Path):
    """
    Steady-state phase diagram over (detuning, coupling): entanglement
    heatmap, hatched instability mask, occupation contours at 1, and a
    twin axis showing the cooperativity scale.
    """
    cols = load_columns(csv_path)
    require(cols, ["delta", "g", "C", "stable", "n_ss", "EN", "cond_n"], csv_path)
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        deltas, gs, EN = _grid(cols, "delta", "g", "EN")
        _, _, stable = _grid(cols, "delta", "g", "stable")
        _, _, n_ss = _grid(cols, "delta", "g", "n_ss")
        _, _, cond_n = _grid(cols, "delta", "g", "cond_n")

        masked_en = np.ma.masked_where(stable < 0.5, EN)
        mesh = ax.pcolormesh(deltas, gs, masked_en, shading="nearest", cmap="GnBu")
        fig.colorbar(mesh, ax=ax, label="log-negativity", pad=0.13)
        # hatched instability mask
        ax.contourf(
            deltas, gs, stable, levels=[-0.5, 0.5],
            colors="none", hatches=["////"],
        )
        ax.contour(deltas, gs, stable, levels=[0.5], colors="gray", linewidths=0.8)
        if np.nanmin(n_ss) < 1.0 < np.nanmax(n_ss):
            ax.contour(
                deltas, gs, np.ma.masked_invalid(n_ss), levels=[1.0],
                colors="purple", linestyles="dashed",
            )
        if np.nanmin(cond_n) < 1.0 < np.nanmax(cond_n):
            ax.contour(deltas, gs, cond_n, levels=[1.0], colors="orange")
        ax.set_yscale("log")
        ax.set_xlabel("detuning (mechanical frequencies)")
        ax.set_ylabel("coupling g")

        # cooperativity twin axis: C is a function of g only
        twin = ax.twinx()
        twin.set_yscale("log")
        order = np.argsort(cols["g"])
        gs_sorted = cols["g"][order]
        Cs_sorted = cols["C"][order]
        twin.set_ylim(np.interp(ax.get_ylim(), gs_sorted, Cs_sorted))
        twin.set_ylabel("cooperativity C")
        fig.savefig(out_path)
    return fig


def _crossing(x, y, level):
    sign = np.sign(y - level)
    for k in range(len(x) - 1):
        if np.isfinite(sign[k]) and sign[k] * sign[k + 1] < 0:
            f = (level - y[k]) / (y[k + 1] - y[k])
            return x[k] + f * (x[k + 1] - x[k])
    return None


def plot_cool(csv_path, out_path):
    """Optimized occupation against whichever parameter was swept."""
    cols = load_columns(csv_path)
    require(cols, ["n_ss", "stable"], csv_path)
    axis_name = next(
        (n for n in ("delta", "g", "kappa", "eta") if n in cols and np.unique(cols[n]).size > 1),
        "delta",
    )
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        order = np.argsort(cols[axis_name])
        x, y = cols[axis_name][order], cols["n_ss"][order]
        ax.plot(x, y, marker="o")
        ax.axhline(1.0, color="purple", linestyle="dashed", label="single phonon")
        ax.set_yscale("log")
        if axis_name in ("g", "kappa"):
            ax.set_xscale("log")
        ax.set_xlabel(axis_name)
        ax.set_ylabel("steady-state occupation")
        ax.legend()
        fig.savefig(out_path)
    return fig


def plot_teleport(csv_path, out_path):
    """Transferred mechanical squeezing against cooperativity."""
    cols = load_columns(csv_path)
    require(cols, ["C", "zeta_db"], csv_path)
    meta = load_sidecar(csv_path)
    N = float(meta.get("config", {}).get("params", {}).get("N", 0.56))
    input_level = 10.0 * np.log10(2 * N + 1 - 2 * np.sqrt(N * (N + 1.0)))
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        order = np.argsort(cols["C"])
        C, zeta = cols["C"][order], cols["zeta_db"][order]
        ax.plot(C, zeta, marker="o")
        ax.axhline(input_level, color="black", label=f"input ({input_level:.1f} dB)")
        ax.axhline(0.0, color="gray", linewidth=0.8)
        c_crit = _crossing(C, zeta, 0.0)
        if c_crit is not None:
            ax.axvline(c_crit, color="gray", linestyle="dashed",
                       label=f"zero squeezing at C={c_crit:.2f}")
        ax.set_xscale("log")
        ax.set_xlabel("cooperativity C")
        ax.set_ylabel("mechanical squeezing (dB)")
        ax.legend()
        fig.savefig(out_path)
    return fig


def plot_swap(csv_path, out_path):
    """Two-mode entanglement and EPR variance against cooperativity."""
    cols = load_columns(csv_path)
    require(cols, ["C", "EN", "epr"], csv_path)
    with plt.style.context(str(STYLE_FILE)):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 6.0))
        order = np.argsort(cols["C"])
        C = cols["C"][order]
        ax1.plot(C, cols["EN"][order], marker="o")
        ax1.axvline(2.0, color="black", label="critical cooperativity")
        ax1.set_ylabel("log-negativity")
        ax1.legend()
        ax2.plot(C, cols["epr"][order], marker="o", color="C1")
        ax2.axhline(2.0, color="gray", linestyle="dashed", label="separability bound")
        ax2.axvline(2.0, color="black")
        ax2.set_xscale("log")
        ax2.set_xlabel("cooperativity C")
        ax2.set_ylabel("EPR variance")
        ax2.legend()
        fig.savefig(out_path)
    return fig


def plot_trajectory(csv_path, out_path):
    """Conditional means and variances along one measurement record."""
    cols = load_columns(csv_path)
    require(cols, ["t", "mean_0", "var_0"], csv_path)
    mean_names = sorted(n for n in cols if n.startswith("mean_"))
    var_names = sorted(n for n in cols if n.startswith("var_"))
    with plt.style.context(str(STYLE_FILE)):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 6.0))
        t = cols["t"]
        for name in mean_names:
            ax1.plot(t, cols[name], label=name)
        ax1.set_ylabel("conditional mean")
        ax1.legend(ncols=2, fontsize="small")
        for name in var_names:
            ax2.plot(t, cols[name], label=name)
        ax2.set_yscale("log")
        ax2.set_xlabel("time (mechanical periods / 2π)")
        ax2.set_ylabel("conditional variance")
        ax2.legend(ncols=2, fontsize="small")
        fig.savefig(out_path)
    return fig


PLOTTERS = {
    "phase-diagram": plot_phase_diagram,
    "cool": plot_cool,
    "teleport": plot_teleport,
    "swap": plot_swap,
    "trajectory": plot_trajectory,
}
