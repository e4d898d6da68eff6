"""Tabular trajectory dump plus matplotlib figures of the map/path and the altitude profile."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from scoutpath.grid import OccupancyGrid2D  # noqa: E402

PLOT_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.dpi": 150,
}


def write_csv(points, grid2_inflated: OccupancyGrid2D, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x", "y", "z", "occupancy"])
        for t, (x, y, z) in enumerate(points):
            w.writerow([t, repr(x), repr(y), repr(z), repr(grid2_inflated.occupancy_at((x, y)))])


def _save(fig, path) -> None:
    # no timestamp or version metadata, so reruns give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_map(grid2: OccupancyGrid2D, inflated: OccupancyGrid2D, points, path, title: str = "") -> None:
    x_min, x_max, y_min, y_max = grid2.bounds
    with plt.rc_context(PLOT_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        grown = np.ma.masked_where(~((inflated.values >= 1.0) & (grid2.values < 1.0)), inflated.values)
        ax.imshow(grid2.values.T, origin="lower", cmap="gray_r", vmin=0, vmax=1,
                  extent=(x_min, x_max, y_min, y_max), interpolation="nearest")
        ax.imshow(grown.T, origin="lower", cmap="Oranges", vmin=0, vmax=1.5, alpha=0.6,
                  extent=(x_min, x_max, y_min, y_max), interpolation="nearest")
        xy = np.asarray([p[:2] for p in points])
        ax.plot(xy[:, 0], xy[:, 1], "-", color="tab:blue", lw=1.2, label="path")
        ax.plot(*xy[0], "o", color="tab:red", ms=6, label="start")
        ax.plot(*xy[-1], "o", color="m", ms=6, label="target")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper left", framealpha=0.8)
        fig.tight_layout()
        _save(fig, path)


def plot_altitude(points, h: float | None, path) -> None:
    z = np.asarray([p[2] for p in points])
    with plt.rc_context(PLOT_RC):
        fig, ax = plt.subplots(figsize=(6, 2.6))
        ax.plot(np.arange(len(z)), z, "-", color="tab:green", lw=1.5, label="height")
        if h is not None:
            ax.axhline(h, color="0.5", ls="--", lw=0.8, label=f"scouting height {h:g} m")
        ax.set_xlabel("waypoint index")
        ax.set_ylabel("z [m]")
        ax.legend(loc="lower center", framealpha=0.8)
        fig.tight_layout()
        _save(fig, path)


def plot_trajectory_3d(points, path) -> None:
    arr = np.asarray(points)
    with plt.rc_context(PLOT_RC):
        fig = plt.figure(figsize=(5, 4))
        ax = fig.add_subplot(projection="3d")
        ax.plot(arr[:, 0], arr[:, 1], arr[:, 2], color="tab:blue", lw=1.2)
        ax.scatter(*arr[0], color="tab:red", s=20)
        ax.scatter(*arr[-1], color="m", s=20)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_zlabel("z [m]")
        fig.tight_layout()
        _save(fig, path)


def write_report(points, grid2: OccupancyGrid2D, inflated: OccupancyGrid2D, out_dir,
                 h: float | None = None) -> list[Path]:
    """Write ``trajectory.csv``, ``map_path.png``, ``altitude.png`` and ``trajectory3d.png``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "trajectory.csv", out / "map_path.png", out / "altitude.png", out / "trajectory3d.png"]
    write_csv(points, inflated, files[0])
    plot_map(grid2, inflated, points, files[1])
    plot_altitude(points, h, files[2])
    plot_trajectory_3d(points, files[3])
    return files
