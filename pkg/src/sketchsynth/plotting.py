"""Matplotlib figures written next to the CSV/JSON reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def render_sketch(sketch, path, title: str | None = None, dpi: int = 120) -> Path:
    """3D line plot of a sketch, strokes coloured by drawing order (blue first, red last)."""
    fig = plt.figure(figsize=(4, 4))
    ax = fig.add_subplot(projection="3d")
    cmap = plt.get_cmap("jet")
    n = max(len(sketch.strokes) - 1, 1)
    for k, s in enumerate(sketch.strokes):
        p = s.points
        # y is up in sketch space; matplotlib's vertical axis is z
        ax.plot(p[:, 0], p[:, 2], p[:, 1], color=cmap(k / n), linewidth=1.5)
        ax.scatter(*p[0, [0, 2, 1]], color=cmap(k / n), s=6)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_zlim(0, 1)
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    ax.set_zlabel("y")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return Path(path)


def plot_report(rows: list[dict], directory) -> list[Path]:
    """Per-mesh timing and stroke/point counts for a batch run."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ok = [r for r in rows if r["status"] == "ok"]
    if not ok:
        return []
    labels = [Path(r["mesh_path"]).stem for r in ok]
    x = np.arange(len(ok))
    out = []

    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(ok) + 2), 3))
    ax.bar(x, [r["seconds"] for r in ok], color="tab:blue")
    ax.set_xticks(x, labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("seconds per mesh")
    fig.tight_layout()
    out.append(directory / "timing.png")
    fig.savefig(out[-1], dpi=120)
    plt.close(fig)

    fig, ax1 = plt.subplots(figsize=(max(4, 0.5 * len(ok) + 2), 3))
    w = 0.4
    ax1.bar(x - w / 2, [r["strokes"] for r in ok], w, label="strokes", color="tab:orange")
    ax2 = ax1.twinx()
    ax2.bar(x + w / 2, [r["points"] for r in ok], w, label="points", color="tab:green")
    ax1.set_xticks(x, labels, rotation=45, ha="right", fontsize=8)
    ax1.set_ylabel("strokes")
    ax2.set_ylabel("points")
    fig.tight_layout()
    out.append(directory / "counts.png")
    fig.savefig(out[-1], dpi=120)
    plt.close(fig)
    return out
