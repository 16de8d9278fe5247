"""Figure renderers for readtask output files.

All renderers are read-only consumers: they parse a report/CSV/JSON file,
draw with matplotlib's object-oriented API (no pyplot, so no GUI backend
is touched), and write PNG or SVG depending on the output extension.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from matplotlib import colormaps
from matplotlib.figure import Figure
from matplotlib.patches import Circle, Polygon
from matplotlib.tri import LinearTriInterpolator, Triangulation

from .layout import load_layout

SUPPORTED_SCHEMA = 1


class RenderError(ValueError):
    pass


class SchemaVersionError(RenderError):
    pass


def _check_schema(payload: dict, path) -> None:
    version = payload.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaVersionError(
            f"{path}: schema_version {version!r} unsupported "
            f"(expected {SUPPORTED_SCHEMA})"
        )


def _save(fig: Figure, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    if out_path.suffix.lower() not in (".png", ".svg"):
        raise RenderError(f"unsupported output format {out_path.suffix!r}; "
                          f"use .png or .svg")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, bbox_inches="tight", dpi=150)
    return out_path


# ---------------------------------------------------------------------------
# accuracy


def plot_accuracy(report_path: str | Path, out_path: str | Path) -> Path:
    """Per-subject accuracy bars with run spread, the median line, and the
    chance-level baseline."""
    payload = json.loads(Path(report_path).read_text())
    _check_schema(payload, report_path)
    subjects = payload.get("subjects", [])
    if not subjects:
        raise RenderError(f"{report_path}: no subject accuracies to plot")

    names = [s["subject_id"] for s in subjects]
    accuracies = [s["accuracy"] for s in subjects]
    spreads = []
    for s in subjects:
        runs = s.get("run_accuracies") or [s["accuracy"]]
        spreads.append((s["accuracy"] - min(runs), max(runs) - s["accuracy"]))
    median = payload["median"]
    mad = payload["mad"]
    chance = payload.get("chance_level", 0.5)

    fig = Figure(figsize=(max(4.0, 0.6 * len(names) + 2.0), 3.6))
    ax = fig.add_subplot(111)
    x = np.arange(len(names))
    ax.bar(x, accuracies, color="#4878a8", width=0.7,
           yerr=np.transpose(spreads), capsize=3, error_kw={"lw": 1})
    ax.axhline(median, color="#303030", lw=1.4,
               label=f"median {median:.2f}")
    if mad > 0:
        ax.axhspan(median - mad, median + mad, color="#303030", alpha=0.12,
                   label=f"MAD {mad:.2f}")
    ax.axhline(chance, color="#b4443c", lw=1.2, ls="--",
               label=f"chance {chance:.2f}")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("accuracy")
    ax.set_title(f"{payload['feature_set']} — {payload['protocol']}")
    ax.legend(loc="lower right", fontsize=7)
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# confusion


def plot_confusion(csv_path: str | Path, out_path: str | Path) -> Path:
    """Heatmap of a confusion CSV (rows = true class)."""
    with Path(csv_path).open() as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or not rows[0][0].startswith("true"):
        raise RenderError(f"{csv_path}: not a confusion CSV")
    class_names = rows[0][1:]
    matrix = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    if matrix.shape != (len(class_names), len(class_names)):
        raise RenderError(f"{csv_path}: matrix is not square")

    share = matrix / np.maximum(matrix.sum(axis=1, keepdims=True), 1.0)
    fig = Figure(figsize=(4.8, 4.2))
    ax = fig.add_subplot(111)
    image = ax.imshow(share, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(class_names)))
    ax.set_yticks(range(len(class_names)))
    ax.set_xticklabels(class_names, rotation=90, fontsize=7)
    ax.set_yticklabels(class_names, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    if len(class_names) <= 6:
        for i in range(len(class_names)):
            for j in range(len(class_names)):
                ax.text(j, i, f"{int(matrix[i, j])}", ha="center",
                        va="center", fontsize=8,
                        color="white" if share[i, j] > 0.5 else "black")
    fig.colorbar(image, ax=ax, label="row share")
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# feature distributions


def plot_distributions(csv_path: str | Path, out_path: str | Path,
                       max_features: int = 9) -> Path:
    """Per-class violin plots of the first few feature columns of a
    feature-matrix CSV (last column = label)."""
    with Path(csv_path).open() as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0][-1] != "label":
        raise RenderError(f"{csv_path}: not a feature-matrix CSV")
    names = rows[0][:-1][:max_features]
    labels = [row[-1] for row in rows[1:]]
    values = np.array([[float(v) for v in row[:len(names)]]
                       for row in rows[1:]])
    classes = sorted(set(labels))
    if not classes:
        raise RenderError(f"{csv_path}: no samples")

    n = len(names)
    ncols = min(3, n)
    nrows = (n + ncols - 1) // ncols
    fig = Figure(figsize=(3.4 * ncols, 2.6 * nrows))
    axes = fig.subplots(nrows, ncols, squeeze=False)
    palette = colormaps["tab10"]
    for k, feature in enumerate(names):
        ax = axes[k // ncols][k % ncols]
        data = [values[[l == c for l in labels], k] for c in classes]
        parts = ax.violinplot(data, showmedians=True)
        for body, c_idx in zip(parts["bodies"], range(len(classes))):
            body.set_facecolor(palette(c_idx))
            body.set_alpha(0.6)
        ax.set_xticks(range(1, len(classes) + 1))
        ax.set_xticklabels(classes, fontsize=8)
        ax.set_title(feature, fontsize=9)
    for k in range(n, nrows * ncols):
        axes[k // ncols][k % ncols].axis("off")
    fig.suptitle(Path(csv_path).stem, fontsize=10)
    return _save(fig, out_path)


# ---------------------------------------------------------------------------
# topography


def interpolate_scalp(values: np.ndarray, coords: np.ndarray,
                      resolution: int = 200):
    """Linear interpolation of channel values onto a head-circle grid.

    Returns (xi, yi, zi) with zi masked outside the electrode hull; shared
    by the renderer and by tests that check peak locations.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (coords.shape[0],):
        raise RenderError(
            f"pattern has {values.size} values for {coords.shape[0]} "
            f"layout coordinates"
        )
    triangulation = Triangulation(coords[:, 0], coords[:, 1])
    interpolator = LinearTriInterpolator(triangulation, values)
    axis = np.linspace(-1.0, 1.0, resolution)
    xi, yi = np.meshgrid(axis, axis)
    zi = interpolator(xi, yi)
    return xi, yi, zi


def plot_topography(pattern_path: str | Path, out_path: str | Path,
                    layout_path: str | Path | None = None) -> Path:
    """Interpolated scalp map of a pattern JSON, nose-up, with a color
    scale symmetric about zero."""
    payload = json.loads(Path(pattern_path).read_text())
    _check_schema(payload, pattern_path)
    values = np.asarray(payload["channel_values"], dtype=float)
    coords = load_layout(layout_path)
    if values.size != coords.shape[0]:
        raise RenderError(
            f"{pattern_path}: {values.size} channel values for "
            f"{coords.shape[0]} layout positions"
        )

    xi, yi, zi = interpolate_scalp(values, coords)
    limit = float(np.max(np.abs(values)))
    if limit == 0.0:
        limit = 1.0  # uniform mid-color map for an all-zero pattern

    fig = Figure(figsize=(4.0, 4.2))
    ax = fig.add_subplot(111)
    mesh = ax.pcolormesh(xi, yi, zi, cmap="RdBu_r", vmin=-limit, vmax=limit,
                         shading="auto")
    ax.add_patch(Circle((0.0, 0.0), 1.0, fill=False, lw=1.5, color="black"))
    ax.add_patch(Polygon([[-0.08, 0.99], [0.0, 1.12], [0.08, 0.99]],
                         closed=True, fill=False, lw=1.5, color="black"))
    ax.scatter(coords[:, 0], coords[:, 1], s=4, c="black", alpha=0.4)
    ax.set_xlim(-1.25, 1.25)
    ax.set_ylim(-1.2, 1.3)
    ax.set_aspect("equal")
    ax.axis("off")
    subject = payload.get("subject_id")
    title = f"{payload.get('band', 'pattern')}"
    if subject:
        title += f" — {subject}"
    ax.set_title(title, fontsize=10)
    fig.colorbar(mesh, ax=ax, shrink=0.75)
    return _save(fig, out_path)
