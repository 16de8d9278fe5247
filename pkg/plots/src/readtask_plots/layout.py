"""105-channel scalp layout: packaged default plus CSV loading.

Coordinates live in the unit head circle, nose-up (+y toward the nose).
The default layout places electrodes on concentric rings, ordered
front-to-back so that low channel indices sit frontally; it approximates
a geodesic net well enough for qualitative maps.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np

N_CHANNELS = 105
RING_COUNTS = (1, 6, 12, 18, 24, 28, 16)
RING_RADII = (0.0, 0.15, 0.30, 0.45, 0.62, 0.78, 0.92)


class LayoutError(ValueError):
    pass


def generate_default_layout() -> np.ndarray:
    """(105, 2) ring layout, channels sorted front (+y) to back."""
    points = []
    for count, radius in zip(RING_COUNTS, RING_RADII):
        for i in range(count):
            angle = np.pi / 2.0 - 2.0 * np.pi * i / count
            points.append((radius * np.cos(angle), radius * np.sin(angle)))
    coords = np.array(points)
    order = np.lexsort((coords[:, 0], -coords[:, 1]))
    return coords[order]


def write_layout_csv(coords: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["channel", "x", "y"])
        for i, (x, y) in enumerate(coords):
            writer.writerow([i, f"{x:.6f}", f"{y:.6f}"])
    return path


def load_layout(path: str | Path | None = None) -> np.ndarray:
    """Load a layout CSV (channel,x,y); None loads the packaged default."""
    if path is None:
        source = resources.files("readtask_plots").joinpath(
            "data/channel_layout_105.csv")
        text = source.read_text()
    else:
        text = Path(path).read_text()
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0][:3] != ["channel", "x", "y"]:
        raise LayoutError("layout CSV must start with header channel,x,y")
    coords = np.full((len(rows) - 1, 2), np.nan)
    for row in rows[1:]:
        idx = int(row[0])
        if not 0 <= idx < len(coords):
            raise LayoutError(f"channel index {idx} out of range")
        coords[idx] = (float(row[1]), float(row[2]))
    if np.isnan(coords).any():
        raise LayoutError("layout CSV has missing channel rows")
    if len(coords) != N_CHANNELS:
        raise LayoutError(
            f"layout has {len(coords)} channels, expected {N_CHANNELS}")
    return coords
