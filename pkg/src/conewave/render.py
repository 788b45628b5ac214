"""Minimal raster output: grayscale PPM heatmaps with tube cross-sections."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def field_to_ppm(dens: np.ndarray, path, circles=(), box: float = 1.0) -> None:
    """Write |field| data as a binary PPM; circles = (cx, cy, r) outlines in
    the same coordinates as the field (box = physical side length)."""
    a = np.asarray(dens, dtype=float)
    top = a.max()
    scale = 255.0 / top if top > 0 else 0.0
    gray = np.clip(a * scale, 0, 255).astype(np.uint8)
    img = np.stack([gray, gray, gray], axis=-1)
    n = a.shape[0]
    h = box / n
    for cx, cy, r in circles:
        th = np.linspace(0.0, 2.0 * np.pi, max(16, int(16 * r / h)))
        i = np.round((cx + r * np.cos(th)) / h).astype(int) % n
        j = np.round((cy + r * np.sin(th)) / h).astype(int) % n
        img[i, j] = (255, 64, 64)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (a.shape[1], a.shape[0]))
        fh.write(img.tobytes())
