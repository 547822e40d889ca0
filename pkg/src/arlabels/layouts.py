"""Synthetic benchmark layouts: circle, grid, and aligned line.

All three place equal-sized labels (120 x 120 at every detail level, so the
banding never changes the geometry) around a device standing at the origin.
The circle is the friendly case with no occlusion at all, the grid mixes
near and far labels, and the line stacks every label behind the previous one
at a single azimuth, the worst case for the greedy resolver.
"""

from __future__ import annotations

import math
from typing import Callable

from .geo import DevicePose
from .scene import (
    ColorScale,
    Extent,
    LodLevel,
    POI,
    Scene,
    WorldPosition,
)

BENCH_EXTENT = Extent(120.0, 120.0)

CIRCLE_RADIUS = 1000.0
GRID_EXTENT = 4000.0
LINE_SPACING = 90.0
LINE_START = 90.0

ORIGIN_POSE = DevicePose(position=WorldPosition(0.0, 0.0, 0.0))


def _bench_scene(name: str, positions: list[WorldPosition]) -> Scene:
    pois = tuple(
        POI(
            id=f"L{i + 1:03d}",
            name=f"L{i + 1:03d}",
            position=pos,
            category="marker",
            scalar_value=float((i * 7) % 121),
            scalar_unit="min",
        )
        for i, pos in enumerate(positions)
    )
    return Scene(
        pois=pois,
        name=name,
        label_extents={level: BENCH_EXTENT for level in LodLevel},
    )


def gen_circle(n: int, radius: float = CIRCLE_RADIUS) -> Scene:
    """n labels evenly spread on a circle around the origin."""
    if n < 1:
        raise ValueError("need at least one label")
    positions = []
    for k in range(n):
        theta = 2.0 * math.pi * k / n
        positions.append(WorldPosition(radius * math.sin(theta), 0.0, -radius * math.cos(theta)))
    return _bench_scene(f"circle-{n}", positions)


def gen_grid(n: int, extent: float = GRID_EXTENT) -> Scene:
    """n labels on a square-ish grid ahead of the origin, row-major fill.

    ceil(sqrt(n)) columns; the grid spans `extent` in both directions with
    the nearest row one line-spacing unit ahead of the device.
    """
    if n < 1:
        raise ValueError("need at least one label")
    cols = math.isqrt(n)
    if cols * cols < n:
        cols += 1
    rows = math.ceil(n / cols)
    positions = []
    for i in range(n):
        r, c = divmod(i, cols)
        x = -extent / 2.0 + (extent * c / (cols - 1) if cols > 1 else extent / 2.0)
        z = -(LINE_START + (extent * r / (rows - 1) if rows > 1 else extent / 2.0))
        positions.append(WorldPosition(x, 0.0, z))
    return _bench_scene(f"grid-{n}", positions)


def gen_line(n: int, spacing: float = LINE_SPACING, start: float = LINE_START) -> Scene:
    """n labels queued behind each other at a single azimuth ahead of the origin."""
    if n < 1:
        raise ValueError("need at least one label")
    positions = [WorldPosition(0.0, 0.0, -(start + k * spacing)) for k in range(n)]
    return _bench_scene(f"line-{n}", positions)


LAYOUTS: dict[str, Callable[[int], Scene]] = {
    "circle": gen_circle,
    "grid": gen_grid,
    "line": gen_line,
}
