"""Brute-force checks for occlusion results, independent of the resolver.

Two modes.  The verdict mode rasterizes every label with a dense grid of
sample points and reports any pair where a nearer label blocks the line of
sight to a farther label's interior; it scales to any label count.  The
reference mode exhaustively searches the reachable shift heights per label
(small scenes only) and returns the lowest occlusion-free stack, which a
correct greedy resolver must match exactly.

Edge contact is not occlusion, matching the resolver: samples sit at cell
centers, strictly inside their label, and containment tests are strict.
"""

from __future__ import annotations

import math
from typing import Hashable, Mapping, Sequence

import numpy as np

from .geo import distances_tie, horizontal_distance
from .occlusion import BillboardRect
from .scene import WorldPosition

MIN_SAMPLES = 32
REFERENCE_MAX_LABELS = 12


def _sample_points(rect: BillboardRect, samples: int) -> np.ndarray:
    """Cell-center sample points of the rectangle, shape (samples^2, 3)."""
    r = rect.right()
    a = rect.anchor
    u = (np.arange(samples) + 0.5) / samples * rect.width - rect.width / 2.0
    v = (np.arange(samples) + 0.5) / samples * rect.height
    uu, vv = np.meshgrid(u, v)
    pts = np.empty((samples * samples, 3))
    pts[:, 0] = a.x + r.x * uu.ravel()
    pts[:, 1] = a.y + vv.ravel()
    pts[:, 2] = a.z + r.z * uu.ravel()
    return pts


def _blocks(
    near: BillboardRect, far_points: np.ndarray, device: WorldPosition, *_unused
) -> bool:
    """True when the nearer rectangle blocks sight to any of the far samples."""
    o = np.array([device.x, device.y, device.z])
    d = far_points - o
    n = np.array([near.normal.x, near.normal.z])
    denom = d[:, 0] * n[0] + d[:, 2] * n[1]
    a = near.anchor
    plane_off = (a.x - o[0]) * n[0] + (a.z - o[2]) * n[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(np.abs(denom) > 1e-15, plane_off / denom, np.inf)
    before = (t > 1e-9) & (t < 1.0 - 1e-9)
    if not before.any():
        return False
    hits = o + t[before, None] * d[before]
    r = near.right()
    u = (hits[:, 0] - a.x) * r.x + (hits[:, 2] - a.z) * r.z
    v = hits[:, 1] - a.y
    inside = (np.abs(u) < near.width / 2.0) & (v > 0.0) & (v < near.height)
    return bool(inside.any())


def overlap_pairs(
    rects: Mapping[Hashable, BillboardRect],
    device: WorldPosition,
    samples: int = MIN_SAMPLES,
) -> list[tuple[Hashable, Hashable]]:
    """All (far, near) pairs where the near label occludes the far one.

    Pairs at indistinguishable distances are skipped: side-by-side labels at
    the same range do not hide one another.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples per axis")
    keys = sorted(rects, key=lambda k: (horizontal_distance(rects[k].anchor, device), str(k)))
    dist = {k: horizontal_distance(rects[k].anchor, device) for k in keys}
    points = {k: _sample_points(rects[k], samples) for k in keys}
    bad: list[tuple[Hashable, Hashable]] = []
    for i, far in enumerate(keys):
        for near in keys[:i]:
            if distances_tie(dist[near], dist[far]):
                continue
            if _blocks(rects[near], points[far], device):
                bad.append((far, near))
    return bad


def occlusion_free(
    rects: Mapping[Hashable, BillboardRect],
    device: WorldPosition,
    samples: int = MIN_SAMPLES,
) -> bool:
    return not overlap_pairs(rects, device, samples)


def reference_minimal(
    order: Sequence[Hashable],
    rects: Mapping[Hashable, BillboardRect],
    device: WorldPosition,
    *,
    margin_frac: float = 0.0,
    samples: int = MIN_SAMPLES,
) -> dict:
    """Lowest reachable occlusion-free placement, by exhaustive search.

    Walks the labels in the given distance order.  Each label may stay at its
    anchor or sit just above the sight ray over any nearer label's top edge;
    the search tries those heights from the bottom up and keeps the first one
    the sample test declares free.  Caps at a handful of labels since the
    candidate set grows with every placement.
    """
    if len(order) > REFERENCE_MAX_LABELS:
        raise ValueError(f"reference search supports at most {REFERENCE_MAX_LABELS} labels")
    dist = {k: horizontal_distance(rects[k].anchor, device) for k in order}
    placed: dict = {}
    for idx, key in enumerate(order):
        rect = rects[key]
        closer = [
            k for k in order[:idx]
            if dist[k] < dist[key] and not distances_tie(dist[k], dist[key])
        ]
        margin = margin_frac * rect.height
        candidates = [rect.anchor.y]
        for k in closer:
            occ = placed[k]
            top = occ.anchor.y + occ.height
            slope = (top - device.y) / dist[k]
            candidates.append(device.y + slope * dist[key] + margin)
        chosen = None
        for y in sorted(candidates):
            if y < rect.anchor.y:
                continue
            trial = rect.with_bottom(y)
            pts = _sample_points(trial, samples)
            if all(not _blocks(placed[k], pts, device) for k in closer):
                chosen = trial
                break
        assert chosen is not None  # the topmost candidate always clears
        placed[key] = chosen
    return placed
