"""Microbenchmark harness for the occlusion resolver.

Times resolve_all over the synthetic layouts, one (layout, n) cell at a
time: an untimed warm-up run, then the requested repetitions, reporting the
median wall time together with the ray and shift counts.  Counts must come
out identical on every repetition; the harness enforces that, since the
resolver is deterministic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geo import sort_by_distance
from .layouts import LAYOUTS, ORIGIN_POSE
from .occlusion import BillboardRect, resolve_all
from .scene import LodLevel, Scene

DEFAULT_NS = (10, 20, 30, 40, 50, 75, 100)
MIN_REPETITIONS = 3
CSV_HEADER = "layout,n,median_ms,rays,shifts"


@dataclass(frozen=True, slots=True)
class BenchRecord:
    layout: str
    n: int
    median_ms: float
    rays: int
    shifts: int


def _bench_rects(scene: Scene) -> tuple[tuple[str, ...], dict[str, BillboardRect]]:
    from .geo import orient_billboard, resolve_anchors

    device = ORIGIN_POSE.position
    anchors = resolve_anchors(scene)
    ordered = sort_by_distance(scene, ORIGIN_POSE)
    ext = scene.extent(LodLevel.HIGHEST)
    rects = {
        pid: BillboardRect(a, ext.width, ext.height, orient_billboard(a, device))
        for pid, a in anchors.items()
    }
    return ordered.ids, rects


def bench_cell(layout: str, n: int, repetitions: int) -> BenchRecord:
    scene = LAYOUTS[layout](n)
    order, rects = _bench_rects(scene)
    device = ORIGIN_POSE.position

    times_ms: list[float] = []
    counts: set[tuple[int, int]] = set()
    for rep in range(repetitions + 1):
        t0 = time.perf_counter()
        _, report = resolve_all(order, rects, device)
        elapsed = (time.perf_counter() - t0) * 1000.0
        if rep == 0:
            continue  # warm-up run is discarded
        times_ms.append(elapsed)
        counts.add((report.rays_cast, report.shift_ops))
    if len(counts) != 1:
        raise RuntimeError(f"{layout} n={n}: ray/shift counts varied across repetitions: {counts}")
    rays, shifts = counts.pop()
    return BenchRecord(layout=layout, n=n, median_ms=float(np.median(times_ms)), rays=rays, shifts=shifts)


def run_bench(
    layouts: Sequence[str] = tuple(LAYOUTS),
    ns: Sequence[int] = DEFAULT_NS,
    repetitions: int = 5,
) -> list[BenchRecord]:
    if repetitions < MIN_REPETITIONS:
        raise ValueError(f"need at least {MIN_REPETITIONS} repetitions, got {repetitions}")
    unknown = [name for name in layouts if name not in LAYOUTS]
    if unknown:
        raise ValueError(f"unknown layouts: {unknown}; choose from {sorted(LAYOUTS)}")
    if any(n < 1 for n in ns):
        raise ValueError("label counts must be positive")
    return [bench_cell(layout, n, repetitions) for layout in layouts for n in ns]


def scaling_exponent(ns: Sequence[int], times_ms: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(n)."""
    if len(ns) != len(times_ms) or len(ns) < 2:
        raise ValueError("need matching n and time sequences of length >= 2")
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(times_ms, float)), 1)[0])


def format_table(records: Iterable[BenchRecord]) -> str:
    rows = [("layout", "n", "median_ms", "rays", "shifts")]
    rows += [(r.layout, str(r.n), f"{r.median_ms:.3f}", str(r.rays), str(r.shifts)) for r in records]
    widths = [max(len(row[c]) for row in rows) for c in range(5)]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(row, widths))) for row in rows]
    return "\n".join(lines)


def to_csv(records: Iterable[BenchRecord]) -> str:
    lines = [CSV_HEADER]
    lines += [f"{r.layout},{r.n},{r.median_ms:.6f},{r.rays},{r.shifts}" for r in records]
    return "\n".join(lines) + "\n"
