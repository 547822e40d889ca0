"""Watching labels lose detail as their surroundings crowd up.

Builds a fan of labels in front of the device, widening the fan from spread
out to tightly bunched, and prints each label's accumulated crowding and the
detail band it lands in. Crowding is the summed angular width of all nearer
labels within the angular window; the two thresholds cut the bands.

Run:  python3 demos/crowding_bands.py
"""

import math

from arlabels.lod import LOD_ELEMENTS, CrowdingEntry, band_crowding
from arlabels.scene import LodLevel

T_DEG, M1_DEG, M2_DEG = 45.0, 20.0, 30.0
LABEL_WIDTH_M = 1.5
BAND_MARK = {LodLevel.HIGHEST: "H", LodLevel.MIDDLE: "M", LodLevel.LOWEST: "L"}


def fan(n: int, spread_deg: float, base_distance: float = 8.0):
    """n labels fanned across spread_deg, nearer ones first."""
    entries = []
    for i in range(n):
        azimuth = (i - (n - 1) / 2) * (spread_deg / max(n - 1, 1))
        distance = base_distance + 2.0 * i  # ascending: list order = distance order
        width = math.degrees(2.0 * math.atan(LABEL_WIDTH_M / 2.0 / distance))
        entries.append(CrowdingEntry(f"label{i}", azimuth, width))
    return entries


def show(spread_deg: float) -> None:
    entries = fan(8, spread_deg)
    levels, totals = band_crowding(entries, T_DEG, M1_DEG, M2_DEG)
    marks = " ".join(BAND_MARK[levels[e.key]] for e in entries)
    worst = max(totals.values())
    print(f"   spread {spread_deg:5.1f} deg: bands [{marks}]  max crowding {worst:5.1f} deg")


def main() -> None:
    print(f"window t={T_DEG} deg, thresholds m1={M1_DEG} deg / m2={M2_DEG} deg")
    print(f"8 labels, {LABEL_WIDTH_M} m wide, distances 8 m .. 22 m\n")

    print("== wide fan to tight bunch ==")
    for spread in (160.0, 120.0, 90.0, 60.0, 30.0, 10.0):
        show(spread)

    print("\n== what each band draws ==")
    for level in (LodLevel.LOWEST, LodLevel.MIDDLE, LodLevel.HIGHEST):
        print(f"   {level.value:8}: {', '.join(sorted(LOD_ELEMENTS[level]))}")

    print("\nnearest labels always keep the most detail: crowding counts only")
    print("nearer neighbors, so detail drains from the back of the bunch first.")


if __name__ == "__main__":
    main()
