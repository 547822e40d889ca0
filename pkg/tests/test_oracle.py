"""Self-tests for the brute-force checker before anything else trusts it."""

import math
import random

import pytest

from arlabels.occlusion import BillboardRect, facing_rect
from arlabels.oracle import (
    MIN_SAMPLES,
    REFERENCE_MAX_LABELS,
    occlusion_free,
    overlap_pairs,
    reference_minimal,
)
from arlabels.scene import WorldPosition

DEVICE = WorldPosition(0.0, 0.0, 0.0)


def _aligned(z, bottom=0.0, w=1.2, h=1.2):
    return facing_rect(WorldPosition(0.0, bottom, z), w, h, DEVICE)


def test_detects_hidden_label():
    rects = {"near": _aligned(-10.0), "far": _aligned(-20.0)}
    assert overlap_pairs(rects, DEVICE) == [("far", "near")]
    assert not occlusion_free(rects, DEVICE)


def test_lifted_label_is_free():
    # ray over the near top (y=1.2 at 10) reaches 2.4 at 20; sit just above
    rects = {"near": _aligned(-10.0), "far": _aligned(-20.0, bottom=2.4000001)}
    assert occlusion_free(rects, DEVICE)


def test_exact_edge_contact_is_not_occlusion():
    # bottom exactly on the sight ray: samples are strictly interior, so free
    rects = {"near": _aligned(-10.0), "far": _aligned(-20.0, bottom=2.4)}
    assert occlusion_free(rects, DEVICE)


def test_just_below_contact_is_occlusion():
    rects = {"near": _aligned(-10.0), "far": _aligned(-20.0, bottom=2.4 - 0.05)}
    assert not occlusion_free(rects, DEVICE)


def test_side_by_side_far_apart_is_free():
    rects = {
        "left": facing_rect(WorldPosition(-30.0, 0.0, -10.0), 1.2, 1.2, DEVICE),
        "right": facing_rect(WorldPosition(30.0, 0.0, -10.0), 1.2, 1.2, DEVICE),
    }
    assert occlusion_free(rects, DEVICE)


def test_equal_distance_pairs_are_skipped():
    # Same range, overlapping azimuths: ties are layout's problem, not occlusion's.
    rects = {
        "a": facing_rect(WorldPosition(-0.1, 0.0, -10.0), 4.0, 1.2, DEVICE),
        "b": facing_rect(WorldPosition(0.1, 0.0, -10.0), 4.0, 1.2, DEVICE),
    }
    d = math.hypot(0.1, 10.0)
    assert abs(math.hypot(-0.1, -10.0) - d) < 1e-12  # genuinely tied
    assert overlap_pairs(rects, DEVICE) == []


def test_sample_floor_enforced():
    rects = {"near": _aligned(-10.0)}
    with pytest.raises(ValueError):
        overlap_pairs(rects, DEVICE, samples=8)


def test_reference_two_label_case():
    rects = {"l1": _aligned(-10.0), "l2": _aligned(-20.0)}
    placed = reference_minimal(["l1", "l2"], rects, DEVICE)
    assert placed["l1"].anchor.y == 0.0
    assert placed["l2"].anchor.y == pytest.approx(2.4, abs=1e-9)
    assert occlusion_free(placed, DEVICE)


def test_reference_result_is_minimal_over_candidates():
    # any strictly lower stacking of l2 onto its candidate heights overlaps
    rects = {"l1": _aligned(-10.0), "l2": _aligned(-20.0)}
    placed = reference_minimal(["l1", "l2"], rects, DEVICE)
    lower = dict(placed)
    lower["l2"] = placed["l2"].with_bottom(placed["l2"].anchor.y - 0.3)
    assert not occlusion_free(lower, DEVICE)


def test_reference_label_cap():
    rects = {
        f"l{i:02d}": _aligned(-10.0 * (i + 1)) for i in range(REFERENCE_MAX_LABELS + 1)
    }
    with pytest.raises(ValueError):
        reference_minimal(sorted(rects), rects, DEVICE)


def test_reference_handles_eye_height():
    device = WorldPosition(0.0, 1.6, 0.0)
    rects = {
        "l1": facing_rect(WorldPosition(0.0, 0.0, -10.0), 1.2, 1.2, device),
        "l2": facing_rect(WorldPosition(0.0, 0.0, -20.0), 1.2, 1.2, device),
    }
    placed = reference_minimal(["l1", "l2"], rects, device)
    # ray from eye over l1's top: slope (1.2-1.6)/10, extended to 20 -> 0.8
    assert placed["l2"].anchor.y == pytest.approx(0.8, abs=1e-9)
    assert occlusion_free(placed, device)


def test_random_spot_checks_against_dense_sampling():
    # the verdict with the default grid matches a denser grid on random scenes
    rng = random.Random(2024)
    for _ in range(20):
        rects = {}
        for i in range(rng.randint(2, 6)):
            x = rng.uniform(-20, 20)
            z = rng.uniform(-40, -10)
            rects[f"r{i}"] = facing_rect(
                WorldPosition(x, rng.uniform(0, 2), z), rng.uniform(1, 6), rng.uniform(1, 4), DEVICE
            )
        coarse = occlusion_free(rects, DEVICE, samples=MIN_SAMPLES)
        fine = occlusion_free(rects, DEVICE, samples=96)
        assert coarse == fine
