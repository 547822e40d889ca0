import math
import random

import pytest

from arlabels.easing import DEFAULT_EASING, EASING_NAMES, EasingKind, ease

ALL_KINDS = list(EasingKind)


def test_curve_names_are_the_published_set():
    assert set(EASING_NAMES) == {
        "linear",
        "quad-in", "quad-out", "quad-in-out",
        "cubic-in", "cubic-out", "cubic-in-out",
        "sine-in", "sine-out", "sine-in-out",
    }
    assert len(ALL_KINDS) == 10
    assert DEFAULT_EASING is EasingKind.SINE_IN_OUT


def test_default_curve_pinned_values():
    # e = -0.5 * (cos(pi * p) - 1) evaluated by hand at the quarter points
    assert ease(EasingKind.SINE_IN_OUT, 0.0, 0.0, 1.0) == 0.0
    assert ease(EasingKind.SINE_IN_OUT, 0.25, 0.0, 1.0) == pytest.approx(0.146447, abs=1e-6)
    assert ease(EasingKind.SINE_IN_OUT, 0.5, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert ease(EasingKind.SINE_IN_OUT, 1.0, 0.0, 1.0) == 1.0


def test_quarter_point_closed_form():
    expected = -0.5 * (math.cos(math.pi * 0.25) - 1.0)
    assert ease(EasingKind.SINE_IN_OUT, 0.25, 0.0, 1.0) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_endpoints_exact_for_every_curve(kind):
    # Exactly 0.0 and 1.0, not merely close: settling logic compares with ==.
    assert ease(kind, 0.0, 0.0, 2.5) == 0.0
    assert ease(kind, 2.5, 0.0, 2.5) == 1.0
    assert ease(kind, -1.0, 0.0, 2.5) == 0.0  # clamped before the window
    assert ease(kind, 99.0, 0.0, 2.5) == 1.0  # clamped after the window


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_range_stays_in_unit_interval(kind):
    for i in range(1001):
        e = ease(kind, i / 1000.0, 0.0, 1.0)
        assert 0.0 <= e <= 1.0


def test_default_curve_is_monotone():
    prev = 0.0
    for i in range(1, 1001):
        e = ease(EasingKind.SINE_IN_OUT, i / 1000.0, 0.0, 1.0)
        assert e >= prev
        prev = e


def test_time_window_offsets():
    # (t_start, duration) shift and scale the progress axis.
    rng = random.Random(42)
    for _ in range(200):
        t_start = rng.uniform(-50.0, 50.0)
        duration = rng.uniform(0.01, 20.0)
        p = rng.random()
        shifted = ease(EasingKind.QUAD_IN_OUT, t_start + p * duration, t_start, duration)
        straight = ease(EasingKind.QUAD_IN_OUT, p, 0.0, 1.0)
        assert shifted == pytest.approx(straight, abs=1e-9)


def test_linear_is_identity_on_progress():
    for p in (0.0, 0.125, 0.5, 0.875, 1.0):
        assert ease(EasingKind.LINEAR, p, 0.0, 1.0) == pytest.approx(p, abs=1e-15)


def test_in_out_symmetry():
    # in-out curves are point-symmetric about (0.5, 0.5)
    for kind in (EasingKind.QUAD_IN_OUT, EasingKind.CUBIC_IN_OUT, EasingKind.SINE_IN_OUT):
        for i in range(101):
            p = i / 100.0
            a = ease(kind, p, 0.0, 1.0)
            b = ease(kind, 1.0 - p, 0.0, 1.0)
            assert a + b == pytest.approx(1.0, abs=1e-9)


def test_in_and_out_are_reflections():
    pairs = [
        (EasingKind.QUAD_IN, EasingKind.QUAD_OUT),
        (EasingKind.CUBIC_IN, EasingKind.CUBIC_OUT),
        (EasingKind.SINE_IN, EasingKind.SINE_OUT),
    ]
    for kind_in, kind_out in pairs:
        for i in range(101):
            p = i / 100.0
            assert ease(kind_out, p, 0.0, 1.0) == pytest.approx(
                1.0 - ease(kind_in, 1.0 - p, 0.0, 1.0), abs=1e-9
            )


def test_nonpositive_duration_rejected():
    with pytest.raises(ValueError):
        ease(EasingKind.LINEAR, 0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        ease(EasingKind.LINEAR, 0.5, 0.0, -1.0)


def test_lookup_by_wire_name():
    assert EasingKind("sine-in-out") is EasingKind.SINE_IN_OUT
    assert EasingKind("cubic-out") is EasingKind.CUBIC_OUT
    with pytest.raises(ValueError):
        EasingKind("bounce")
