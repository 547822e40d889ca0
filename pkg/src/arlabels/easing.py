"""Easing curves for time-based interpolation.

Every curve maps normalized progress 0 -> 0 and 1 -> 1 and stays within
[0, 1] in between.  Progress outside [0, 1] is clamped, so callers can feed
raw timestamps without worrying about overshoot.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable


class EasingKind(Enum):
    LINEAR = "linear"
    QUAD_IN = "quad-in"
    QUAD_OUT = "quad-out"
    QUAD_IN_OUT = "quad-in-out"
    CUBIC_IN = "cubic-in"
    CUBIC_OUT = "cubic-out"
    CUBIC_IN_OUT = "cubic-in-out"
    SINE_IN = "sine-in"
    SINE_OUT = "sine-out"
    SINE_IN_OUT = "sine-in-out"


def _sine_in_out(p: float) -> float:
    return -0.5 * (math.cos(math.pi * p) - 1.0)


_CURVES: dict[EasingKind, Callable[[float], float]] = {
    EasingKind.LINEAR: lambda p: p,
    EasingKind.QUAD_IN: lambda p: p * p,
    EasingKind.QUAD_OUT: lambda p: 1.0 - (1.0 - p) * (1.0 - p),
    EasingKind.QUAD_IN_OUT: lambda p: 2.0 * p * p if p < 0.5 else 1.0 - 2.0 * (1.0 - p) * (1.0 - p),
    EasingKind.CUBIC_IN: lambda p: p ** 3,
    EasingKind.CUBIC_OUT: lambda p: 1.0 - (1.0 - p) ** 3,
    EasingKind.CUBIC_IN_OUT: lambda p: 4.0 * p ** 3 if p < 0.5 else 1.0 - 4.0 * (1.0 - p) ** 3,
    EasingKind.SINE_IN: lambda p: 1.0 - math.cos(math.pi * p / 2.0),
    EasingKind.SINE_OUT: lambda p: math.sin(math.pi * p / 2.0),
    EasingKind.SINE_IN_OUT: _sine_in_out,
}

DEFAULT_EASING = EasingKind.SINE_IN_OUT

EASING_NAMES = tuple(kind.value for kind in EasingKind)


def ease(kind: EasingKind, t_current: float, t_start: float, t_transition: float) -> float:
    """Eased progress of a transition that started at t_start.

    Returns exactly 0.0 before the start and exactly 1.0 at or after
    t_start + t_transition, so completed transitions land on their goals
    bit for bit.
    """
    if not (math.isfinite(t_transition) and t_transition > 0.0):
        raise ValueError(f"transition duration must be positive, got {t_transition!r}")
    p = (t_current - t_start) / t_transition
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    return _CURVES[kind](p)
