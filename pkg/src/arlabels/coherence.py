"""Frame-to-frame coherence: eased transitions between placement goals.

Whenever a label's goal changes (position, visible elements, aggregation
state), the change plays out as a timed transition instead of a jump.  A
transition remembers its start value, goal, start time, duration and easing
curve; retargeting mid-flight starts a fresh transition from the currently
interpolated value, so motion stays continuous no matter how often goals
move.  Completed transitions return their goal bit for bit, which is what
makes a settled scene emit identical frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

from .easing import DEFAULT_EASING, EasingKind, ease
from .scene import WorldPosition

Value = Union[float, WorldPosition]


def lerp(start: float, goal: float, e: float) -> float:
    """Eased linear blend that lands exactly on the endpoints."""
    if e <= 0.0:
        return start
    if e >= 1.0:
        return goal
    return start + (goal - start) * e


def interpolate_position(start: WorldPosition, goal: WorldPosition, e: float) -> WorldPosition:
    if e <= 0.0:
        return start
    if e >= 1.0:
        return goal
    return WorldPosition(
        start.x + (goal.x - start.x) * e,
        start.y + (goal.y - start.y) * e,
        start.z + (goal.z - start.z) * e,
    )


def fade_alpha(b: int, e: float) -> float:
    """Opacity during a visibility fade: b=1 fades in, b=0 fades out."""
    if b == 1:
        return e
    if b == 0:
        return 1.0 - e
    raise ValueError(f"fade direction must be 0 or 1, got {b!r}")


def aggregate_transition(
    member_start: WorldPosition, super_position: WorldPosition, e: float
) -> tuple[float, float, WorldPosition]:
    """One step of collapsing members into a super label.

    Returns (member_alpha, super_alpha, member_position).  The two alphas are
    exact complements, so the total opacity through a collapse never dips or
    spikes.  Splitting runs the same equations with the eased progress
    reversed.
    """
    return 1.0 - e, e, interpolate_position(member_start, super_position, e)


@dataclass(frozen=True, slots=True)
class Transition:
    start_value: Value
    goal_value: Value
    t_start: float
    duration_s: float
    easing: EasingKind = DEFAULT_EASING

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration_s) and self.duration_s > 0.0):
            raise ValueError(f"transition duration must be positive, got {self.duration_s}")

    def progress(self, t_now: float) -> float:
        return ease(self.easing, t_now, self.t_start, self.duration_s)

    def value_at(self, t_now: float) -> Value:
        e = self.progress(t_now)
        if isinstance(self.start_value, WorldPosition):
            return interpolate_position(self.start_value, self.goal_value, e)
        return lerp(self.start_value, self.goal_value, e)

    def done(self, t_now: float) -> bool:
        return t_now - self.t_start >= self.duration_s


def retarget(transition: Transition, new_goal: Value, t_now: float) -> Transition:
    """Redirect a transition toward a new goal without a visual jump.

    The current interpolated value becomes the new start and the clock
    restarts at t_now with the same duration and easing.
    """
    return replace(
        transition,
        start_value=transition.value_at(t_now),
        goal_value=new_goal,
        t_start=t_now,
    )
