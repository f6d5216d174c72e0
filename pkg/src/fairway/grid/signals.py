"""Fixed-cycle, four-phase signal plans with coordinated offsets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..errors import InvalidSpec
from .network import EW, NS

GREEN_MIN_S = 1
GREEN_MAX_S = 40


class Phase(enum.Enum):
    NS_STRAIGHT = "ns_straight"
    NS_TURN = "ns_turn"
    EW_STRAIGHT = "ew_straight"
    EW_TURN = "ew_turn"
    YELLOW = "yellow"


PHASE_ORDER = (Phase.NS_STRAIGHT, Phase.NS_TURN, Phase.EW_STRAIGHT, Phase.EW_TURN)


@dataclass(frozen=True)
class SignalPlan:
    """Green times of the straight and turning phases, shared by every intersection.

    The cycle runs NS-straight, NS-turn, EW-straight, EW-turn with a yellow
    interval after each. Neighbouring intersections are shifted by the mean
    of the two green times.
    """

    green_straight_s: int
    green_turn_s: int
    yellow_s: int = 3

    def __post_init__(self):
        for name in ("green_straight_s", "green_turn_s"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or not GREEN_MIN_S <= value <= GREEN_MAX_S:
                raise InvalidSpec(f"{name} must be an integer in [{GREEN_MIN_S},{GREEN_MAX_S}], got {value!r}")
        if isinstance(self.yellow_s, bool) or not isinstance(self.yellow_s, int) or self.yellow_s < 0:
            raise InvalidSpec(f"yellow_s must be an integer >= 0, got {self.yellow_s!r}")

    @property
    def cycle_s(self) -> int:
        return 2 * (self.green_straight_s + self.green_turn_s) + 4 * self.yellow_s

    @property
    def neighbour_shift_s(self) -> float:
        return (self.green_straight_s + self.green_turn_s) / 2.0

    def offset_s(self, intersection: tuple[int, int]) -> float:
        r, c = intersection
        return math.fmod((r + c) * self.neighbour_shift_s, self.cycle_s)

    def offsets_s(self, intersections) -> dict[tuple[int, int], float]:
        return {rc: self.offset_s(rc) for rc in intersections}

    def green_window(self, axis: int) -> tuple[float, float]:
        """Start and end of the straight-movement green for an axis, in cycle time."""
        if axis == NS:
            return 0.0, float(self.green_straight_s)
        if axis == EW:
            start = float(self.green_straight_s + self.green_turn_s + 2 * self.yellow_s)
            return start, start + self.green_straight_s
        raise ValueError(f"unknown axis {axis}")


def cycle_position(plan: SignalPlan, offset: float, t: float) -> float:
    tau = math.fmod(t - offset, plan.cycle_s)
    if tau < 0:
        tau += plan.cycle_s
    return tau


def phase_at(plan: SignalPlan, intersection: tuple[int, int], t: float) -> Phase:
    """Active phase at an intersection at time ``t`` (periodic in ``cycle_s``)."""
    tau = cycle_position(plan, plan.offset_s(intersection), t)
    y = plan.yellow_s
    edge = 0.0
    for phase in PHASE_ORDER:
        green = plan.green_straight_s if phase in (Phase.NS_STRAIGHT, Phase.EW_STRAIGHT) else plan.green_turn_s
        if tau < edge + green:
            return phase
        edge += green
        if tau < edge + y:
            return Phase.YELLOW
        edge += y
    return Phase.YELLOW  # only reachable through rounding at tau == cycle_s
