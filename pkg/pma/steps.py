from dataclasses import dataclass
from typing import Optional, Tuple

from coalition.messages import Message
from pathplanning.paths import Path
from signs.knowledge import Situation

Groups = Tuple[Tuple[str, ...], ...]

SUCCESS = "success"
FAILURE = "failure"
WAITING = "waiting"


class Reason:
    NO_APPLICABLE_SIGNIFICANCE = "NoApplicableSignificance"
    ITERATION_CAP_EXCEEDED = "IterationCapExceeded"
    GOAL_AREA_INVALID = "GoalAreaInvalid"
    BLOCKED = "Blocked"
    ANGLE_INFEASIBLE = "AngleInfeasible"
    CYCLE_DETECTED = "CycleDetected"
    INTROSPECTION_DISABLED = "IntrospectionDisabled"
    START_BLOCKED = "StartBlocked"
    DELEGATED = "Delegated"
    CAPABILITY_DENIED = "CapabilityDenied"
    UNKNOWN_SIGN = "UnknownSign"
    TICK_CAP_EXCEEDED = "TickCapExceeded"


def _effects(groups: Groups):
    return [list(g) for g in groups]


@dataclass(frozen=True)
class Relocate:
    path: Path
    place: Optional[str] = None
    effects: Groups = ()
    kind = "relocate"

    def as_dict(self):
        return {"kind": self.kind, "place": self.place, "path": self.path.as_dict(),
                "effects": _effects(self.effects)}


@dataclass(frozen=True)
class Destroy:
    obstacle_id: int
    effects: Groups = ()
    kind = "destroy"

    def as_dict(self):
        return {"kind": self.kind, "obstacle_id": self.obstacle_id, "effects": _effects(self.effects)}


@dataclass(frozen=True)
class SendMessage:
    message: Message
    effects: Groups = ()
    kind = "send-message"

    def as_dict(self):
        return {"kind": self.kind, "message": self.message.as_dict(), "effects": _effects(self.effects)}


@dataclass(frozen=True)
class Subgoal:
    situation: Situation
    effects: Groups = ()
    kind = "subgoal"

    def as_dict(self):
        return {"kind": self.kind, "situation": self.situation.as_list(), "effects": _effects(self.effects)}


@dataclass(frozen=True)
class BehaviorPlan:
    steps: Tuple = ()
    status: str = SUCCESS
    reason: Optional[str] = None
    obstacle_id: Optional[int] = None
    iterations: int = 0

    @property
    def messages_sent(self) -> Tuple[Message, ...]:
        return tuple(step.message for step in self.steps if isinstance(step, SendMessage))

    @property
    def succeeded(self) -> bool:
        return self.status == SUCCESS

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "obstacle_id": self.obstacle_id,
            "iterations": self.iterations,
            "steps": [step.as_dict() for step in self.steps],
        }
