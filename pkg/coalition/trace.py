from dataclasses import dataclass, field
from typing import Callable, List, Optional


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    agent: Optional[int]
    kind: str
    payload: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"tick": self.tick, "agent": self.agent, "kind": self.kind, "payload": self.payload}

    @classmethod
    def from_dict(cls, data: dict) -> "TraceEvent":
        return cls(int(data["tick"]), data.get("agent"), str(data["kind"]), dict(data.get("payload") or {}))


class Trace:
    """Append-only event list; ticks never decrease"""

    def __init__(self, listener: Optional[Callable[[TraceEvent], None]] = None):
        self.events: List[TraceEvent] = []
        self.tick = 0
        self.listener = listener

    def record(self, agent: Optional[int], kind: str, payload: Optional[dict] = None) -> TraceEvent:
        event = TraceEvent(self.tick, agent, kind, payload or {})
        self.events.append(event)
        if self.listener is not None:
            self.listener(event)
        return event

    def recorder_for(self, agent: int) -> Callable[[str, dict], None]:
        return lambda kind, payload: self.record(agent, kind, payload)

    def of_kind(self, kind: str) -> List[TraceEvent]:
        return [e for e in self.events if e.kind == kind]

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)
