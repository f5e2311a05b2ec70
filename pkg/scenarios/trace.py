"""
Trace files: one JSON object per line, keys sorted, no insignificant whitespace.
"""
import json
from pathlib import Path
from typing import Iterable, List

from coalition.trace import TraceEvent

from .exceptions import TraceFormatError


def dumps_event(event: TraceEvent) -> str:
    return json.dumps(event.as_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def dumps_trace(events: Iterable[TraceEvent]) -> str:
    return "".join(dumps_event(event) + "\n" for event in events)


def loads_trace(text: str) -> List[TraceEvent]:
    events = []
    last_tick = 0
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            event = TraceEvent.from_dict(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise TraceFormatError(number, f"not a trace record ({exc})")
        if event.tick < last_tick:
            raise TraceFormatError(number, f"tick {event.tick} after tick {last_tick}")
        last_tick = event.tick
        events.append(event)
    return events


def write_trace(path, events: Iterable[TraceEvent]):
    Path(path).write_text(dumps_trace(events), encoding="utf-8")


def read_trace(path) -> List[TraceEvent]:
    return loads_trace(Path(path).read_text(encoding="utf-8"))
