"""
SVG pictures of a run: the workspace, its grid layers, agents, goals and
the polylines the agents actually travelled.

Everything is rebuilt from trace events, so a saved trace renders to the
same bytes as the run that produced it.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from django.template.loader import render_to_string

from coalition.trace import TraceEvent
from geometry.grid import discretize, double_outline
from geometry.world import Obstacle, Workspace

from .exceptions import TraceFormatError

logger = logging.getLogger(__name__)

SCALE = 20
MARGIN = 10


@dataclass
class Snapshot:
    """World state at the end of a trace"""
    bounds: Tuple[float, float, float, float]
    res: float = 1.0
    name: str = ""
    obstacle_types: Dict[str, dict] = field(default_factory=dict)
    obstacles: List[dict] = field(default_factory=list)
    agents: List[dict] = field(default_factory=list)
    destroyed: List[int] = field(default_factory=list)
    paths: Dict[int, List[Tuple[float, float]]] = field(default_factory=dict)
    outcome: Optional[dict] = None

    @classmethod
    def from_header(cls, header: dict) -> "Snapshot":
        return cls(
            bounds=tuple(float(v) for v in header["bounds"]),
            res=float(header["res"]),
            name=header.get("name", ""),
            obstacle_types=header.get("obstacle_types", {}),
            obstacles=[dict(o) for o in header.get("obstacles", [])],
            agents=[dict(a) for a in header.get("agents", [])],
        )

    def destroyable(self, obstacle: dict) -> bool:
        return bool(self.obstacle_types.get(obstacle["type"], {}).get("destroyable_by"))

    def workspace(self) -> Workspace:
        obstacles = [
            Obstacle(o["id"], o["vertices"], o["type"], destroyed=o["id"] in self.destroyed)
            for o in self.obstacles
        ]
        types = {name: spec.get("destroyable_by", []) for name, spec in self.obstacle_types.items()}
        return Workspace(self.bounds, obstacles=obstacles, obstacle_types=types)


def snapshot_from_trace(events: Iterable[TraceEvent]) -> Snapshot:
    """
    Replay the world-changing events of a trace on top of its header.

    Raises:
        TraceFormatError: the trace does not start with a scenario header
    """
    events = list(events)
    if not events or events[0].kind != "scenario":
        raise TraceFormatError(1, "trace has no scenario header")
    snapshot = Snapshot.from_header(events[0].payload)
    positions = {a["id"]: a["position"] for a in snapshot.agents}
    for agent in positions:
        snapshot.paths[agent] = [tuple(positions[agent])]

    for event in events[1:]:
        if event.kind == "move":
            points = [tuple(p) for p in event.payload["waypoints"]]
            snapshot.paths.setdefault(event.agent, []).extend(points[1:])
            positions[event.agent] = event.payload["to"]
        elif event.kind == "destruction":
            snapshot.destroyed.append(event.payload["obstacle_id"])
        elif event.kind == "outcome":
            snapshot.outcome = event.payload

    for agent in snapshot.agents:
        agent["position"] = positions[agent["id"]]
    return snapshot


class _Frame:
    """Workspace units to SVG user units, y pointing up"""

    def __init__(self, bounds):
        self.x_min, self.x_max, self.y_min, self.y_max = bounds
        self.width = (self.x_max - self.x_min) * SCALE + 2 * MARGIN
        self.height = (self.y_max - self.y_min) * SCALE + 2 * MARGIN

    def x(self, value: float) -> str:
        return _fmt((value - self.x_min) * SCALE + MARGIN)

    def y(self, value: float) -> str:
        return _fmt((self.y_max - value) * SCALE + MARGIN)

    def point(self, point) -> str:
        return f"{self.x(point[0])},{self.y(point[1])}"

    def length(self, value: float) -> str:
        return _fmt(value * SCALE)


def _fmt(value: float) -> str:
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _cells(snapshot: Snapshot, frame: _Frame) -> List[dict]:
    if not snapshot.obstacles:
        return []
    grid = double_outline(discretize(snapshot.workspace(), snapshot.res))
    size = frame.length(grid.res)
    cells = []
    for i, j in grid.cells():
        if grid.base_blocked[i, j]:
            layer = "base"
        elif grid.outlined_blocked[i, j]:
            layer = "outline"
        else:
            continue
        x0, y0 = grid.origin
        cells.append({
            "layer": layer,
            "x": frame.x(x0 + i * grid.res),
            "y": frame.y(y0 + (j + 1) * grid.res),
            "size": size,
        })
    return cells


def _obstacles(snapshot: Snapshot, frame: _Frame) -> List[dict]:
    shapes = []
    for obstacle in snapshot.obstacles:
        xs = [v[0] for v in obstacle["vertices"]]
        ys = [v[1] for v in obstacle["vertices"]]
        shapes.append({
            "id": obstacle["id"],
            "type": obstacle["type"],
            "points": " ".join(frame.point(v) for v in obstacle["vertices"]),
            "destroyable": snapshot.destroyable(obstacle),
            "destroyed": obstacle["id"] in snapshot.destroyed,
            "corners": (
                frame.x(min(xs)), frame.y(min(ys)), frame.x(max(xs)), frame.y(max(ys)),
            ),
        })
    return shapes


def _agents(snapshot: Snapshot, frame: _Frame) -> List[dict]:
    drawn = []
    for agent in snapshot.agents:
        goal = agent["goal"]
        path = snapshot.paths.get(agent["id"], [])
        drawn.append({
            "id": agent["id"],
            "cx": frame.x(agent["position"][0]),
            "cy": frame.y(agent["position"][1]),
            "r": frame.length(agent["radius"]),
            "goal_cx": frame.x(goal["cp"][0]),
            "goal_cy": frame.y(goal["cp"][1]),
            "goal_r": frame.length(goal["r_g"]),
            "path": " ".join(frame.point(p) for p in path) if len(path) > 1 else "",
            "label_x": frame.x(path[-1][0]) if path else "",
            "label_y": frame.y(path[-1][1]) if path else "",
        })
    return drawn


def render_svg(snapshot: Snapshot) -> str:
    frame = _Frame(snapshot.bounds)
    context = {
        "name": snapshot.name,
        "width": _fmt(frame.width),
        "height": _fmt(frame.height),
        "bounds": {
            "x": _fmt(MARGIN),
            "y": _fmt(MARGIN),
            "width": _fmt(frame.width - 2 * MARGIN),
            "height": _fmt(frame.height - 2 * MARGIN),
        },
        "cells": _cells(snapshot, frame),
        "obstacles": _obstacles(snapshot, frame),
        "agents": _agents(snapshot, frame),
        "outcome": snapshot.outcome,
    }
    logger.debug("Rendering %s cells, %s obstacles", len(context["cells"]), len(context["obstacles"]))
    return render_to_string("scenarios/map.svg", context)


def render_trace(events: Iterable[TraceEvent]) -> str:
    return render_svg(snapshot_from_trace(events))
