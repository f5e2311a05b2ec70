"""
Continuous workspace model: a rectangle with typed polygonal obstacles
and circular agent bodies.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

from shapely.geometry import LineString, Point, Polygon
from shapely.ops import unary_union
from shapely.prepared import prep

from .exceptions import (
    AlreadyDestroyed, EmptyWorkspace, InvalidPolygon, UnknownObstacle, WorldModelError
)

logger = logging.getLogger(__name__)

Coordinate = Tuple[float, float]


@dataclass
class Obstacle:
    """Polygonal obstacle; only the destroyed flag ever changes"""
    id: int
    vertices: Tuple[Coordinate, ...]
    obstacle_type: str
    destroyed: bool = False

    def __post_init__(self):
        self.vertices = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(set(self.vertices)) < 3:
            raise InvalidPolygon(f"Obstacle {self.id} needs at least 3 distinct vertices")
        if not self.polygon.is_valid or self.polygon.area <= 0:
            raise InvalidPolygon(f"Obstacle {self.id} is not a simple polygon")

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.vertices)

    @property
    def coordinates(self) -> List[List[float]]:
        return [[x, y] for x, y in self.vertices]


@dataclass(frozen=True)
class AgentBody:
    id: int
    position: Coordinate
    radius: float


@dataclass
class Workspace:
    """
    Rectangular region U with obstacles and agents.

    obstacle_types maps every declared type to the ids of the agents able
    to destroy obstacles of that type (an empty set models walls).
    """
    bounds: Tuple[float, float, float, float]
    obstacles: List[Obstacle] = field(default_factory=list)
    agents: List[AgentBody] = field(default_factory=list)
    obstacle_types: Dict[str, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        x_min, x_max, y_min, y_max = (float(v) for v in self.bounds)
        self.bounds = (x_min, x_max, y_min, y_max)
        if not (x_min < x_max and y_min < y_max):
            raise EmptyWorkspace(f"Degenerate workspace bounds {self.bounds}")
        self.obstacle_types = {name: frozenset(ids) for name, ids in self.obstacle_types.items()}

        seen = set()
        for obstacle in self.obstacles:
            if obstacle.id in seen:
                raise WorldModelError(f"Duplicate obstacle id {obstacle.id}")
            seen.add(obstacle.id)
            if self.obstacle_types and obstacle.obstacle_type not in self.obstacle_types:
                raise WorldModelError(
                    f"Obstacle {obstacle.id} has undeclared type '{obstacle.obstacle_type}'"
                )
            for vertex in obstacle.vertices:
                if not self.contains(vertex):
                    raise WorldModelError(f"Obstacle {obstacle.id} vertex {vertex} is out of bounds")

        radii = {agent.radius for agent in self.agents}
        if any(r <= 0 for r in radii):
            raise WorldModelError("Agent radius must be positive")
        if len(radii) > 1:
            raise WorldModelError("All agents must share the same radius")
        for agent in self.agents:
            if not self.contains(agent.position):
                raise WorldModelError(f"Agent {agent.id} starts outside the workspace")
            if not segment_clear(self, agent.position, agent.position):
                raise WorldModelError(f"Agent {agent.id} starts inside an obstacle")

    def contains(self, point: Coordinate) -> bool:
        x_min, x_max, y_min, y_max = self.bounds
        return x_min <= point[0] <= x_max and y_min <= point[1] <= y_max

    @property
    def agent_radius(self) -> Optional[float]:
        return self.agents[0].radius if self.agents else None

    def obstacle(self, obstacle_id: int) -> Obstacle:
        for obstacle in self.obstacles:
            if obstacle.id == obstacle_id:
                return obstacle
        raise UnknownObstacle(obstacle_id)

    def active_obstacles(self) -> List[Obstacle]:
        return [o for o in self.obstacles if not o.destroyed]

    def find_obstacle(self, coordinates) -> Optional[Obstacle]:
        """Look up a non-destroyed obstacle by its vertex list"""
        wanted = {(float(x), float(y)) for x, y in coordinates}
        for obstacle in self.active_obstacles():
            if set(obstacle.vertices) == wanted:
                return obstacle
        return None

    def can_destroy(self, agent_id: int, obstacle_id: int) -> bool:
        obstacle = self.obstacle(obstacle_id)
        return agent_id in self.obstacle_types.get(obstacle.obstacle_type, frozenset())

    def blocking_geometry(self):
        """Prepared union of all non-destroyed obstacles"""
        key = tuple(o.id for o in self.active_obstacles())
        cache = self.__dict__.setdefault("_blocking_cache", {})
        if key not in cache:
            union = unary_union([o.polygon for o in self.active_obstacles()])
            cache.clear()
            cache[key] = prep(union) if not union.is_empty else None
        return cache[key]


def segment_clear(workspace: Workspace, p1: Coordinate, p2: Coordinate) -> bool:
    """True iff the closed segment p1-p2 touches no non-destroyed obstacle"""
    blocking = workspace.blocking_geometry()
    if blocking is None:
        return True
    geom = Point(p1) if tuple(p1) == tuple(p2) else LineString([p1, p2])
    return not blocking.intersects(geom)


def destroy_obstacle(workspace: Workspace, obstacle_id: int) -> Workspace:
    obstacle = workspace.obstacle(obstacle_id)
    if obstacle.destroyed:
        raise AlreadyDestroyed(obstacle_id)
    obstacle.destroyed = True
    logger.info("Obstacle %s destroyed", obstacle_id)
    return workspace
