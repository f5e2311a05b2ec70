"""
Which obstacle stands between an agent and its goal area.
"""
import heapq
import logging
import math
from typing import Dict, FrozenSet, Iterable, List, NamedTuple

from geometry.grid import Cell, Grid
from geometry.world import Workspace

from .exceptions import NoCandidate
from .paths import segment_length
from .search import GoalHeuristic, prepare_endpoints

logger = logging.getLogger(__name__)


class BlockingObstacle(NamedTuple):
    obstacle_id: int
    coordinates: List[List[float]]


def reachable_region(grid: Grid, start: Cell) -> Dict[Cell, float]:
    """Dijkstra over 8-connected traversable cells; maps cell to distance from start"""
    dist = {start: 0.0}
    heap = [(0.0, start)]
    done = set()
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        for nb in grid.neighbors(cell):
            if not grid.traversable(nb):
                continue
            nd = d + segment_length(cell, nb)
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return dist


def _owners_behind(grid: Grid, frontier_cell: Cell) -> FrozenSet[int]:
    """
    Obstacles responsible for a blocked frontier cell. A base-blocked cell
    answers for itself; an outline cell answers for the base cells around it.
    """
    if grid.base_blocked[frontier_cell]:
        return frozenset(grid.owners.get(frontier_cell, ()))
    ids = set()
    for cell in grid.neighbors(frontier_cell):
        ids.update(grid.owners.get(cell, ()))
    return frozenset(ids)


def identify_blocking_obstacle(grid: Grid, workspace: Workspace, start: Cell,
                               goals: Iterable[Cell]) -> BlockingObstacle:
    """
    Flood-fill the region reachable from start and score every obstacle on
    its border by the cheapest detour through it: distance from start to a
    bordering reachable cell plus that cell's straight-line distance to the
    nearest goal. The lowest score wins, ties go to the smaller id.
    """
    start, _ = prepare_endpoints(grid, start, ())
    goal_set = frozenset((int(c[0]), int(c[1])) for c in goals)
    h = GoalHeuristic(goal_set)
    region = reachable_region(grid, start)

    scores: Dict[int, float] = {}
    for cell, g in region.items():
        estimate = g + h(cell)
        for nb in grid.neighbors(cell):
            if grid.traversable(nb):
                continue
            for obstacle_id in _owners_behind(grid, nb):
                if estimate < scores.get(obstacle_id, math.inf):
                    scores[obstacle_id] = estimate

    active = {o.id for o in workspace.active_obstacles()}
    scores = {k: v for k, v in scores.items() if k in active}
    if not scores:
        raise NoCandidate(f"No obstacle borders the {len(region)} cells reachable from {start}")

    best = min(scores, key=lambda obstacle_id: (scores[obstacle_id], obstacle_id))
    logger.debug("Blocking obstacle %s (score %.3f of %s candidates)", best, scores[best], len(scores))
    return BlockingObstacle(best, workspace.obstacle(best).coordinates)
