"""
Heuristic grid searches: Theta* (any-angle) and LIAN (angle-constrained).

Both use the Euclidean distance to the nearest goal cell as heuristic and
break open-list ties by larger g, then by lexicographic cell order.
"""
import heapq
import logging
import math
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from geometry.grid import Cell, Grid
from geometry.raster import los

from .exceptions import InvalidPlanningParameter, StartBlocked
from .paths import Path, segment_length, turn_angle

logger = logging.getLogger(__name__)

ANGLE_EPS = 1e-9
NO_PARENT = (-1, -1)


class GoalHeuristic:
    """Euclidean distance from a cell to the nearest goal cell"""

    def __init__(self, goals: Iterable[Cell]):
        self.goals = frozenset(goals)
        self._points = np.array(sorted(self.goals), dtype=float).reshape(-1, 2)
        self._cache: Dict[Cell, float] = {}

    def __call__(self, cell: Cell) -> float:
        value = self._cache.get(cell)
        if value is None:
            if not len(self._points):
                value = 0.0
            else:
                value = float(np.min(np.hypot(self._points[:, 0] - cell[0], self._points[:, 1] - cell[1])))
            self._cache[cell] = value
        return value


def prepare_endpoints(grid: Grid, start: Cell, goals: Iterable[Cell]) -> Tuple[Cell, FrozenSet[Cell]]:
    start = grid.check(start)
    if not grid.traversable(start):
        raise StartBlocked(start)
    usable = frozenset(
        (int(c[0]), int(c[1])) for c in goals if grid.in_bounds(c) and grid.traversable(c)
    )
    return start, usable


def _unwind(parents: Dict, node) -> List:
    chain = [node]
    while parents.get(node) is not None:
        node = parents[node]
        chain.append(node)
    chain.reverse()
    return chain


def theta_star(grid: Grid, start: Cell, goals: Iterable[Cell]) -> Optional[Path]:
    """
    Basic Theta*: 8-connected expansion where a successor inherits the
    expanded cell's parent whenever that parent has line of sight to it.
    Returns None when no goal cell is reachable.
    """
    start, goals = prepare_endpoints(grid, start, goals)
    if not goals:
        return None
    h = GoalHeuristic(goals)

    g: Dict[Cell, float] = {start: 0.0}
    parent: Dict[Cell, Optional[Cell]] = {start: None}
    closed = set()
    open_list = [(h(start), -0.0, start)]

    while open_list:
        _, neg_g, cell = heapq.heappop(open_list)
        if cell in closed or -neg_g > g[cell]:
            continue
        if cell in goals:
            path = Path(tuple(_unwind(parent, cell)))
            logger.debug("Theta* reached %s, length %.3f, %s expanded", cell, path.length, len(closed))
            return path
        closed.add(cell)

        anchor = parent[cell]
        for nb in grid.neighbors(cell):
            if nb in closed or not grid.traversable(nb):
                continue
            if anchor is not None and los(grid, anchor, nb):
                via, cost = anchor, g[anchor] + segment_length(anchor, nb)
            else:
                via, cost = cell, g[cell] + segment_length(cell, nb)
            if cost < g.get(nb, math.inf):
                g[nb] = cost
                parent[nb] = via
                heapq.heappush(open_list, (cost + h(nb), -cost, nb))

    logger.debug("Theta* exhausted %s cells without reaching a goal", len(closed))
    return None


@lru_cache(maxsize=None)
def ring_offsets(delta: int) -> Tuple[Cell, ...]:
    """Offsets whose length rounds to delta"""
    out = []
    for di in range(-delta, delta + 1):
        for dj in range(-delta, delta + 1):
            d = math.hypot(di, dj)
            if delta - 0.5 <= d < delta + 0.5:
                out.append((di, dj))
    return tuple(sorted(out))


def lian_successors(grid: Grid, cell: Cell, goals: FrozenSet[Cell], delta: int) -> List[Cell]:
    """
    Candidate next vertices from cell: the discrete circle of radius delta,
    plus goal cells closer than that circle's outer edge.
    """
    ci, cj = cell
    found = set()
    for di, dj in ring_offsets(delta):
        nxt = (ci + di, cj + dj)
        if grid.in_bounds(nxt):
            found.add(nxt)
    for goal in goals:
        d = segment_length(cell, goal)
        if 0 < d < delta + 0.5:
            found.add(goal)
    return sorted(found)


def lian(grid: Grid, start: Cell, goals: Iterable[Cell], alpha_m: float, delta: int) -> Optional[Path]:
    """
    LIAN: heuristic search whose nodes are (cell, parent) pairs so that a
    cell can be re-entered from another heading. A successor is accepted
    when it is traversable, in line of sight and the turn at the current
    cell is at most alpha_m. The heading out of start is unconstrained.
    """
    if not 0 < alpha_m <= 180:
        raise InvalidPlanningParameter(f"alpha_m must lie in (0, 180], got {alpha_m}")
    if delta < 1:
        raise InvalidPlanningParameter(f"delta must be at least 1, got {delta}")
    start, goals = prepare_endpoints(grid, start, goals)
    if not goals:
        return None
    delta = int(delta)
    h = GoalHeuristic(goals)

    root = (start, NO_PARENT)
    g = {root: 0.0}
    came_from = {root: None}
    closed = set()
    open_list = [(h(start), -0.0, start, NO_PARENT)]

    while open_list:
        _, neg_g, cell, prev = heapq.heappop(open_list)
        node = (cell, prev)
        if node in closed or -neg_g > g[node]:
            continue
        if cell in goals:
            cells = [state[0] for state in _unwind(came_from, node)]
            path = Path(tuple(cells))
            logger.debug("LIAN reached %s, max turn %.2f, %s expanded", cell, path.max_turn, len(closed))
            return path
        closed.add(node)

        for nxt in lian_successors(grid, cell, goals, delta):
            if not grid.traversable(nxt):
                continue
            if prev != NO_PARENT and turn_angle(prev, cell, nxt) > alpha_m + ANGLE_EPS:
                continue
            child = (nxt, cell)
            if child in closed or not los(grid, cell, nxt):
                continue
            cost = g[node] + segment_length(cell, nxt)
            if cost < g.get(child, math.inf):
                g[child] = cost
                came_from[child] = node
                heapq.heappush(open_list, (cost + h(nxt), -cost, nxt, cell))

    logger.debug("LIAN exhausted %s nodes at alpha_m=%s, delta=%s", len(closed), alpha_m, delta)
    return None
