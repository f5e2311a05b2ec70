import heapq
import math
import random
from collections import deque

import numpy as np
from django.test import SimpleTestCase

from geometry.grid import Grid, discretize, double_outline
from geometry.raster import los
from geometry.world import Obstacle, Workspace, segment_clear

from .blocking import identify_blocking_obstacle
from .exceptions import InvalidPlanningParameter, NoCandidate, StartBlocked
from .goals import resolve_goal_area
from .paths import GoalArea, Path, path_max_turn
from .planner import AngleInfeasible, Blocked, GoalAreaInvalid, Success, plan, plan_to_cells
from .search import lian, theta_star


def octile_astar(blocked, start, goals):
    """8-connected shortest path length, or None"""
    width, height = blocked.shape
    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if d > dist[cell]:
            continue
        if cell in goals:
            return d
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                nb = (cell[0] + di, cell[1] + dj)
                if (di or dj) and 0 <= nb[0] < width and 0 <= nb[1] < height and not blocked[nb]:
                    nd = d + math.hypot(di, dj)
                    if nd < dist.get(nb, math.inf):
                        dist[nb] = nd
                        heapq.heappush(heap, (nd, nb))
    return None


def angle_between(a, b, c):
    u = (b[0] - a[0], b[1] - a[1])
    v = (c[0] - b[0], c[1] - b[1])
    cosine = (u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))
    return math.degrees(math.acos(max(-1.0, min(1.0, cosine))))


def constrained_oracle(grid, start, goals, alpha_m, delta):
    """Exhaustive breadth-first enumeration of (cell, previous cell) states"""
    if start in goals:
        return True
    seen = {(start, None)}
    queue = deque(seen)
    while queue:
        cell, prev = queue.popleft()
        for i in range(max(0, cell[0] - delta), min(grid.width, cell[0] + delta + 1)):
            for j in range(max(0, cell[1] - delta), min(grid.height, cell[1] + delta + 1)):
                nxt = (i, j)
                d = math.hypot(i - cell[0], j - cell[1])
                on_ring = delta - 0.5 <= d < delta + 0.5
                if not (on_ring or (nxt in goals and 0 < d < delta + 0.5)):
                    continue
                if grid.outlined_blocked[nxt] or not los(grid, cell, nxt):
                    continue
                if prev is not None and angle_between(prev, cell, nxt) > alpha_m + 1e-9:
                    continue
                if nxt in goals:
                    return True
                if (nxt, cell) not in seen:
                    seen.add((nxt, cell))
                    queue.append((nxt, cell))
    return False


def random_grid(rng, width, height, density):
    return Grid.from_blocked(rng.random((width, height)) < density)


def pick_free(rng, grid):
    free = list(grid.free_cells())
    return free[rng.integers(len(free))] if free else None


def l_corridor():
    """7x7 map whose only free cells form an L from (0, 0) to (6, 6)"""
    blocked = np.ones((7, 7), dtype=bool)
    blocked[:, 0] = False
    blocked[6, :] = False
    return Grid.from_blocked(blocked)


def wall(obstacle_id, x0, x1, y0=0, y1=10):
    return Obstacle(obstacle_id, [(x0, y0), (x1, y0), (x1, y1), (x0, y1)], "wall")


class PathTests(SimpleTestCase):

    def test_collinear(self):
        self.assertEqual(path_max_turn(Path(((0, 0), (1, 1), (3, 3)))), 0.0)

    def test_elbow(self):
        self.assertAlmostEqual(path_max_turn(Path(((0, 0), (2, 0), (2, 5)))), 90.0)

    def test_short_paths(self):
        self.assertEqual(path_max_turn(Path(((4, 4),))), 0.0)
        self.assertEqual(Path(((4, 4),)).length, 0.0)

    def test_random_against_dot_products(self):
        rng = random.Random(8)
        for _ in range(200):
            cells = []
            while len(cells) < rng.randint(3, 8):
                cell = (rng.randrange(20), rng.randrange(20))
                if not cells or cells[-1] != cell:
                    cells.append(cell)
            expected = max(
                (angle_between(cells[k - 1], cells[k], cells[k + 1]) for k in range(1, len(cells) - 1)),
                default=0.0,
            )
            self.assertAlmostEqual(path_max_turn(Path(tuple(cells))), expected, places=9)


class GoalAreaTests(SimpleTestCase):

    def test_open_space(self):
        grid = Grid.from_blocked(np.zeros((10, 10), dtype=bool))
        self.assertEqual(resolve_goal_area(grid, GoalArea((4.5, 4.5), 0.6)), {(4, 4)})

    def test_radius_covers_neighbors(self):
        grid = Grid.from_blocked(np.zeros((10, 10), dtype=bool))
        self.assertEqual(len(resolve_goal_area(grid, GoalArea((4.5, 4.5), 1.0))), 5)

    def test_fully_blocked(self):
        grid = Grid.from_blocked(np.ones((6, 6), dtype=bool))
        self.assertEqual(resolve_goal_area(grid, GoalArea((3, 3), 2)), frozenset())

    def test_blocked_center_takes_free_neighbors(self):
        rng = np.random.default_rng(21)
        checked = 0
        while checked < 100:
            blocked = rng.random((10, 10)) < 0.5
            ci, cj = rng.integers(0, 10, size=2)
            blocked[ci, cj] = True
            grid = Grid.from_blocked(blocked)
            neighbors = {c for c in grid.neighbors((ci, cj)) if grid.traversable(c)}
            if not neighbors:
                continue
            cells = resolve_goal_area(grid, GoalArea(grid.cell_center((ci, cj)), 0.2))
            self.assertEqual(cells, neighbors)
            checked += 1

    def test_ring_expansion_beyond_neighbors(self):
        blocked = np.ones((9, 9), dtype=bool)
        blocked[0, 4] = False
        grid = Grid.from_blocked(blocked)
        self.assertEqual(resolve_goal_area(grid, GoalArea((4.5, 4.5), 0.5)), {(0, 4)})

    def test_negative_radius(self):
        with self.assertRaises(InvalidPlanningParameter):
            GoalArea((1, 1), -0.5)


class ThetaStarTests(SimpleTestCase):

    def test_start_is_goal(self):
        grid = Grid.from_blocked(np.zeros((5, 5), dtype=bool))
        path = theta_star(grid, (2, 2), {(2, 2)})
        self.assertEqual(path.cells, ((2, 2),))
        self.assertEqual(path.length, 0)

    def test_open_grid_single_segment(self):
        grid = Grid.from_blocked(np.zeros((20, 20), dtype=bool))
        path = theta_star(grid, (0, 0), {(19, 19)})
        self.assertEqual(path.cells, ((0, 0), (19, 19)))
        self.assertAlmostEqual(path.length, math.hypot(19, 19))

    def test_start_blocked(self):
        grid = Grid.from_blocked(np.eye(4, dtype=bool))
        with self.assertRaises(StartBlocked):
            theta_star(grid, (1, 1), {(3, 0)})

    def test_matches_octile_astar(self):
        rng = np.random.default_rng(1)
        sizes = [int(rng.integers(4, 21)) for _ in range(995)] + [64] * 5
        for size in sizes:
            grid = random_grid(rng, size, int(rng.integers(4, size + 1)), rng.uniform(0.05, 0.35))
            start, goal = pick_free(rng, grid), pick_free(rng, grid)
            if start is None:
                continue
            path = theta_star(grid, start, {goal})
            reference = octile_astar(grid.outlined_blocked, start, {goal})
            self.assertEqual(path is None, reference is None)
            if path is not None:
                self.assertLessEqual(path.length, reference + 1e-9)
                self.assertEqual(path.cells[0], start)
                self.assertEqual(path.cells[-1], goal)
                for a, b in zip(path.cells, path.cells[1:]):
                    self.assertTrue(los(grid, a, b))


class LianTests(SimpleTestCase):

    def test_straight_corridor(self):
        grid = Grid.from_blocked(np.zeros((10, 3), dtype=bool))
        for alpha in (10, 45, 180):
            path = lian(grid, (0, 1), {(9, 1)}, alpha, 3)
            self.assertEqual(path.max_turn, 0.0)
            self.assertAlmostEqual(path.length, 9.0)

    def test_l_corridor(self):
        grid = l_corridor()
        self.assertIsNone(lian(grid, (0, 0), {(6, 6)}, 30, 1))
        path = lian(grid, (0, 0), {(6, 6)}, 90, 1)
        self.assertIsNotNone(path)
        self.assertLessEqual(path.max_turn, 90 + 1e-9)

    def test_parameter_ranges(self):
        grid = Grid.from_blocked(np.zeros((4, 4), dtype=bool))
        for alpha, delta in ((0, 1), (181, 1), (90, 0)):
            with self.subTest(alpha=alpha, delta=delta), self.assertRaises(InvalidPlanningParameter):
                lian(grid, (0, 0), {(3, 3)}, alpha, delta)

    def test_segment_lengths(self):
        grid = Grid.from_blocked(np.zeros((30, 30), dtype=bool))
        path = lian(grid, (2, 2), {(25, 17)}, 45, 5)
        steps = [math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(path.cells, path.cells[1:])]
        for step in steps[:-1]:
            self.assertEqual(round(step), 5)
        self.assertLess(steps[-1], 5.5)

    def test_unconstrained_matches_theta_star(self):
        rng = np.random.default_rng(6)
        for _ in range(150):
            grid = random_grid(rng, int(rng.integers(4, 12)), int(rng.integers(4, 12)), 0.25)
            start, goal = pick_free(rng, grid), pick_free(rng, grid)
            if start is None:
                continue
            found = lian(grid, start, {goal}, 180, 1)
            self.assertEqual(found is None, theta_star(grid, start, {goal}) is None)

    def test_complete_against_exhaustive_search(self):
        rng = np.random.default_rng(9)
        alphas = (30, 45, 60, 90, 120, 180)
        for _ in range(150):
            grid = double_outline(random_grid(rng, int(rng.integers(5, 13)), int(rng.integers(5, 13)), 0.04))
            start, goal = pick_free(rng, grid), pick_free(rng, grid)
            if start is None:
                continue
            alpha = alphas[int(rng.integers(len(alphas)))]
            delta = int(rng.integers(1, 4))
            path = lian(grid, start, {goal}, alpha, delta)
            self.assertEqual(path is not None, constrained_oracle(grid, start, {goal}, alpha, delta))
            if path is not None:
                self.assertLessEqual(path_max_turn(path), alpha + 1e-9)
                for a, b in zip(path.cells, path.cells[1:]):
                    self.assertTrue(los(grid, a, b))


class BlockingObstacleTests(SimpleTestCase):

    def test_single_wall(self):
        ws = Workspace((0, 10, 0, 10), [wall(1, 4.2, 4.8)])
        grid = double_outline(discretize(ws, 1))
        self.assertIsNone(theta_star(grid, (1, 5), {(8, 5)}))
        found = identify_blocking_obstacle(grid, ws, (1, 5), {(8, 5)})
        self.assertEqual(found.obstacle_id, 1)
        self.assertEqual(found.coordinates, ws.obstacle(1).coordinates)

    def test_nearer_of_two_walls(self):
        ws = Workspace((0, 10, 0, 10), [wall(1, 6.2, 6.8), wall(2, 3.2, 3.8)])
        grid = double_outline(discretize(ws, 1))
        self.assertEqual(identify_blocking_obstacle(grid, ws, (1, 5), {(9, 5)}).obstacle_id, 2)

    def test_cheapest_detour_wins(self):
        ws = Workspace((0, 20, 0, 10), [
            wall(1, 9.2, 9.8, 0, 4.8),
            wall(2, 9.2, 9.8, 5.2, 10),
        ])
        grid = double_outline(discretize(ws, 1))
        # Goal sits across the upper wall
        self.assertEqual(identify_blocking_obstacle(grid, ws, (2, 8), {(17, 8)}).obstacle_id, 2)

    def test_no_candidate(self):
        blocked = np.zeros((8, 8), dtype=bool)
        blocked[4, :] = True
        grid = Grid.from_blocked(blocked)
        with self.assertRaises(NoCandidate):
            identify_blocking_obstacle(grid, Workspace((0, 8, 0, 8)), (1, 1), {(6, 6)})


class PlanTests(SimpleTestCase):

    def test_empty_map(self):
        ws = Workspace((0, 20, 0, 20))
        grid = double_outline(discretize(ws, 1))
        result = plan(grid, ws, (1, 1), GoalArea((18.5, 18.5), 0.5), 45, 5)
        self.assertIsInstance(result, Success)
        self.assertEqual(result.path.cells[0], (1, 1))
        self.assertEqual(result.path.cells[-1], (18, 18))

    def test_blocked(self):
        ws = Workspace((0, 10, 0, 10), [wall(7, 4.2, 4.8)])
        grid = double_outline(discretize(ws, 1))
        result = plan(grid, ws, (1, 5), GoalArea((8.5, 5.5), 1), 45, 3)
        self.assertEqual(result, Blocked(7, tuple(map(tuple, ws.obstacle(7).coordinates))))

    def test_angle_infeasible(self):
        result = plan(l_corridor(), Workspace((0, 7, 0, 7)), (0, 0), GoalArea((6.5, 6.5), 0.1), 20, 1)
        self.assertIsInstance(result, AngleInfeasible)
        self.assertEqual(result.any_angle_path.cells[-1], (6, 6))

    def test_goal_area_invalid(self):
        grid = Grid.from_blocked(np.zeros((5, 5), dtype=bool))
        ws = Workspace((0, 5, 0, 5))
        self.assertIsInstance(plan_to_cells(grid, ws, (0, 0), (), 45, 1), GoalAreaInvalid)

    def test_unreachable_without_obstacles_is_invalid(self):
        blocked = np.zeros((8, 8), dtype=bool)
        blocked[4, :] = True
        grid = Grid.from_blocked(blocked)
        result = plan(grid, Workspace((0, 8, 0, 8)), (1, 1), GoalArea((6.5, 6.5), 0.5), 45, 1)
        self.assertIsInstance(result, GoalAreaInvalid)

    def test_success_paths_are_clear_in_workspace(self):
        rng = random.Random(12)
        for _ in range(40):
            obstacles = []
            for n in range(3):
                x0, y0 = rng.uniform(2, 16), rng.uniform(2, 16)
                obstacles.append(Obstacle(n + 1, [(x0, y0), (x0 + 2, y0), (x0 + 1, y0 + 2)], "block"))
            ws = Workspace((0, 20, 0, 20), obstacles)
            grid = double_outline(discretize(ws, 1))
            if not grid.traversable((0, 0)):
                continue
            result = plan(grid, ws, (0, 0), GoalArea((19.5, 19.5), 1.5), 60, 3)
            self.assertFalse(isinstance(result, GoalAreaInvalid))
            if isinstance(result, Success):
                self.assertLessEqual(result.path.max_turn, 60 + 1e-9)
                points = result.path.waypoints(grid)
                for a, b in zip(points, points[1:]):
                    self.assertTrue(segment_clear(ws, a, b))

    def test_deterministic(self):
        ws = Workspace((0, 20, 0, 20), [wall(1, 8.2, 8.8, 3, 17)])
        grid = double_outline(discretize(ws, 1))
        first = plan(grid, ws, (2, 10), GoalArea((17.5, 10.5), 1.0), 45, 4)
        second = plan(grid, ws, (2, 10), GoalArea((17.5, 10.5), 1.0), 45, 4)
        self.assertEqual(first.as_dict(), second.as_dict())
