class WorldModelError(Exception):
    """Base class for workspace and grid errors"""


class EmptyWorkspace(WorldModelError):
    pass


class InvalidPolygon(WorldModelError):
    pass


class ResolutionTooCoarse(WorldModelError):
    pass


class OutOfBounds(WorldModelError):
    def __init__(self, cell, shape):
        super().__init__(f"Cell {cell} is outside a {shape[0]}x{shape[1]} grid")
        self.cell = cell


class UnknownObstacle(WorldModelError):
    def __init__(self, obstacle_id):
        super().__init__(f"No obstacle with id {obstacle_id}")
        self.obstacle_id = obstacle_id


class AlreadyDestroyed(WorldModelError):
    def __init__(self, obstacle_id):
        super().__init__(f"Obstacle {obstacle_id} is already destroyed")
        self.obstacle_id = obstacle_id
