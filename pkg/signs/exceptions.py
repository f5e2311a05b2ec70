class SignModelError(Exception):
    """Base class for knowledge base errors"""


class KnowledgeBaseInvalid(SignModelError):
    def __init__(self, message, sign=None):
        super().__init__(message)
        self.sign = sign


class UnresolvedFeature(SignModelError):
    pass


class IndexOutOfRange(SignModelError):
    def __init__(self, sign, index, size):
        super().__init__(f"Sign '{sign}' has {size} relations, index {index} is out of range")
        self.sign = sign
        self.index = index


class CyclicHierarchy(SignModelError):
    def __init__(self, stack):
        path = " -> ".join(f"{name}#{index}" for name, index in stack)
        super().__init__(f"Top-down activation revisits a relation: {path}")
        self.stack = tuple(stack)


class UnrecognizedObstacle(SignModelError):
    def __init__(self, coordinates):
        super().__init__(f"No sign recognizes the obstacle at {list(coordinates)}")
        self.coordinates = coordinates
