import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Set, Tuple

from django.conf import settings

from geometry.world import Coordinate
from pathplanning.paths import GoalArea
from signs.knowledge import KnowledgeBase, Situation

logger = logging.getLogger(__name__)


def _setting(key):
    return lambda: settings.RELOCATION[key]


@dataclass
class AgentMind:
    """
    Planning state of one agent: its knowledge base, the observed (current)
    and desired (goal) situations, its body position and planning parameters.

    known_obstacles maps obstacle sign names to (obstacle id, coordinates)
    once a blocked plan has been traced back to that sign.
    """
    agent_id: int
    kb: KnowledgeBase
    current: Situation
    goal: Situation
    position: Coordinate
    places: Dict[str, GoalArea]
    goal_place: str
    self_sign: str
    public_sign: Optional[str] = None
    introspection: bool = True
    alpha_m: float = field(default_factory=_setting("ALPHA_M"))
    alpha_fallback: Optional[float] = None
    delta: int = field(default_factory=_setting("LIAN_DELTA"))
    iteration_cap: int = field(default_factory=_setting("PMA_ITERATION_CAP"))
    known_obstacles: Dict[str, Tuple[Optional[int], Tuple[Coordinate, ...]]] = field(default_factory=dict)
    sent_requests: Set[tuple] = field(default_factory=set)
    received: List = field(default_factory=list)
    recorder: Optional[Callable[[str, dict], None]] = field(default=None, repr=False, compare=False)

    @property
    def goal_area(self) -> GoalArea:
        return self.places[self.goal_place]

    @property
    def capabilities(self) -> FrozenSet[str]:
        """Significances this agent can realize itself"""
        return frozenset(
            sign.name for sign in self.kb
            if any(sign.xi_links.get(i) for i in range(len(sign.significance)))
        )

    def arrived(self) -> bool:
        return self.goal_area.contains(self.position)

    def emit(self, kind: str, payload: dict):
        if self.recorder is not None:
            self.recorder(kind, payload)
