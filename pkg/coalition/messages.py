"""
Goal-delegation messages and the in-process FIFO bus.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, List, Optional, Tuple

from .exceptions import UnknownRecipient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Message:
    """
    significance_payload is the communicable description of the required
    action (sign links only), with the member significances recovered from
    the sender's messaging personal meaning under "delegated"; via names
    that personal meaning.
    """
    sender_id: int
    recipient_id: int
    required_action: str
    significance_payload: dict
    obstacle_id: Optional[int] = None
    obstacle_coords: Optional[Tuple[Tuple[float, float], ...]] = None
    sender_goal_facts: Tuple[Tuple[str, ...], ...] = ()
    via: Optional[str] = None

    def __post_init__(self):
        if self.obstacle_coords is not None:
            object.__setattr__(
                self, "obstacle_coords",
                tuple((float(x), float(y)) for x, y in self.obstacle_coords),
            )
        object.__setattr__(
            self, "sender_goal_facts", tuple(tuple(g) for g in self.sender_goal_facts)
        )

    @property
    def key(self) -> tuple:
        return (self.recipient_id, self.required_action, self.obstacle_id)

    def payload_signs(self) -> List[str]:
        names = [self.required_action]
        for side in ("conditions", "effects"):
            for group in self.significance_payload.get(side, ()):
                names.extend(group)
        return sorted(set(names))

    def as_dict(self) -> dict:
        return {
            "sender": self.sender_id,
            "recipient": self.recipient_id,
            "required_action": self.required_action,
            "significance": self.significance_payload,
            "obstacle_id": self.obstacle_id,
            "obstacle_coords": (
                [list(p) for p in self.obstacle_coords] if self.obstacle_coords is not None else None
            ),
            "sender_goal_facts": [list(g) for g in self.sender_goal_facts],
            "via": self.via,
        }


class MessageBus:
    """FIFO queue; a message waits until its recipient's next turn"""

    def __init__(self, agent_ids: Iterable[int]):
        self.agent_ids = frozenset(agent_ids)
        self._queue: Deque[Message] = deque()
        self.log: List[Message] = []

    def __len__(self):
        return len(self._queue)

    def send(self, message: Message):
        if message.recipient_id not in self.agent_ids:
            raise UnknownRecipient(message.recipient_id)
        self._queue.append(message)
        self.log.append(message)
        logger.info("Message %s -> %s: %s", message.sender_id, message.recipient_id, message.required_action)

    def pending_for(self, agent_id: int) -> bool:
        return any(m.recipient_id == agent_id for m in self._queue)

    def collect(self, agent_id: int) -> List[Message]:
        """Remove and return the agent's messages in send order"""
        mine = [m for m in self._queue if m.recipient_id == agent_id]
        if mine:
            self._queue = deque(m for m in self._queue if m.recipient_id != agent_id)
        return mine
