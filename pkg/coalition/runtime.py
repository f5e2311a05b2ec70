"""
Deterministic round-robin runtime for a coalition of planning agents.

Every tick each agent, in declaration order, gets one turn: it either reads
its messages and re-plans, re-plans after a world change, or executes the
next step of its current plan.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence

from django.conf import settings

from geometry.raster import los
from pma.mind import AgentMind
from pma.procedure import forget_obstacle, incorporate_obstacle, pma
from pma.steps import FAILURE, SUCCESS, BehaviorPlan, Destroy, Reason, Relocate, SendMessage, Subgoal
from signs.exceptions import UnrecognizedObstacle

from .exceptions import CapabilityDenied, TickCapExceeded, UnknownSign
from .messages import Message, MessageBus
from .trace import Trace, TraceEvent
from .world import SharedWorld

logger = logging.getLogger(__name__)


def on_message(mind: AgentMind, message: Message):
    """
    Take on a delegated goal: the referenced obstacle joins the current
    situation and the requested effects join the goal.

    Raises:
        UnknownSign: the payload or obstacle is outside the recipient's KB
    """
    unknown = [name for name in message.payload_signs() if name not in mind.kb]
    if unknown:
        raise UnknownSign(mind.agent_id, unknown)
    if message.obstacle_coords is not None:
        try:
            incorporate_obstacle(message.obstacle_coords, mind, message.obstacle_id)
        except UnrecognizedObstacle:
            raise UnknownSign(mind.agent_id, [f"<obstacle {message.obstacle_id}>"])
    for group in message.significance_payload.get("effects", ()):
        names = [name for name in group if name != message.required_action]
        if names:
            mind.goal = mind.goal.with_group(names)
    mind.received.append(message)
    mind.emit("receive", message.as_dict())
    return mind.goal


@dataclass
class Member:
    mind: AgentMind
    pending: Deque = field(default_factory=deque)
    plans: List[BehaviorPlan] = field(default_factory=list)
    needs_replan: bool = True

    @property
    def agent_id(self) -> int:
        return self.mind.agent_id

    @property
    def last_plan(self) -> Optional[BehaviorPlan]:
        return self.plans[-1] if self.plans else None


@dataclass
class CoalitionRun:
    """Outcome of a run: the joint plan, the message log and the trace"""
    minds: List[AgentMind]
    world: SharedWorld
    messages: List[Message]
    plans: Dict[int, List[BehaviorPlan]]
    trace: List[TraceEvent]
    status: str
    reason: Optional[str] = None
    obstacle_id: Optional[int] = None
    ticks: int = 0

    @property
    def succeeded(self) -> bool:
        return self.status == SUCCESS

    def events(self, kind: str) -> List[TraceEvent]:
        return [e for e in self.trace if e.kind == kind]

    def joint_plan(self) -> dict:
        return {
            "plans": {str(agent): [p.as_dict() for p in plans] for agent, plans in self.plans.items()},
            "messages": [m.as_dict() for m in self.messages],
        }

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "reason": self.reason,
            "obstacle_id": self.obstacle_id,
            "ticks": self.ticks,
            "positions": {str(m.agent_id): list(m.position) for m in self.minds},
        }


class Coalition:

    def __init__(self, world: SharedWorld, minds: Sequence[AgentMind], tick_cap: Optional[int] = None,
                 header: Optional[dict] = None, listener=None):
        self.world = world
        self.members = [Member(mind) for mind in minds]
        self.bus = MessageBus(mind.agent_id for mind in minds)
        self.trace = Trace(listener)
        self.tick_cap = tick_cap if tick_cap is not None else settings.RELOCATION["TICK_CAP"]
        for member in self.members:
            member.mind.recorder = self.trace.recorder_for(member.agent_id)
        if header is not None:
            self.trace.record(None, "scenario", header)

    def all_arrived(self) -> bool:
        return all(member.mind.arrived() for member in self.members)

    def settled(self) -> bool:
        return not len(self.bus) and not any(m.pending or m.needs_replan for m in self.members)

    def run(self) -> CoalitionRun:
        while not self.all_arrived():
            if self.trace.tick >= self.tick_cap:
                partial = self.finish(FAILURE, Reason.TICK_CAP_EXCEEDED)
                raise TickCapExceeded(self.tick_cap, partial)
            self.trace.tick += 1
            for member in self.members:
                self.turn(member)
                if self.all_arrived():
                    return self.finish(SUCCESS)
            if self.settled():
                return self.finish(FAILURE)
        return self.finish(SUCCESS)

    def finish(self, status: str, reason: Optional[str] = None) -> CoalitionRun:
        obstacle_id = None
        if status == FAILURE and reason is None:
            stuck = [m.last_plan for m in self.members if not m.mind.arrived() and m.last_plan]
            refused = [m.last_plan for m in self.members
                       if m.last_plan and m.last_plan.reason == Reason.UNKNOWN_SIGN]
            failed = [p for p in stuck if p.status == FAILURE] or refused or stuck
            if failed:
                reason, obstacle_id = failed[0].reason, failed[0].obstacle_id
        self.trace.record(None, "outcome", {"status": status, "reason": reason, "obstacle_id": obstacle_id})
        logger.info("Coalition %s after %s ticks%s", status, self.trace.tick, f" [{reason}]" if reason else "")
        return CoalitionRun(
            minds=[m.mind for m in self.members],
            world=self.world,
            messages=list(self.bus.log),
            plans={m.agent_id: list(m.plans) for m in self.members},
            trace=list(self.trace.events),
            status=status,
            reason=reason,
            obstacle_id=obstacle_id,
            ticks=self.trace.tick,
        )

    def turn(self, member: Member):
        if self.bus.pending_for(member.agent_id):
            for message in self.bus.collect(member.agent_id):
                try:
                    on_message(member.mind, message)
                except UnknownSign as exc:
                    self.refuse(member, message, exc)
                    continue
                member.needs_replan = True
        if member.needs_replan:
            self.replan(member)
        elif member.pending:
            self.execute(member)

    def refuse(self, member: Member, message: Message, exc: UnknownSign):
        """A request the member cannot read leaves a failed plan and the run goes on"""
        logger.warning("%s; request from agent %s refused", exc, message.sender_id)
        self.trace.record(member.agent_id, "refusal", {"message": message.as_dict(), "unknown": list(exc.names)})
        member.plans.append(BehaviorPlan((), FAILURE, Reason.UNKNOWN_SIGN, message.obstacle_id))
        self.trace.record(member.agent_id, "plan", member.plans[-1].as_dict())

    def replan(self, member: Member):
        mind = member.mind
        plan = pma(mind.current, mind.goal, mind, self.world)
        member.needs_replan = False
        member.plans.append(plan)
        executable = plan.steps if plan.status != FAILURE else ()
        member.pending = deque(step for step in executable if not isinstance(step, Subgoal))
        self.trace.record(member.agent_id, "plan", plan.as_dict())

    def execute(self, member: Member):
        mind = member.mind
        step = member.pending.popleft()
        if isinstance(step, Relocate):
            if not self.relocate(member, step):
                member.pending.clear()
                member.needs_replan = True
                return
        elif isinstance(step, Destroy):
            if not self.destroy(member, step):
                return
        elif isinstance(step, SendMessage):
            self.bus.send(step.message)
            mind.sent_requests.add(step.message.key)
            self.trace.record(member.agent_id, "message", step.message.as_dict())
        mind.current = mind.current.extend(step.effects)
        if isinstance(step, Destroy):
            self.notify_destruction(step.obstacle_id)

    def relocate(self, member: Member, step: Relocate) -> bool:
        mind = member.mind
        grid = self.world.grid()
        cells = step.path.cells
        valid = (
            cells[0] == grid.cell_of(mind.position)
            and all(grid.traversable(cell) for cell in cells)
            and all(los(grid, a, b) for a, b in zip(cells, cells[1:]))
        )
        if not valid:
            logger.info("Agent %s path is no longer valid, re-planning", member.agent_id)
            self.trace.record(member.agent_id, "path-invalid", {"path": step.path.as_dict()})
            return False
        was_inside = mind.arrived()
        origin = mind.position
        mind.position = grid.cell_center(step.path.end)
        self.world.move(member.agent_id, mind.position)
        self.trace.record(member.agent_id, "move", {
            "place": step.place,
            "from": list(origin),
            "to": list(mind.position),
            "waypoints": [list(p) for p in step.path.waypoints(grid)],
        })
        if mind.arrived() and not was_inside:
            self.trace.record(member.agent_id, "arrival", {"position": list(mind.position)})
        return True

    def destroy(self, member: Member, step: Destroy) -> bool:
        if step.obstacle_id in self.world.destroyed_ids():
            logger.debug("Obstacle %s is already gone", step.obstacle_id)
            return True
        try:
            self.world.destroy(member.agent_id, step.obstacle_id)
        except CapabilityDenied as exc:
            logger.warning("%s", exc)
            member.pending.clear()
            member.plans.append(BehaviorPlan((), FAILURE, Reason.CAPABILITY_DENIED, step.obstacle_id))
            self.trace.record(member.agent_id, "plan", member.plans[-1].as_dict())
            return False
        self.trace.record(member.agent_id, "destruction", {"obstacle_id": step.obstacle_id})
        return True

    def notify_destruction(self, obstacle_id: int):
        for member in self.members:
            forgot = forget_obstacle(member.mind, obstacle_id)
            last = member.last_plan
            if not member.pending and (forgot or last is None or last.status != SUCCESS):
                member.needs_replan = True


def run_coalition(scenario, listener=None) -> CoalitionRun:
    """
    Run a validated scenario to global success or failure.

    Raises:
        TickCapExceeded: the run did not settle; the partial run is attached
    """
    world, minds = scenario.build()
    coalition = Coalition(world, minds, tick_cap=scenario.tick_cap, header=scenario.header(),
                          listener=listener)
    return coalition.run()
