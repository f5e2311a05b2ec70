"""
PMA behavior planning.

Each iteration runs an M-step (significances whose effects cover most of
the final situation), an A-step (map the best significance to a personal
meaning) and a P-step (the personal meaning's conditions become the new
final situation). Once the final situation is contained in the current one
the S-step executes the selected personal meanings innermost first, calling
the path planner for every path-planning operator they expand to.
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

from coalition.messages import Message
from geometry.grid import approach_cells
from pathplanning.exceptions import StartBlocked
from pathplanning.planner import AngleInfeasible, Blocked, Success, plan, plan_to_cells
from signs.activation import activate_top_down, effect_coverage, recognize, xi_indexes, xi_inverse
from signs.exceptions import CyclicHierarchy, UnrecognizedObstacle, UnresolvedFeature
from signs.knowledge import (
    EMPTY_SIGN, CausalRelation, KnowledgeBase, PathPlanOperator, PersonalFeature, SensorDatum, Sign,
    Situation
)

from .exceptions import SituationOutsideKnowledge
from .mind import AgentMind
from .steps import (
    FAILURE, SUCCESS, WAITING, BehaviorPlan, Destroy, Reason, Relocate, SendMessage, Subgoal
)

logger = logging.getLogger(__name__)

VERTEX_CHANNEL = "vertex"
AGENT_CHANNEL = "agent"
DESTROY_FEATURE = "destroy"


@dataclass(frozen=True)
class Candidate:
    sign: str
    index: int
    coverage: int

    def as_dict(self):
        return {"sign": self.sign, "index": self.index, "coverage": self.coverage}


@dataclass(frozen=True)
class Selection:
    candidate: Candidate
    pm_index: int
    relation: CausalRelation
    significance: CausalRelation


@dataclass(frozen=True)
class CommunicationNeeded:
    candidate: Candidate


def m_step(final: Situation, kb: KnowledgeBase) -> List[Candidate]:
    """All significances reaching the maximal (non-zero) effect coverage, by (sign, index)"""
    scored = [
        Candidate(sign.name, index, effect_coverage(relation, final))
        for sign in kb
        for index, relation in enumerate(sign.significance)
    ]
    best = max((c.coverage for c in scored), default=0)
    if best == 0:
        return []
    return sorted((c for c in scored if c.coverage == best), key=lambda c: (c.sign, c.index))


def a_step(candidates: Sequence[Candidate], mind: AgentMind) -> Union[Selection, CommunicationNeeded]:
    able = mind.capabilities
    for candidate in candidates:
        if candidate.sign not in able:
            continue
        sign = mind.kb[candidate.sign]
        for pm_index in xi_indexes(sign, candidate.index):
            return Selection(candidate, pm_index, sign.personal_meaning[pm_index],
                             sign.significance[candidate.index])
    return CommunicationNeeded(candidates[0])


def p_step(selection: Selection, mind: AgentMind) -> Situation:
    return Situation.of(selection.relation.condition_signs)


def obstacle_sign(kb: KnowledgeBase, coords) -> str:
    """Name of the sign recognized from an obstacle's vertex coordinates"""
    data = [SensorDatum(VERTEX_CHANNEL, (float(x), float(y))) for x, y in coords]
    try:
        active = recognize(kb, data)
    except UnresolvedFeature:
        raise UnrecognizedObstacle(coords)
    for sign in kb:
        if sign.name in active and any(
            group and all(isinstance(f, SensorDatum) for f in group) for group in sign.image
        ):
            return sign.name
    raise UnrecognizedObstacle(coords)


def obstacle_groups(kb: KnowledgeBase, name: str):
    """Group stating the obstacle is present and group asking for it to be gone"""
    return (name,), ((name, EMPTY_SIGN) if EMPTY_SIGN in kb else (name,))


def incorporate_obstacle(coords, mind: AgentMind, obstacle_id: Optional[int] = None) -> Tuple[Situation, Situation]:
    """
    Record a blocking obstacle: its sign joins the current situation and the
    goal asks for it to be gone ("empty").
    """
    name = obstacle_sign(mind.kb, coords)
    current_group, goal_group = obstacle_groups(mind.kb, name)
    mind.current = mind.current.with_group(current_group)
    mind.goal = mind.goal.with_group(goal_group)
    mind.known_obstacles[name] = (obstacle_id, tuple((float(x), float(y)) for x, y in coords))
    mind.emit("incorporate", {"obstacle_id": obstacle_id, "sign": name})
    logger.debug("Agent %s incorporated obstacle %s as '%s'", mind.agent_id, obstacle_id, name)
    return mind.current, mind.goal


def forget_obstacle(mind: AgentMind, obstacle_id: int) -> bool:
    """Drop every situation group naming a destroyed obstacle's sign"""
    names = [name for name, (known_id, _) in mind.known_obstacles.items() if known_id == obstacle_id]
    for name in names:
        mind.current = mind.current.without_sign(name)
        mind.goal = mind.goal.without_sign(name)
        del mind.known_obstacles[name]
    mind.sent_requests = {key for key in mind.sent_requests if key[2] != obstacle_id}
    if names:
        mind.emit("forget", {"obstacle_id": obstacle_id, "signs": names})
    return bool(names)


def find_capable_member(mind: AgentMind, action: str) -> Optional[Tuple[str, int, int]]:
    """
    An agent sign whose significance says that member performs `action` and
    which this agent knows how to address. Returns (sign, agent id, index of
    the personal meaning that addresses the member).
    """
    for sign in mind.kb:
        if sign.name == mind.self_sign:
            continue
        member = sign.sensor_value(AGENT_CHANNEL)
        if isinstance(member, tuple):
            member = member[0] if member else None
        if member is None or int(member) == mind.agent_id:
            continue
        for index, relation in enumerate(sign.significance):
            if any(action in group for group in relation.effect_signs):
                realizations = xi_indexes(sign, index)
                if realizations:
                    return sign.name, int(member), realizations[0]
    return None


def request_payload(member: Sign, pm_index: int, action: CausalRelation, action_index: int) -> dict:
    """
    Communicable description of a request. The member significances come
    back through the inverse of xi from the personal meaning that addresses
    the member; the action's own significance says what has to change.
    """
    payload = action.describe()
    payload["index"] = action_index
    payload["delegated"] = [relation.describe() for relation in xi_inverse(member, pm_index)]
    return payload


class PlanningSession:
    """One invocation of the PMA procedure for one agent"""

    def __init__(self, start: Situation, goal: Situation, mind: AgentMind, world):
        self.mind = mind
        self.world = world
        self.current = start
        self.goal = goal
        self.cursor = world.grid().cell_of(mind.position)
        self.assumed = set()
        self.steps: List = []
        self.iterations = 0
        self.blocked_by = set()
        self.last_blocked: Optional[Tuple[int, tuple]] = None

    def result(self, status, reason=None, obstacle_id=None) -> BehaviorPlan:
        plan_ = BehaviorPlan(tuple(self.steps), status, reason, obstacle_id, self.iterations)
        log = logger.warning if status == FAILURE else logger.info
        log("Agent %s plan %s%s (%s steps, %s iterations)", self.mind.agent_id, status,
            f" [{reason}]" if reason else "", len(self.steps), self.iterations)
        return plan_

    def run(self) -> BehaviorPlan:
        # newest unmet goal group first, so an incorporated obstacle is handled
        # before the relocation it blocked is retried
        while True:
            residual = self.goal.residual(self.current)
            if not residual:
                return self.result(SUCCESS)
            outcome = self.descend(Situation(residual.groups[-1:]))
            if outcome is not None:
                return outcome

    def descend(self, final: Situation) -> Optional[BehaviorPlan]:
        mind = self.mind
        chain: List[Selection] = []
        subgoals: List[Situation] = []
        visited = set()
        while True:
            self.iterations += 1
            if self.iterations > mind.iteration_cap:
                return self.result(FAILURE, Reason.ITERATION_CAP_EXCEEDED)
            key = final.canonical()
            if key in visited:
                return self.result(FAILURE, Reason.CYCLE_DETECTED)
            visited.add(key)
            mind.emit("pma-iteration", {"iteration": self.iterations, "final": final.as_list()})

            candidates = m_step(final, mind.kb)
            mind.emit("m-step", {"candidates": [c.as_dict() for c in candidates]})
            if not candidates:
                return self.result(FAILURE, Reason.NO_APPLICABLE_SIGNIFICANCE)

            choice = a_step(candidates, mind)
            if isinstance(choice, CommunicationNeeded):
                mind.emit("a-step", {"communication": choice.candidate.as_dict()})
                return self.communicate(choice.candidate)
            mind.emit("a-step", {"sign": choice.candidate.sign, "personal_meaning": choice.relation.name})
            chain.append(choice)

            final = p_step(choice, mind)
            subgoals.append(final)
            mind.emit("p-step", {"final": final.as_list()})
            if final.issubset(self.current):
                if not mind.introspection:
                    self.steps.extend(Subgoal(s) for s in reversed(subgoals))
                    return self.result(FAILURE, Reason.INTROSPECTION_DISABLED)
                return self.s_step(chain)

    def s_step(self, chain: List[Selection]) -> Optional[BehaviorPlan]:
        mind = self.mind
        for selection in reversed(chain):
            sign = mind.kb[selection.candidate.sign]
            try:
                activation = activate_top_down(mind.kb, sign, selection.pm_index)
            except CyclicHierarchy as exc:
                logger.warning("Agent %s: %s", mind.agent_id, exc)
                return self.result(FAILURE, Reason.CYCLE_DETECTED)
            mind.emit("s-step", {
                "trace": list(activation.trace),
                "operators": [op.as_data() for op in activation.operators],
            })

            saved = (self.cursor, set(self.assumed))
            produced: List = []
            for op in activation.operators:
                if isinstance(op, PathPlanOperator):
                    outcome = self.relocate_to(op.place)
                elif isinstance(op, PersonalFeature) and op.id == DESTROY_FEATURE and op.target:
                    outcome = self.destroy(op.target)
                else:
                    logger.debug("Agent %s: no action for %s", mind.agent_id, op)
                    continue
                if isinstance(outcome, BehaviorPlan):
                    return outcome
                if isinstance(outcome, Blocked):
                    self.cursor, self.assumed = saved
                    return self.absorb_blocked(outcome)
                produced.extend(outcome)

            effects = tuple(g for g in selection.significance.effect_signs if g)
            self.current = self.current.extend(effects)
            if produced:
                produced[-1] = replace(produced[-1], effects=effects)
            self.steps.extend(produced)
        return None

    def absorb_blocked(self, blocked: Blocked) -> Optional[BehaviorPlan]:
        if blocked.obstacle_id in self.blocked_by:
            return self.result(FAILURE, Reason.BLOCKED, blocked.obstacle_id)
        self.blocked_by.add(blocked.obstacle_id)
        self.last_blocked = (blocked.obstacle_id, blocked.obstacle_coords)
        try:
            name = obstacle_sign(self.mind.kb, blocked.obstacle_coords)
        except UnrecognizedObstacle as exc:
            logger.warning("Agent %s: %s", self.mind.agent_id, exc)
            return self.result(FAILURE, Reason.BLOCKED, blocked.obstacle_id)
        incorporate_obstacle(blocked.obstacle_coords, self.mind, blocked.obstacle_id)
        current_group, goal_group = obstacle_groups(self.mind.kb, name)
        self.current = self.current.with_group(current_group)
        self.goal = self.goal.with_group(goal_group)
        return None

    def search(self, goal_cells=None, area=None):
        """Plan from the cursor with the mind's angle limits, retrying once at the fallback angle"""
        mind = self.mind
        grid = self.world.grid(self.assumed)
        workspace = self.world.workspace

        def attempt(alpha):
            if area is not None:
                return plan(grid, workspace, self.cursor, area, alpha, mind.delta)
            return plan_to_cells(grid, workspace, self.cursor, goal_cells, alpha, mind.delta)

        result = attempt(mind.alpha_m)
        if isinstance(result, AngleInfeasible) and mind.alpha_fallback and mind.alpha_fallback > mind.alpha_m:
            logger.info("Agent %s retrying at fallback angle %s", mind.agent_id, mind.alpha_fallback)
            result = attempt(mind.alpha_fallback)
        return result

    def follow(self, result, place=None):
        """Steps for a path result, a Blocked result, or a failed plan"""
        self.mind.emit("path-result", {"place": place, "from": list(self.cursor), "result": result.as_dict()})
        if isinstance(result, Success):
            self.cursor = result.path.end
            return [Relocate(result.path, place)] if len(result.path.cells) > 1 else []
        if isinstance(result, Blocked):
            return result
        if isinstance(result, AngleInfeasible):
            return self.result(FAILURE, Reason.ANGLE_INFEASIBLE)
        return self.result(FAILURE, Reason.GOAL_AREA_INVALID)

    def relocate_to(self, place: str):
        area = self.mind.places.get(place)
        if area is None:
            logger.warning("Agent %s has no binding for place '%s'", self.mind.agent_id, place)
            return self.result(FAILURE, Reason.GOAL_AREA_INVALID)
        try:
            return self.follow(self.search(area=area), place)
        except StartBlocked:
            return self.result(FAILURE, Reason.START_BLOCKED)

    def target_obstacle(self, sign_name: str) -> Optional[int]:
        known = self.mind.known_obstacles.get(sign_name)
        if known is not None and known[0] is not None:
            return known[0]
        sign = self.mind.kb.get(sign_name)
        coords = [d.value for d in sign.sensor_data() if d.channel == VERTEX_CHANNEL] if sign else []
        found = self.world.workspace.find_obstacle(coords) if coords else None
        return found.id if found is not None else None

    def destroy(self, sign_name: str):
        obstacle_id = self.target_obstacle(sign_name)
        if obstacle_id is None or obstacle_id in self.assumed \
                or obstacle_id in self.world.destroyed_ids():
            logger.debug("Agent %s: '%s' is already gone", self.mind.agent_id, sign_name)
            return []
        cells = approach_cells(self.world.grid(self.assumed), obstacle_id)
        try:
            outcome = self.follow(self.search(goal_cells=cells))
        except StartBlocked:
            return self.result(FAILURE, Reason.START_BLOCKED)
        if isinstance(outcome, (BehaviorPlan, Blocked)):
            return outcome
        self.assumed.add(obstacle_id)
        return outcome + [Destroy(obstacle_id)]

    def obstacle_for(self, relation: CausalRelation) -> Optional[Tuple[int, tuple]]:
        for name in sorted(relation.links()):
            known = self.mind.known_obstacles.get(name)
            if known is not None:
                return known
        return self.last_blocked

    def public_goal_facts(self, recipient_sign: str) -> Tuple[Tuple[str, ...], ...]:
        mind = self.mind
        facts = []
        for group in mind.goal.groups:
            if mind.self_sign not in group:
                continue
            renamed = tuple(
                (mind.public_sign or name) if name == mind.self_sign else name
                for name in group
                if name != recipient_sign
            )
            facts.append(renamed)
        return tuple(facts)

    def communicate(self, candidate: Candidate) -> BehaviorPlan:
        mind = self.mind
        relation = mind.kb[candidate.sign].significance[candidate.index]
        obstacle = self.obstacle_for(relation)
        obstacle_id, coords = obstacle if obstacle is not None else (None, None)

        member = find_capable_member(mind, candidate.sign)
        if member is None:
            logger.warning("Agent %s: nobody known can perform '%s'", mind.agent_id, candidate.sign)
            return self.result(FAILURE, Reason.BLOCKED, obstacle_id)
        recipient_sign, recipient_id, pm_index = member
        helper = mind.kb[recipient_sign]

        message = Message(
            sender_id=mind.agent_id,
            recipient_id=recipient_id,
            required_action=candidate.sign,
            significance_payload=request_payload(helper, pm_index, relation, candidate.index),
            obstacle_id=obstacle_id,
            obstacle_coords=coords,
            sender_goal_facts=self.public_goal_facts(recipient_sign),
            via=helper.personal_meaning[pm_index].name,
        )
        if message.key not in mind.sent_requests:
            self.steps.append(SendMessage(message))
        return self.result(WAITING, Reason.DELEGATED, obstacle_id)


def pma(start: Situation, goal: Situation, mind: AgentMind, world) -> BehaviorPlan:
    """
    Plan behavior from start to goal.

    Args:
        start: observed situation
        goal: desired situation
        mind: the planning agent; blocking obstacles are recorded into its situations
        world: shared world handle offering workspace, grid() and destroyed_ids()

    Returns:
        BehaviorPlan with status success, waiting (a request went out) or
        failure with a reason.

    Raises:
        SituationOutsideKnowledge: start or goal names a sign missing from the mind's KB
    """
    unknown = sorted(set(start.unknown_signs(mind.kb)) | set(goal.unknown_signs(mind.kb)))
    if unknown:
        raise SituationOutsideKnowledge(mind.agent_id, unknown)
    return PlanningSession(start, goal, mind, world).run()
