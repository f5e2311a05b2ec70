import random

from django.test import SimpleTestCase

from coalition.world import SharedWorld
from geometry.world import AgentBody, Obstacle, Workspace
from pathplanning.paths import GoalArea
from signs.activation import xi_inverse
from signs.exceptions import UnrecognizedObstacle
from signs.knowledge import CausalRelation, KnowledgeBase, Sign, Situation, groups_from_data

from .exceptions import SituationOutsideKnowledge
from .mind import AgentMind
from .procedure import (
    Candidate, CommunicationNeeded, Selection, a_step, forget_obstacle, incorporate_obstacle,
    m_step, p_step, pma
)
from .steps import FAILURE, SUCCESS, WAITING, Destroy, Reason, Relocate, Subgoal

OBSTACLE_1 = ((12.2, 12.2), (12.8, 12.2), (12.8, 19.8), (12.2, 19.8))
GOAL = GoalArea((34.5, 16.5), 2.5)


def rel(owner, conditions, effects, label=None):
    return CausalRelation(groups_from_data(conditions), groups_from_data(effects), owner, label)


def vertex_image(points):
    return groups_from_data([[{"sensor": "vertex", "value": list(p)} for p in points]])


def passage_workspace():
    return Workspace(
        bounds=(0, 40, 0, 30),
        obstacles=[
            Obstacle(1, OBSTACLE_1, "ot_1"),
            Obstacle(2, ((24, 20), (28, 20), (28, 26), (24, 26)), "ot_1"),
            Obstacle(3, ((12.2, 0), (12.8, 0), (12.8, 11.8), (12.2, 11.8)), "wall"),
            Obstacle(4, ((12.2, 20.2), (12.8, 20.2), (12.8, 30), (12.2, 30)), "wall"),
        ],
        agents=[AgentBody(1, (4.5, 16.5), 0.5), AgentBody(2, (20.5, 5.5), 0.5)],
        obstacle_types={"ot_1": {2}, "wall": set()},
    )


def common_signs():
    return [
        Sign("here"),
        Sign("empty"),
        Sign("obstacle 1", image=vertex_image(OBSTACLE_1)),
    ]


def first_agent_kb(knows_helper=True):
    helper = Sign("agent 2", image=groups_from_data([[{"sensor": "agent", "value": 2}]]))
    if knows_helper:
        helper = Sign(
            "agent 2",
            image=groups_from_data([[{"sensor": "agent", "value": 2}]]),
            significance=(rel("agent 2", [["agent 2"]], [["agent 2"], ["destroy 1"]]),),
            personal_meaning=(rel("agent 2", [["I - agent 1"], ["agent 2"]], [["agent 2"]], "I send message"),),
            xi_links={0: [0]},
        )
    return KnowledgeBase(common_signs() + [
        Sign("I - agent 1"),
        Sign("agent 1"),
        helper,
        Sign("place X_1"),
        Sign("place X_4"),
        Sign("place X_5"),
        Sign("destroy 1",
             significance=(rel("destroy 1", [["obstacle 1"]], [["destroy 1"], ["obstacle 1", "empty"]]),)),
        Sign("move 1",
             significance=(rel("move 1", [["I - agent 1"], ["here"]],
                               [["move 1"], ["I - agent 1", "agent 2", "place X_1"]]),),
             personal_meaning=(rel("move 1", [["I - agent 1"]],
                                   [["move 1"], [{"plan": "place X_1"}]], "I move 1"),),
             xi_links={0: [0]}),
    ])


def second_agent_kb():
    return KnowledgeBase(common_signs() + [
        Sign("I - agent 2"),
        Sign("agent 1", image=groups_from_data([[{"sensor": "agent", "value": 1}]])),
        Sign("agent 2"),
        Sign("place Y_1"),
        Sign("place Y_4"),
        Sign("place Y_5"),
        Sign("destroy 1",
             significance=(rel("destroy 1", [["obstacle 1"]], [["destroy 1"], ["obstacle 1", "empty"]]),),
             personal_meaning=(rel("destroy 1", [["I - agent 2"], ["obstacle 1"]],
                                   [["destroy 1"], [{"personal": "destroy", "target": "obstacle 1"}]],
                                   "I destroy 1"),),
             xi_links={0: [0]}),
        Sign("move 2",
             significance=(rel("move 2", [["I - agent 2"], ["here"]],
                               [["move 2"], ["I - agent 2", "agent 1", "place Y_1"]]),),
             personal_meaning=(rel("move 2", [["I - agent 2"]],
                                   [["move 2"], [{"plan": "place Y_1"}]], "I move 2"),),
             xi_links={0: [0]}),
    ])


def first_mind(kb=None, **kwargs):
    return AgentMind(
        agent_id=1,
        kb=kb or first_agent_kb(),
        current=Situation.of([["I - agent 1", "place X_4"], ["agent 2", "place X_5"]]),
        goal=Situation.of([["I - agent 1", "agent 2", "place X_1"]]),
        position=(4.5, 16.5),
        places={"place X_1": GOAL},
        goal_place="place X_1",
        self_sign="I - agent 1",
        public_sign="agent 1",
        **{"alpha_m": 90, "delta": 3, "iteration_cap": 100, **kwargs}
    )


def second_mind(**kwargs):
    return AgentMind(
        agent_id=2,
        kb=second_agent_kb(),
        current=Situation.of([["I - agent 2", "place Y_4"], ["agent 1", "place Y_5"]]),
        goal=Situation.of([["I - agent 2", "agent 1", "place Y_1"]]),
        position=(20.5, 5.5),
        places={"place Y_1": GOAL},
        goal_place="place Y_1",
        self_sign="I - agent 2",
        public_sign="agent 2",
        alpha_m=90,
        delta=3,
        iteration_cap=100,
        **kwargs
    )


def run(mind, world):
    return pma(mind.current, mind.goal, mind, world)


class MStepTests(SimpleTestCase):

    def test_move_selected_for_relocation_goal(self):
        final = Situation.of([["I - agent 1", "agent 2", "place X_1"]])
        self.assertEqual(m_step(final, first_agent_kb()), [Candidate("move 1", 0, 3)])

    def test_empty_kb(self):
        self.assertEqual(m_step(Situation.of([["a"]]), KnowledgeBase([])), [])

    def test_no_coverage(self):
        self.assertEqual(m_step(Situation.of([["place X_4"]]), first_agent_kb()), [])

    def test_tie_ordered_by_name(self):
        kb = KnowledgeBase([
            Sign("goal"),
            Sign("b", significance=(rel("b", [["b"]], [["goal"]]),)),
            Sign("a", significance=(rel("a", [["a"]], [["goal"]]), rel("a", [["a"]], [["a", "goal"]]))),
        ])
        candidates = m_step(Situation.of([["goal"]]), kb)
        self.assertEqual([(c.sign, c.index) for c in candidates], [("a", 0), ("a", 1), ("b", 0)])

    def test_maximality_on_random_kbs(self):
        rng = random.Random(5)
        for _ in range(100):
            kb = random_kb(rng)
            names = list(kb.names)
            final = Situation.of([rng.sample(names, rng.randint(1, min(4, len(names))))])
            candidates = m_step(final, kb)
            coverages = {
                (sign.name, i): len({n for g in r.effect_signs for n in g} & final.signs())
                for sign in kb for i, r in enumerate(sign.significance)
            }
            best = max(coverages.values(), default=0)
            expected = sorted(key for key, value in coverages.items() if value == best) if best else []
            self.assertEqual([(c.sign, c.index) for c in candidates], expected)


class AStepTests(SimpleTestCase):

    def test_move_maps_to_personal_meaning(self):
        mind = first_mind()
        choice = a_step([Candidate("move 1", 0, 3)], mind)
        self.assertIsInstance(choice, Selection)
        self.assertEqual(choice.relation.name, "I move 1")

    def test_destroy_needs_communication(self):
        mind = first_mind()
        choice = a_step([Candidate("destroy 1", 0, 2)], mind)
        self.assertEqual(choice, CommunicationNeeded(Candidate("destroy 1", 0, 2)))

    def test_first_realizable_candidate_wins(self):
        mind = second_mind()
        choice = a_step([Candidate("destroy 1", 0, 1), Candidate("move 2", 0, 1)], mind)
        self.assertEqual(choice.relation.name, "I destroy 1")

    def test_capabilities_follow_personal_meanings(self):
        self.assertEqual(first_mind().capabilities, {"agent 2", "move 1"})
        self.assertEqual(second_mind().capabilities, {"destroy 1", "move 2"})
        self.assertEqual(first_mind(kb=first_agent_kb(knows_helper=False)).capabilities, {"move 1"})


class PStepTests(SimpleTestCase):

    def selection(self, conditions):
        relation = rel("x", conditions, [["x"]])
        return Selection(Candidate("x", 0, 1), 0, relation, relation)

    def test_conditions_become_situation(self):
        self.assertEqual(p_step(self.selection([["I", "here"]]), None).groups, (("I", "here"),))

    def test_empty_conditions(self):
        self.assertEqual(p_step(self.selection([]), None), Situation())

    def test_duplicates_removed(self):
        situation = p_step(self.selection([["here", "here", "I"], ["I", "here"]]), None)
        self.assertEqual(situation.groups, (("here", "I"),))


class IncorporateTests(SimpleTestCase):

    def test_obstacle_joins_situations(self):
        mind = first_mind()
        current, goal = incorporate_obstacle(OBSTACLE_1, mind, 1)
        self.assertIn(("obstacle 1",), current.groups)
        self.assertIn(("obstacle 1", "empty"), goal.groups)
        self.assertEqual(mind.known_obstacles["obstacle 1"][0], 1)

    def test_idempotent(self):
        mind = first_mind()
        once = incorporate_obstacle(OBSTACLE_1, mind, 1)
        twice = incorporate_obstacle(OBSTACLE_1, mind, 1)
        self.assertEqual(once, twice)

    def test_unknown_coordinates(self):
        with self.assertRaises(UnrecognizedObstacle):
            incorporate_obstacle(((0, 0), (1, 0), (1, 1)), first_mind())

    def test_forget_reverses(self):
        mind = first_mind()
        before = (mind.current, mind.goal)
        incorporate_obstacle(OBSTACLE_1, mind, 1)
        mind.sent_requests.add((2, "destroy 1", 1))
        self.assertTrue(forget_obstacle(mind, 1))
        self.assertEqual((mind.current, mind.goal), before)
        self.assertEqual(mind.sent_requests, set())
        self.assertFalse(forget_obstacle(mind, 1))


class PmaTests(SimpleTestCase):

    def setUp(self):
        self.world = SharedWorld(passage_workspace(), 1.0)

    def test_goal_already_satisfied(self):
        mind = first_mind()
        plan = pma(mind.current, Situation.of([["I - agent 1"]]), mind, self.world)
        self.assertEqual((plan.status, plan.steps, plan.iterations), (SUCCESS, (), 0))

    def test_no_applicable_significance(self):
        mind = first_mind()
        plan = pma(mind.current, Situation.of([["place X_5", "agent 1"]]), mind, self.world)
        self.assertEqual((plan.status, plan.reason), (FAILURE, Reason.NO_APPLICABLE_SIGNIFICANCE))

    def test_unknown_sign_rejected(self):
        mind = first_mind()
        with self.assertRaises(SituationOutsideKnowledge):
            pma(mind.current, Situation.of([["place Z"]]), mind, self.world)

    def test_blocked_agent_delegates_destruction(self):
        mind = first_mind()
        plan = run(mind, self.world)
        self.assertEqual((plan.status, plan.reason, plan.obstacle_id), (WAITING, Reason.DELEGATED, 1))
        (message,) = plan.messages_sent
        self.assertEqual((message.sender_id, message.recipient_id), (1, 2))
        self.assertEqual(message.required_action, "destroy 1")
        self.assertEqual(message.obstacle_id, 1)
        self.assertEqual(message.via, "I send message")
        self.assertEqual(message.sender_goal_facts, (("agent 1", "place X_1"),))
        self.assertEqual(message.significance_payload["effects"], [["destroy 1"], ["obstacle 1", "empty"]])
        helper = mind.kb["agent 2"]
        self.assertEqual(message.significance_payload["delegated"], [r.describe() for r in xi_inverse(helper, 0)])
        self.assertEqual(message.significance_payload["delegated"][0]["effects"], [["agent 2"], ["destroy 1"]])
        self.assertIn(("obstacle 1",), mind.current.groups)
        self.assertIn(("obstacle 1", "empty"), mind.goal.groups)

    def test_request_not_repeated(self):
        mind = first_mind()
        first = run(mind, self.world)
        mind.sent_requests.add(first.messages_sent[0].key)
        again = run(mind, self.world)
        self.assertEqual((again.status, again.steps), (WAITING, ()))

    def test_no_capable_member(self):
        plan = run(first_mind(kb=first_agent_kb(knows_helper=False)), self.world)
        self.assertEqual((plan.status, plan.reason, plan.obstacle_id), (FAILURE, Reason.BLOCKED, 1))

    def test_helper_approaches_destroys_and_relocates(self):
        mind = second_mind()
        incorporate_obstacle(OBSTACLE_1, mind, 1)
        plan = run(mind, self.world)
        self.assertEqual(plan.status, SUCCESS)
        self.assertEqual([type(s) for s in plan.steps], [Relocate, Destroy, Relocate])
        approach, destroy, relocation = plan.steps
        self.assertEqual(destroy.obstacle_id, 1)
        self.assertEqual(destroy.effects, (("destroy 1",), ("obstacle 1", "empty")))
        self.assertEqual(approach.path.cells[0], (20, 5))
        self.assertEqual(relocation.place, "place Y_1")
        self.assertEqual(relocation.path.cells[0], approach.path.end)
        grid = self.world.grid()
        self.assertTrue(GOAL.contains(grid.cell_center(relocation.path.end)))
        # planning assumed the obstacle away without touching the world
        self.assertFalse(self.world.workspace.obstacle(1).destroyed)

    def test_relocates_once_obstacle_is_gone(self):
        mind = first_mind()
        run(mind, self.world)
        self.world.destroy(2, 1)
        forget_obstacle(mind, 1)
        plan = run(mind, self.world)
        self.assertEqual(plan.status, SUCCESS)
        (step,) = plan.steps
        self.assertIsInstance(step, Relocate)
        self.assertEqual(step.place, "place X_1")
        self.assertLessEqual(step.path.max_turn, 90 + 1e-9)
        self.assertTrue(GOAL.contains(self.world.grid().cell_center(step.path.end)))

    def test_introspection_disabled(self):
        mind = first_mind(introspection=False)
        plan = run(mind, self.world)
        self.assertEqual((plan.status, plan.reason), (FAILURE, Reason.INTROSPECTION_DISABLED))
        self.assertEqual(plan.steps, (Subgoal(Situation.of([["I - agent 1"]])),))

    def test_iteration_cap(self):
        plan = run(first_mind(iteration_cap=0), self.world)
        self.assertEqual((plan.status, plan.reason), (FAILURE, Reason.ITERATION_CAP_EXCEEDED))

    def test_deterministic(self):
        plans = [run(second_mind(), SharedWorld(passage_workspace(), 1.0)).as_dict() for _ in range(2)]
        self.assertEqual(plans[0], plans[1])

    def test_events_recorded(self):
        events = []
        mind = first_mind(recorder=lambda kind, payload: events.append(kind))
        run(mind, self.world)
        for kind in ("pma-iteration", "m-step", "a-step", "p-step", "s-step", "path-result", "incorporate"):
            self.assertIn(kind, events)


def random_kb(rng, size=None):
    size = size or rng.randint(2, 20)
    names = [f"s{i}" for i in range(size)]
    signs = []
    for name in names:
        def relation(label=None):
            conditions = [rng.sample(names, rng.randint(1, 2)) for _ in range(rng.randint(0, 2))]
            effects = [rng.sample(names, rng.randint(1, min(3, size))) for _ in range(rng.randint(0, 2))] + [[name]]
            return rel(name, conditions, effects, label)
        significance = tuple(relation() for _ in range(rng.randint(0, 2)))
        personal = tuple(relation(f"I {name} {i}") for i in range(rng.randint(0, 2)))
        links = {
            i: rng.sample(range(len(personal)), rng.randint(0, len(personal)))
            for i in range(len(significance))
        }
        signs.append(Sign(name, significance=significance, personal_meaning=personal, xi_links=links))
    return KnowledgeBase(signs)


class RandomKnowledgeTests(SimpleTestCase):

    def test_termination_and_determinism(self):
        rng = random.Random(11)
        workspace = Workspace(bounds=(0, 10, 0, 10), agents=[AgentBody(1, (1.5, 1.5), 0.5)])
        for _ in range(200):
            kb = random_kb(rng)
            names = list(kb.names)
            start = Situation.of([rng.sample(names, rng.randint(1, min(3, len(names))))])
            goal = Situation.of([rng.sample(names, rng.randint(1, min(3, len(names)))) for _ in range(rng.randint(1, 2))])
            results = []
            for _ in range(2):
                mind = AgentMind(
                    agent_id=1, kb=kb, current=start, goal=goal, position=(1.5, 1.5),
                    places={}, goal_place="", self_sign=names[0], alpha_m=45, delta=3, iteration_cap=100,
                )
                results.append(pma(start, goal, mind, SharedWorld(workspace, 1.0)))
            self.assertEqual(results[0].as_dict(), results[1].as_dict())
            self.assertIn(results[0].status, (SUCCESS, FAILURE, WAITING))
            self.assertLessEqual(results[0].iterations, 101)
