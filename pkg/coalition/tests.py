from dataclasses import replace

from django.test import SimpleTestCase

from geometry.grid import discretize, double_outline
from geometry.world import AgentBody, Obstacle, Workspace
from pathplanning.blocking import reachable_region
from pathplanning.goals import resolve_goal_area
from pathplanning.paths import GoalArea
from pma.mind import AgentMind
from pma.steps import FAILURE, SUCCESS, WAITING, Reason
from pma.tests import GOAL, OBSTACLE_1, first_mind, passage_workspace, second_agent_kb, second_mind
from signs.knowledge import CausalRelation, KnowledgeBase, Sign, Situation, groups_from_data

from .exceptions import CapabilityDenied, TickCapExceeded, UnknownRecipient, UnknownSign
from .messages import Message, MessageBus
from .runtime import Coalition, on_message
from .world import SharedWorld


def destroy_request(**kwargs):
    values = dict(
        sender_id=1,
        recipient_id=2,
        required_action="destroy 1",
        significance_payload={
            "sign": "destroy 1", "label": "destroy 1", "index": 0,
            "conditions": [["obstacle 1"]], "effects": [["destroy 1"], ["obstacle 1", "empty"]],
        },
        obstacle_id=1,
        obstacle_coords=OBSTACLE_1,
        sender_goal_facts=(("agent 1", "place X_1"),),
        via="I send message",
    )
    values.update(kwargs)
    return Message(**values)


def lone_mind(position, goal, kb=None):
    kb = kb or KnowledgeBase([
        Sign("I"),
        Sign("place A"),
        Sign("go", significance=(CausalRelation(groups_from_data([["I"]]),
                                                groups_from_data([["go"], ["I", "place A"]]), "go"),),
             personal_meaning=(CausalRelation(groups_from_data([["I"]]),
                                              groups_from_data([["go"], [{"plan": "place A"}]]), "go", "I go"),),
             xi_links={0: [0]}),
    ])
    return AgentMind(
        agent_id=1, kb=kb, current=Situation.of([["I"]]), goal=Situation.of([["I", "place A"]]),
        position=position, places={"place A": goal}, goal_place="place A", self_sign="I",
        alpha_m=90, delta=3, iteration_cap=100,
    )


class MessageBusTests(SimpleTestCase):

    def test_fifo_delivery(self):
        bus = MessageBus([1, 2])
        first, second = destroy_request(), destroy_request(required_action="move 2")
        bus.send(first)
        bus.send(second)
        self.assertTrue(bus.pending_for(2))
        self.assertFalse(bus.pending_for(1))
        self.assertEqual(bus.collect(2), [first, second])
        self.assertEqual(len(bus), 0)
        self.assertEqual(bus.log, [first, second])

    def test_message_to_self(self):
        bus = MessageBus([1])
        message = destroy_request(recipient_id=1)
        bus.send(message)
        self.assertEqual(bus.collect(1), [message])

    def test_unknown_recipient(self):
        with self.assertRaises(UnknownRecipient):
            MessageBus([1, 2]).send(destroy_request(recipient_id=9))

    def test_payload_has_sign_names_only(self):
        self.assertEqual(destroy_request().payload_signs(), ["destroy 1", "empty", "obstacle 1"])


class OnMessageTests(SimpleTestCase):

    def test_goal_gains_obstacle_group(self):
        mind = second_mind()
        goal = on_message(mind, destroy_request())
        self.assertEqual(goal.groups, (("I - agent 2", "agent 1", "place Y_1"), ("obstacle 1", "empty")))
        self.assertIn(("obstacle 1",), mind.current.groups)
        self.assertEqual(mind.known_obstacles["obstacle 1"][0], 1)

    def test_duplicate_message_idempotent(self):
        mind = second_mind()
        once = on_message(mind, destroy_request())
        self.assertEqual(on_message(mind, destroy_request()), once)
        self.assertEqual(len(mind.received), 2)

    def test_unknown_sign(self):
        with self.assertRaises(UnknownSign):
            on_message(second_mind(), destroy_request(required_action="fly 1"))


class SharedWorldTests(SimpleTestCase):

    def test_capability_matrix(self):
        world = SharedWorld(passage_workspace(), 1.0)
        with self.assertRaises(CapabilityDenied):
            world.destroy(1, 1)
        with self.assertRaises(CapabilityDenied):
            world.destroy(2, 3)

    def test_hypothetical_grid_matches_real_one(self):
        world = SharedWorld(passage_workspace(), 1.0)
        assumed = world.grid(assume_destroyed=[1])
        self.assertNotEqual(assumed, world.grid())
        world.destroy(2, 1)
        self.assertEqual(world.grid(), assumed)
        fresh = passage_workspace()
        fresh.obstacle(1).destroyed = True
        self.assertEqual(world.grid(), double_outline(discretize(fresh, 1.0)))


class CoalitionTests(SimpleTestCase):

    def run_passage(self, **kwargs):
        world = SharedWorld(passage_workspace(), 1.0)
        return Coalition(world, [first_mind(), second_mind()], tick_cap=50, **kwargs).run()

    def test_two_agents_cooperate(self):
        run = self.run_passage()
        self.assertEqual(run.status, SUCCESS)
        self.assertEqual(run.ticks, 6)
        (message,) = run.messages
        self.assertEqual((message.sender_id, message.recipient_id, message.required_action), (1, 2, "destroy 1"))
        self.assertEqual([e.payload["obstacle_id"] for e in run.events("destruction")], [1])
        self.assertEqual(run.events("destruction")[0].agent, 2)
        self.assertEqual(len(run.events("message")), 1)
        for mind in run.minds:
            self.assertTrue(GOAL.contains(mind.position))

    def test_joint_plan(self):
        run = self.run_passage()
        self.assertEqual([p.status for p in run.plans[1]], [WAITING, SUCCESS])
        self.assertEqual([p.status for p in run.plans[2]], [SUCCESS, SUCCESS])
        self.assertEqual([s.kind for s in run.plans[1][0].steps], ["send-message"])
        self.assertEqual([s.kind for s in run.plans[1][1].steps], ["relocate"])
        self.assertEqual([s.kind for s in run.plans[2][1].steps], ["relocate", "destroy", "relocate"])
        self.assertEqual(len(run.joint_plan()["messages"]), 1)

    def test_trace_ordered_and_deterministic(self):
        first, second = self.run_passage(header={"name": "fig1"}), self.run_passage(header={"name": "fig1"})
        self.assertEqual([e.as_dict() for e in first.trace], [e.as_dict() for e in second.trace])
        ticks = [e.tick for e in first.trace]
        self.assertEqual(ticks, sorted(ticks))
        self.assertEqual((first.trace[0].tick, first.trace[0].kind), (0, "scenario"))
        self.assertEqual(first.trace[-1].kind, "outcome")
        kinds = {e.kind for e in first.trace}
        for kind in ("pma-iteration", "m-step", "a-step", "p-step", "s-step", "path-result",
                     "message", "destruction", "arrival"):
            self.assertIn(kind, kinds)

    def test_tick_cap(self):
        with self.assertRaises(TickCapExceeded) as ctx:
            Coalition(SharedWorld(passage_workspace(), 1.0), [first_mind(), second_mind()], tick_cap=2).run()
        self.assertEqual(ctx.exception.cap, 2)
        self.assertEqual(ctx.exception.run.reason, Reason.TICK_CAP_EXCEEDED)
        self.assertEqual(ctx.exception.run.ticks, 2)

    def test_single_agent_empty_map(self):
        area = GoalArea((15.5, 15.5), 1.5)
        world = SharedWorld(Workspace(bounds=(0, 20, 0, 20), agents=[AgentBody(1, (2.5, 2.5), 0.5)]), 1.0)
        run = Coalition(world, [lone_mind((2.5, 2.5), area)], tick_cap=10).run()
        self.assertEqual(run.status, SUCCESS)
        self.assertEqual(len(run.plans[1]), 1)
        self.assertEqual(run.ticks, 2)
        self.assertTrue(area.contains(run.minds[0].position))

    def test_sealed_goal_fails_with_blocking_obstacle(self):
        area = GoalArea((16.5, 16.5), 1.5)
        wall = Obstacle(1, ((12, 12), (20, 12), (20, 13), (13, 13), (13, 20), (12, 20)), "wall")
        workspace = Workspace(bounds=(0, 20, 0, 20), obstacles=[wall], agents=[AgentBody(1, (3.5, 3.5), 0.5)],
                              obstacle_types={"wall": set()})
        world = SharedWorld(workspace, 1.0)
        grid = world.grid()
        reachable = reachable_region(grid, grid.cell_of((3.5, 3.5)))
        self.assertFalse(set(reachable) & resolve_goal_area(grid, area))

        run = Coalition(world, [lone_mind((3.5, 3.5), area)], tick_cap=10).run()
        self.assertEqual((run.status, run.reason, run.obstacle_id), (FAILURE, Reason.BLOCKED, 1))
        self.assertEqual(run.events("outcome")[0].payload["obstacle_id"], 1)

    def test_unreadable_request_is_refused(self):
        kb = KnowledgeBase([sign for sign in second_agent_kb() if sign.name != "destroy 1"])
        helper = replace(second_mind(), kb=kb)
        run = Coalition(SharedWorld(passage_workspace(), 1.0), [first_mind(), helper], tick_cap=50).run()
        self.assertEqual((run.status, run.reason, run.obstacle_id), (FAILURE, Reason.UNKNOWN_SIGN, 1))
        (refusal,) = run.events("refusal")
        self.assertEqual(refusal.agent, 2)
        self.assertEqual(refusal.payload["unknown"], ["destroy 1"])
        self.assertEqual(run.plans[2][-1].reason, Reason.UNKNOWN_SIGN)
        self.assertEqual(run.events("destruction"), [])
        self.assertEqual(run.trace[-1].kind, "outcome")
