import random

from django.test import SimpleTestCase

from .activation import activate_top_down, effect_coverage, recognize, xi, xi_inverse
from .exceptions import CyclicHierarchy, IndexOutOfRange, KnowledgeBaseInvalid, UnresolvedFeature
from .knowledge import (
    CausalRelation, KnowledgeBase, PathPlanOperator, PersonalFeature, SensorDatum, Sign, SignLink,
    Situation, feature_from_data, groups_from_data
)

OBSTACLE_1 = [(12.2, 12.2), (12.8, 12.2), (12.8, 19.8), (12.2, 19.8)]


def rel(owner, conditions, effects, label=None):
    return CausalRelation(groups_from_data(conditions), groups_from_data(effects), owner, label)


def vertices(points):
    return [{"sensor": "vertex", "value": list(p)} for p in points]


def agent_kb(can_destroy):
    destroy_pm = ()
    xi_links = {}
    if can_destroy:
        destroy_pm = (rel("destroy 1", [["obstacle 1"]],
                          [["destroy 1"], ["obstacle 1", "empty"],
                           [{"personal": "destroy", "target": "obstacle 1"}]], "I destroy 1"),)
        xi_links = {0: [0]}
    return KnowledgeBase([
        Sign("I"),
        Sign("here"),
        Sign("empty"),
        Sign("place X_1"),
        Sign("obstacle 1", image=groups_from_data([vertices(OBSTACLE_1)])),
        Sign("destroy 1",
             significance=(rel("destroy 1", [["obstacle 1"]], [["destroy 1"], ["obstacle 1", "empty"]]),),
             personal_meaning=destroy_pm,
             xi_links=xi_links),
        Sign("I move 3",
             personal_meaning=(rel("I move 3", [["I move 3"]], [[{"plan": "place X_1"}]], "I move 3"),)),
        Sign("move 1",
             significance=(rel("move 1", [["here"], ["empty"]],
                               [["I move 3", "I move 3", "place X_1"], ["move 1"]]),),
             personal_meaning=(rel("move 1", [["I"]],
                                   [["move 1", "place X_1"], [{"personal": "I move 3"}]], "I move 1"),),
             xi_links={0: [0]}),
    ])


class KnowledgeBaseTests(SimpleTestCase):

    def test_feature_parsing(self):
        self.assertEqual(feature_from_data("here"), SignLink("here"))
        self.assertEqual(feature_from_data({"sensor": "agent", "value": 2}), SensorDatum("agent", 2))
        self.assertEqual(feature_from_data({"personal": "destroy", "target": "obstacle 1"}),
                         PersonalFeature("destroy", "obstacle 1"))
        self.assertEqual(feature_from_data({"plan": "place X_1"}), PathPlanOperator("place X_1"))

    def test_duplicate_features_kept(self):
        relation = agent_kb(False)["move 1"].significance[0]
        self.assertEqual(relation.effect_signs[0], ("I move 3", "I move 3", "place X_1"))

    def test_missing_self_link(self):
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("a"), Sign("b", significance=(rel("b", [["a"]], [["a"]]),))])

    def test_unknown_link(self):
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("b", significance=(rel("b", [["b"]], [["ghost"]]),))])

    def test_duplicate_sign(self):
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("a"), Sign("a")])

    def test_operator_only_in_personal_meaning(self):
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("p"), Sign("b", significance=(rel("b", [["b"]], [[{"plan": "p"}]]),))])

    def test_operator_only_at_lowest_level(self):
        lower = Sign("low", personal_meaning=(rel("low", [["low"]], [[{"plan": "p"}]]),))
        for effects in ([["low"], [{"plan": "p"}]], [[{"personal": "low"}, {"plan": "p"}]]):
            with self.subTest(effects=effects), self.assertRaises(KnowledgeBaseInvalid):
                KnowledgeBase([Sign("p"), lower, Sign("b", personal_meaning=(rel("b", [["b"]], effects),))])
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("p"), Sign("b", personal_meaning=(rel("b", [["b"], [{"plan": "p"}]], [["b"]]),))])

    def test_operator_next_to_plain_links(self):
        kb = KnowledgeBase([Sign("p"), Sign("b", personal_meaning=(rel("b", [["b"]], [["b", "p"], [{"plan": "p"}]]),))])
        self.assertEqual(len(kb), 2)

    def test_xi_link_out_of_range(self):
        with self.assertRaises(KnowledgeBaseInvalid):
            KnowledgeBase([Sign("b", significance=(rel("b", [["b"]], [["b"]]),), xi_links={0: [3]})])


class SituationTests(SimpleTestCase):

    def test_dedupe(self):
        situation = Situation.of([["a", "a", "b"], ["b", "a"], []])
        self.assertEqual(situation.groups, (("a", "b"),))

    def test_subset_ignores_grouping(self):
        start = Situation.of([["I", "place X_4"], ["agent 2", "place X_5"]])
        self.assertTrue(Situation.of([["I", "agent 2"]]).issubset(start))
        self.assertFalse(Situation.of([["place X_1"]]).issubset(start))

    def test_residual_and_removal(self):
        goal = Situation.of([["I", "place X_1"], ["obstacle 1", "empty"]])
        current = Situation.of([["I", "place X_4"], ["obstacle 1"]])
        self.assertEqual(goal.residual(current), goal)
        self.assertEqual(goal.residual(current.with_group(["empty"])).groups, (("I", "place X_1"),))
        self.assertEqual(goal.without_sign("obstacle 1").groups, (("I", "place X_1"),))

    def test_with_group_idempotent(self):
        situation = Situation.of([["obstacle 1", "empty"]])
        self.assertEqual(situation.with_group(["empty", "obstacle 1"]), situation)


class RecognizeTests(SimpleTestCase):

    def test_empty_input(self):
        self.assertEqual(recognize(agent_kb(False), []), frozenset())

    def test_obstacle_from_coordinates(self):
        data = [SensorDatum("vertex", p) for p in OBSTACLE_1]
        self.assertEqual(recognize(agent_kb(False), data), {"obstacle 1"})

    def test_partial_image_does_not_activate(self):
        data = [SensorDatum("vertex", p) for p in OBSTACLE_1[:3]]
        self.assertEqual(recognize(agent_kb(False), data), frozenset())

    def test_unknown_channel(self):
        with self.assertRaises(UnresolvedFeature):
            recognize(agent_kb(False), [SensorDatum("sonar", 1)])

    def test_three_levels(self):
        kb = KnowledgeBase([
            Sign("edge", image=groups_from_data([[{"sensor": "pixel", "value": 1}]])),
            Sign("corner", image=groups_from_data([["edge", {"sensor": "pixel", "value": 2}]])),
            Sign("box", image=groups_from_data([["corner"], ["edge", "corner"]])),
        ])
        active = recognize(kb, [SensorDatum("pixel", 1), SensorDatum("pixel", 2)])
        self.assertEqual(active, {"edge", "corner", "box"})

    def test_monotone(self):
        rng = random.Random(4)
        for _ in range(100):
            names = [f"s{k}" for k in range(8)]
            signs = []
            for k, name in enumerate(names):
                group = [{"sensor": "c", "value": rng.randrange(5)}]
                group += [rng.choice(names[:k])] if k and rng.random() < 0.6 else []
                signs.append(Sign(name, image=groups_from_data([group])))
            kb = KnowledgeBase(signs)
            small = {SensorDatum("c", v) for v in rng.sample(range(5), 2)}
            large = small | {SensorDatum("c", rng.randrange(5))}
            self.assertLessEqual(recognize(kb, small), recognize(kb, large))


class XiTests(SimpleTestCase):

    def test_agent_without_realization(self):
        self.assertEqual(xi(agent_kb(False)["destroy 1"], 0), [])

    def test_agent_with_realization(self):
        [relation] = xi(agent_kb(True)["destroy 1"], 0)
        self.assertEqual(relation.name, "I destroy 1")

    def test_inverse(self):
        sign = agent_kb(True)["destroy 1"]
        self.assertEqual(xi_inverse(sign, 0), [sign.significance[0]])

    def test_unmapped_inverse(self):
        sign = Sign("b", significance=(rel("b", [["b"]], [["b"]]),),
                    personal_meaning=(rel("b", [["b"]], [["b"]]),))
        self.assertEqual(xi_inverse(sign, 0), [])

    def test_round_trip(self):
        for sign in agent_kb(True):
            for index, pm_indexes in sign.xi_links.items():
                for pm_index in pm_indexes:
                    self.assertIn(sign.significance[index], xi_inverse(sign, pm_index))

    def test_out_of_range(self):
        with self.assertRaises(IndexOutOfRange):
            xi(agent_kb(True)["destroy 1"], 1)
        with self.assertRaises(IndexOutOfRange):
            xi_inverse(agent_kb(True)["destroy 1"], 4)


class CoverageTests(SimpleTestCase):

    def test_move_against_goal(self):
        goal = Situation.of([["I - agent 1", "agent 2", "place X_1"]])
        self.assertEqual(effect_coverage(agent_kb(False)["move 1"].significance[0], goal), 1)

    def test_disjoint(self):
        goal = Situation.of([["agent 2"]])
        self.assertEqual(effect_coverage(agent_kb(False)["destroy 1"].significance[0], goal), 0)

    def test_superset(self):
        goal = Situation.of([["obstacle 1"], ["empty"]])
        self.assertEqual(effect_coverage(agent_kb(False)["destroy 1"].significance[0], goal), 2)


class TopDownTests(SimpleTestCase):

    def test_move_chain(self):
        kb = agent_kb(False)
        activation = activate_top_down(kb, kb["move 1"], 0)
        self.assertEqual(activation.trace, ("I move 1", "I move 3", "plan place X_1"))
        self.assertEqual(activation.operators, (PathPlanOperator("place X_1"),))

    def test_single_operator(self):
        kb = agent_kb(False)
        activation = activate_top_down(kb, kb["I move 3"], 0)
        self.assertEqual(activation.operators, (PathPlanOperator("place X_1"),))

    def test_destroy_operator(self):
        kb = agent_kb(True)
        activation = activate_top_down(kb, kb["destroy 1"], 0)
        self.assertEqual(activation.operators, (PersonalFeature("destroy", "obstacle 1"),))

    def test_cycle(self):
        kb = KnowledgeBase([
            Sign("a", personal_meaning=(rel("a", [["a"]], [[{"personal": "b"}]]),)),
            Sign("b", personal_meaning=(rel("b", [["b"]], [["a"]]),)),
        ])
        with self.assertRaises(CyclicHierarchy):
            activate_top_down(kb, kb["a"], 0)

    def test_repeated_sibling_is_not_a_cycle(self):
        kb = KnowledgeBase([
            Sign("p"),
            Sign("leaf", personal_meaning=(rel("leaf", [["leaf"]], [[{"plan": "p"}]]),)),
            Sign("top", personal_meaning=(rel("top", [["top"]], [["leaf", "leaf"]]),)),
        ])
        self.assertEqual(len(activate_top_down(kb, kb["top"], 0).operators), 2)
