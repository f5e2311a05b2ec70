import io
import json
import math
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

import yaml
from django.conf import settings
from django.test import SimpleTestCase, override_settings
from rest_framework import status
from rest_framework.test import APIClient

from coalition.runtime import run_coalition
from geometry.grid import discretize, double_outline
from pma.steps import FAILURE, SUCCESS, Reason
from signs.activation import activate_top_down

from .cli import EXIT_FAILURE, EXIT_INPUT_ERROR, EXIT_OK, cli_main
from .exceptions import COMMON_SIGN_MISMATCH, GEOMETRY_ERROR, INVALID_VALUE, SYNTAX_ERROR, UNRESOLVED_REFERENCE
from .exceptions import ScenarioError, TraceFormatError
from .loader import dump_scenario, load_scenario, parse_scenario
from .rendering import Snapshot, render_svg, render_trace, snapshot_from_trace
from .trace import dumps_trace, loads_trace, read_trace

FIXTURES = Path(__file__).resolve().parent / "fixtures"
SHIPPED = ("fig1.scn", "sealed.scn", "minimal.scn", "outline_demo.scn")
SVG = "{http://www.w3.org/2000/svg}"


def fixture_text(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


def line_of(text, fragment, occurrence=1):
    seen = 0
    for number, line in enumerate(text.splitlines(), start=1):
        if fragment in line:
            seen += 1
            if seen == occurrence:
                return number
    raise AssertionError(f"{fragment!r} not in text")


def rejected(text):
    try:
        parse_scenario(text)
    except ScenarioError as exc:
        return exc
    raise AssertionError("scenario was accepted")


def svg_elements(svg, tag):
    return ET.fromstring(svg.encode("utf-8")).iter(SVG + tag)


class ParseScenarioTests(SimpleTestCase):

    def test_shipped_scenarios_parse(self):
        for name in SHIPPED:
            with self.subTest(name=name):
                scenario = load_scenario(FIXTURES / name)
                self.assertEqual(scenario.name, name[:-4])

    def test_passage_capabilities(self):
        scenario = load_scenario(FIXTURES / "fig1.scn")
        workspace = scenario.build_workspace()
        self.assertTrue(workspace.can_destroy(2, 1))
        self.assertTrue(workspace.can_destroy(2, 2))
        self.assertFalse(workspace.can_destroy(1, 1))
        self.assertFalse(workspace.can_destroy(2, 3))

        first, second = scenario.build_minds()
        self.assertEqual(first.kb["destroy 1"].personal_meaning, ())
        self.assertEqual(len(second.kb["destroy 1"].personal_meaning), 1)
        self.assertEqual(first.kb["destroy 1"].significance, second.kb["destroy 1"].significance)

    def test_defaults_from_settings(self):
        scenario = load_scenario(FIXTURES / "minimal.scn")
        mind = scenario.build_minds()[0]
        self.assertEqual(mind.alpha_m, settings.RELOCATION["ALPHA_M"])
        self.assertEqual(mind.delta, settings.RELOCATION["LIAN_DELTA"])
        self.assertEqual(scenario.tick_cap, settings.RELOCATION["TICK_CAP"])
        self.assertTrue(mind.introspection)

    def test_common_sign_mismatch(self):
        data = yaml.safe_load(fixture_text("fig1.scn"))
        data["agents"][1]["kb"].append({
            "name": "move 1",
            "significance": [{"conditions": [["I - agent 2"]], "effects": [["move 1"]]}],
        })
        error = rejected(yaml.safe_dump(data, sort_keys=False))
        self.assertIn(COMMON_SIGN_MISMATCH, error.codes)

    def test_common_sign_redeclared_identically(self):
        data = yaml.safe_load(fixture_text("fig1.scn"))
        data["agents"][0]["kb"].append(dict(data["common_signs"][3]))
        parse_scenario(yaml.safe_dump(data, sort_keys=False))

    def test_syntax_error_has_position(self):
        error = rejected("name: broken\nworld: [0, 1\nagents: []\n")
        self.assertEqual(error.codes, [SYNTAX_ERROR])
        self.assertGreaterEqual(error.diagnostics[0].line, 2)

    def test_not_a_mapping(self):
        self.assertEqual(rejected("- 1\n- 2\n").codes, [SYNTAX_ERROR])

    def test_unknown_sign_points_at_goal(self):
        text = fixture_text("fig1.scn").replace(
            "goal: [[I - agent 2, agent 1, place Y_1]]", "goal: [[I - agent 2, agent 9, place Y_1]]"
        )
        error = rejected(text)
        self.assertEqual(error.codes, [UNRESOLVED_REFERENCE])
        diagnostic = error.diagnostics[0]
        self.assertEqual((diagnostic.line, diagnostic.column), (line_of(text, "goal: [[I - agent 2"), 5))
        self.assertIn("agent 9", diagnostic.message)

    def test_invalid_value_points_at_field(self):
        text = fixture_text("fig1.scn").replace("alpha_m: 90", "alpha_m: 0", 1)
        error = rejected(text)
        self.assertEqual(error.codes, [INVALID_VALUE])
        self.assertEqual(error.diagnostics[0][:2], (line_of(text, "alpha_m: 0"), 5))

    def test_self_intersecting_polygon(self):
        text = fixture_text("fig1.scn").replace(
            "[[24, 20], [28, 20], [28, 26], [24, 26]]", "[[24, 20], [28, 26], [28, 20], [24, 26]]"
        )
        error = rejected(text)
        self.assertEqual(error.codes, [GEOMETRY_ERROR])
        self.assertEqual(error.diagnostics[0].line, line_of(text, "id: 2, type: ot_1"))

    def test_capability_names_unknown_agent(self):
        text = fixture_text("fig1.scn").replace("ot_1: {destroyable_by: [2]}", "ot_1: {destroyable_by: [7]}")
        self.assertEqual(rejected(text).codes, [UNRESOLVED_REFERENCE])

    def test_unbound_plan_place(self):
        text = fixture_text("minimal.scn").replace("{plan: place A}", "{plan: place B}")
        self.assertEqual(rejected(text).codes, [UNRESOLVED_REFERENCE])

    def test_operator_above_lowest_level(self):
        data = yaml.safe_load(fixture_text("minimal.scn"))
        kb = data["agents"][0]["kb"]
        kb.append({"name": "step", "personal_meaning": [{"conditions": [["step"]], "effects": [[{"plan": "place A"}]]}]})
        kb[2]["personal_meaning"][0]["effects"] = [["go", "step"], [{"plan": "place A"}]]
        error = rejected(yaml.safe_dump(data, sort_keys=False))
        self.assertEqual(error.codes, [INVALID_VALUE])
        self.assertIn("expands further", error.diagnostics[0].message)

    def test_resolution_finer_than_agent(self):
        text = fixture_text("minimal.scn").replace("position: [2.5, 2.5]", "position: [2.5, 2.5]\n    radius: 0.8")
        self.assertEqual(rejected(text).codes, [GEOMETRY_ERROR])

    def test_several_problems_reported_together(self):
        text = fixture_text("fig1.scn").replace("goal_place: place X_1", "goal_place: place X_9")
        text = text.replace("ot_1: {destroyable_by: [2]}", "ot_1: {destroyable_by: [7]}")
        error = rejected(text)
        self.assertEqual(error.codes, [UNRESOLVED_REFERENCE, UNRESOLVED_REFERENCE])
        self.assertEqual(error.diagnostics, sorted(error.diagnostics))

    def test_dump_round_trip(self):
        for name in SHIPPED:
            with self.subTest(name=name):
                scenario = load_scenario(FIXTURES / name)
                self.assertEqual(parse_scenario(dump_scenario(scenario)), scenario)


class RunScenarioTests(SimpleTestCase):

    def test_passage_needs_one_request(self):
        run = run_coalition(load_scenario(FIXTURES / "fig1.scn"))
        self.assertEqual(run.status, SUCCESS)
        self.assertEqual(run.ticks, 6)
        self.assertEqual(len(run.events("message")), 1)
        self.assertEqual([e.agent for e in run.events("destruction")], [2])
        self.assertEqual(run.events("message")[0].payload["required_action"], "destroy 1")
        significance = run.events("message")[0].payload["significance"]
        self.assertEqual(significance["effects"], [["destroy 1"], ["obstacle 1", "empty"]])
        self.assertEqual(significance["delegated"][0]["effects"], [["agent 2"], ["destroy 1"]])

    def test_relocation_runs_through_move_chain(self):
        scenario = load_scenario(FIXTURES / "fig1.scn")
        first = scenario.build_minds()[0]
        self.assertLessEqual({f"place X_{i}" for i in range(1, 7)}, set(first.kb.names))
        expected = ("I move 1", "I move 3", "plan place X_1")
        self.assertEqual(activate_top_down(first.kb, first.kb["move 1"], 0).trace, expected)

        run = run_coalition(scenario)
        steps = [e.payload["trace"] for e in run.events("s-step") if e.agent == 1]
        self.assertEqual(steps[0], list(expected))

    def test_sealed_fails_naming_wall(self):
        run = run_coalition(load_scenario(FIXTURES / "sealed.scn"))
        self.assertEqual((run.status, run.reason, run.obstacle_id), (FAILURE, Reason.BLOCKED, 1))

    def test_minimal(self):
        run = run_coalition(load_scenario(FIXTURES / "minimal.scn"))
        self.assertEqual((run.status, run.ticks), (SUCCESS, 2))


class TraceFileTests(SimpleTestCase):

    def test_serialized_trace_is_stable(self):
        run = run_coalition(load_scenario(FIXTURES / "fig1.scn"))
        text = dumps_trace(run.trace)
        self.assertEqual(dumps_trace(loads_trace(text)), text)
        self.assertEqual(len(text.splitlines()), len(run.trace))
        first = json.loads(text.splitlines()[0])
        self.assertEqual(list(first), ["agent", "kind", "payload", "tick"])

    def test_decreasing_tick_rejected(self):
        text = '{"agent":1,"kind":"plan","payload":{},"tick":3}\n{"agent":1,"kind":"plan","payload":{},"tick":2}\n'
        with self.assertRaises(TraceFormatError) as ctx:
            loads_trace(text)
        self.assertEqual(ctx.exception.line, 2)

    def test_garbage_rejected(self):
        with self.assertRaises(TraceFormatError):
            loads_trace("not json\n")

    def test_blank_lines_ignored(self):
        self.assertEqual(len(loads_trace('\n{"agent":null,"kind":"outcome","payload":{},"tick":0}\n\n')), 1)


class RenderingTests(SimpleTestCase):

    def test_empty_map(self):
        svg = render_svg(Snapshot(bounds=(0, 10, 0, 10)))
        rects = list(svg_elements(svg, "rect"))
        self.assertEqual([r.get("class") for r in rects], ["bounds"])
        self.assertEqual(rects[0].get("width"), "200")
        for tag in ("polygon", "circle", "polyline"):
            self.assertEqual(list(svg_elements(svg, tag)), [])

    def test_passage_final_state(self):
        run = run_coalition(load_scenario(FIXTURES / "fig1.scn"))
        svg = render_trace(run.trace)

        goals = {c.get("data-agent"): c for c in svg_elements(svg, "circle") if c.get("class") == "goal"}
        paths = list(svg_elements(svg, "polyline"))
        self.assertEqual(sorted(p.get("data-agent") for p in paths), ["1", "2"])
        for path in paths:
            goal = goals[path.get("data-agent")]
            x, y = map(float, path.get("points").split()[-1].split(","))
            distance = math.hypot(x - float(goal.get("cx")), y - float(goal.get("cy")))
            self.assertLessEqual(distance, float(goal.get("r")))

        obstacles = {p.get("data-id"): p.get("class").split() for p in svg_elements(svg, "polygon")}
        self.assertIn("destroyed", obstacles["1"])
        self.assertIn("destroyable", obstacles["2"])
        self.assertNotIn("destroyed", obstacles["2"])
        self.assertNotIn("destroyable", obstacles["3"])
        crosses = [line.get("data-id") for line in svg_elements(svg, "line") if line.get("class") == "cross"]
        self.assertEqual(crosses, ["1", "1"])

    def test_outline_ring_drawn(self):
        scenario = load_scenario(FIXTURES / "outline_demo.scn")
        svg = render_svg(Snapshot.from_header(scenario.header()))
        layers = [r.get("class") for r in svg_elements(svg, "rect") if r.get("class") != "bounds"]

        grid = double_outline(discretize(scenario.build_workspace(), scenario.res))
        ring = grid.outlined_blocked & ~grid.base_blocked
        self.assertEqual(layers.count("cell base"), int(grid.base_blocked.sum()))
        self.assertEqual(layers.count("cell outline"), int(ring.sum()))
        self.assertGreater(layers.count("cell outline"), layers.count("cell base"))

    def test_snapshot_replays_moves(self):
        run = run_coalition(load_scenario(FIXTURES / "minimal.scn"))
        snapshot = snapshot_from_trace(run.trace)
        self.assertEqual(snapshot.agents[0]["position"], list(run.minds[0].position))
        self.assertEqual(snapshot.paths[1][0], (2.5, 2.5))
        self.assertEqual(snapshot.outcome["status"], SUCCESS)

    def test_trace_without_header(self):
        with self.assertRaises(TraceFormatError):
            snapshot_from_trace(loads_trace('{"agent":null,"kind":"outcome","payload":{},"tick":0}\n'))


class CommandLineTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        code = cli_main([str(a) for a in argv], stdout=stdout, stderr=stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_validate(self):
        code, stdout, _ = self.cli("validate", FIXTURES / "fig1.scn")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("valid", stdout)

    def test_validate_reports_diagnostics(self):
        bad = self.out / "bad.scn"
        bad.write_text(fixture_text("minimal.scn").replace("goal: [[I, place A]]", "goal: [[I, place Z]]"))
        code, _, stderr = self.cli("validate", bad)
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertIn(f"{bad}:{line_of(bad.read_text(), 'goal: [[I, place Z]]')}:5: UnresolvedReference", stderr)

    def test_missing_file(self):
        code, _, stderr = self.cli("validate", self.out / "absent.scn")
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertIn("Cannot read scenario", stderr)

    def test_run_passage_with_trace(self):
        code, stdout, _ = self.cli("run", FIXTURES / "fig1.scn", "--trace", self.out / "passage.trc")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("success after 6 ticks", stdout)
        events = read_trace(self.out / "passage.trc")
        self.assertEqual(len([e for e in events if e.kind == "message"]), 1)

    def test_run_sealed_fails(self):
        code, _, stderr = self.cli("run", FIXTURES / "sealed.scn", "--trace", self.out / "sealed.trc")
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("Blocked", stderr)
        outcome = read_trace(self.out / "sealed.trc")[-1]
        self.assertEqual(outcome.kind, "outcome")
        self.assertEqual(outcome.payload, {"status": FAILURE, "reason": Reason.BLOCKED, "obstacle_id": 1})

    def test_render_matches_run_svg(self):
        trace, direct, replay = self.out / "passage.trc", self.out / "direct.svg", self.out / "replay.svg"
        self.assertEqual(self.cli("run", FIXTURES / "fig1.scn", "--trace", trace, "--svg", direct)[0], EXIT_OK)
        self.assertEqual(self.cli("render", trace, "--svg", replay)[0], EXIT_OK)
        self.assertEqual(replay.read_bytes(), direct.read_bytes())

    def test_render_bad_trace(self):
        trace = self.out / "bad.trc"
        trace.write_text("{}\n")
        code, _, _ = self.cli("render", trace, "--svg", self.out / "x.svg")
        self.assertEqual(code, EXIT_INPUT_ERROR)
        self.assertFalse((self.out / "x.svg").exists())

    def test_relative_paths_use_output_dir(self):
        relocation = {**settings.RELOCATION, "OUTPUT_DIR": self.tmp.name}
        with override_settings(RELOCATION=relocation):
            code, _, _ = self.cli("run", FIXTURES / "minimal.scn", "--trace", "minimal.trc")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((self.out / "minimal.trc").exists())

    def test_plan_single_agent(self):
        code, stdout, _ = self.cli("plan", FIXTURES / "fig1.scn", "--agent", 2)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(stdout)["kind"], "success")

    def test_plan_blocked_agent(self):
        code, stdout, _ = self.cli("plan", FIXTURES / "fig1.scn", "--agent", 1)
        self.assertEqual(code, EXIT_FAILURE)
        result = json.loads(stdout)
        self.assertEqual((result["kind"], result["obstacle_id"]), ("blocked", 1))

    def test_plan_unknown_agent(self):
        self.assertEqual(self.cli("plan", FIXTURES / "fig1.scn", "--agent", 9)[0], EXIT_INPUT_ERROR)

    def test_usage_errors(self):
        self.assertEqual(self.cli()[0], EXIT_INPUT_ERROR)
        self.assertEqual(self.cli("fly", FIXTURES / "fig1.scn")[0], EXIT_INPUT_ERROR)
        self.assertEqual(self.cli("plan", FIXTURES / "fig1.scn")[0], EXIT_INPUT_ERROR)


class ScenarioApiTests(SimpleTestCase):

    def setUp(self):
        self.client = APIClient()

    def test_validate_valid(self):
        response = self.client.post('/api/scenarios/validate/', {'scenario': fixture_text("fig1.scn")}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data, {'valid': True, 'name': 'fig1', 'agents': [1, 2]})

    def test_validate_diagnostics(self):
        text = fixture_text("minimal.scn").replace("res: 1", "res: nope")
        response = self.client.post('/api/scenarios/validate/', {'scenario': text}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        diagnostic = response.data['diagnostics'][0]
        self.assertEqual(diagnostic['code'], INVALID_VALUE)
        self.assertEqual((diagnostic['line'], diagnostic['column']), (line_of(text, "res: nope"), 3))

    def test_missing_text(self):
        response = self.client.post('/api/scenarios/validate/', {}, format='json')
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_run(self):
        response = self.client.post('/api/scenarios/run/', {'scenario': fixture_text("minimal.scn")}, format='json')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['outcome']['status'], SUCCESS)
        self.assertEqual(response.data['trace'][0]['kind'], 'scenario')
        self.assertEqual(response.data['trace'][-1]['kind'], 'outcome')

    def test_get_not_allowed(self):
        response = self.client.get('/api/scenarios/run/')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
