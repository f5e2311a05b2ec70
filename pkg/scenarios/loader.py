"""
Scenario documents: YAML text in, validated Scenario out (and back).

Structural checks run through the DRF serializers; cross-references, the
knowledge bases and the geometry are checked afterwards. Every problem is
reported as a Diagnostic positioned at the YAML node it concerns.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import yaml
from django.conf import settings

from coalition.world import SharedWorld
from geometry.exceptions import WorldModelError
from geometry.world import AgentBody, Obstacle, Workspace
from pathplanning.paths import GoalArea
from pma.mind import AgentMind
from signs.exceptions import KnowledgeBaseInvalid
from signs.knowledge import (
    CausalRelation, KnowledgeBase, PathPlanOperator, Sign, Situation, groups_from_data
)

from .exceptions import (
    COMMON_SIGN_MISMATCH, GEOMETRY_ERROR, INVALID_VALUE, SYNTAX_ERROR, UNRESOLVED_REFERENCE,
    Diagnostic, ScenarioError
)
from .serializers import ScenarioSerializer

logger = logging.getLogger(__name__)

NodePath = Tuple
Marks = Dict[NodePath, Tuple[int, int]]


def _plain(value):
    """Serializer output (OrderedDicts, ReturnLists) as plain JSON-like data"""
    return json.loads(json.dumps(value))


def _node_marks(node, path=(), marks=None) -> Marks:
    marks = {} if marks is None else marks
    marks[path] = (node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            child = path + (str(key.value),)
            _node_marks(value, child, marks)
            marks[child] = (key.start_mark.line + 1, key.start_mark.column + 1)
    elif isinstance(node, yaml.SequenceNode):
        for index, value in enumerate(node.value):
            _node_marks(value, path + (index,), marks)
    return marks


def _flatten_errors(detail, path=()) -> Iterator[Tuple[NodePath, str]]:
    if isinstance(detail, dict):
        for key, value in detail.items():
            step = () if key == "non_field_errors" else (key if isinstance(key, int) else str(key),)
            yield from _flatten_errors(value, path + step)
    elif isinstance(detail, list):
        for index, value in enumerate(detail):
            if isinstance(value, (dict, list)):
                yield from _flatten_errors(value, path + (index,))
            else:
                yield path, str(value)
    else:
        yield path, str(detail)


class _Collector:
    """Accumulates diagnostics, resolving node paths to the nearest known position"""

    def __init__(self, marks: Marks):
        self.marks = marks
        self.diagnostics: List[Diagnostic] = []

    def position(self, path: NodePath) -> Tuple[int, int]:
        while path not in self.marks and path:
            path = path[:-1]
        return self.marks.get(path, (1, 1))

    def add(self, path: NodePath, code: str, message: str):
        line, column = self.position(path)
        self.diagnostics.append(Diagnostic(line, column, code, message))


def _relation(owner: str, data: dict) -> CausalRelation:
    return CausalRelation(
        groups_from_data(data.get("conditions")), groups_from_data(data.get("effects")), owner, data.get("label")
    )


def _sign(data: dict) -> Sign:
    name = data["name"]
    return Sign(
        name,
        image=groups_from_data(data.get("image")),
        significance=tuple(_relation(name, r) for r in data.get("significance") or ()),
        personal_meaning=tuple(_relation(name, r) for r in data.get("personal_meaning") or ()),
        xi_links={int(k): v for k, v in (data.get("xi") or {}).items()},
    )


def merged_signs(common: List[dict], own: List[dict]) -> List[dict]:
    """
    An agent's sign declarations layered over the common ones. An agent entry
    for a common sign inherits its image and significance when it leaves them out.
    """
    merged = {s["name"]: dict(s) for s in common}
    for sign in own:
        base = merged.get(sign["name"], {})
        entry = dict(base)
        entry.update({k: v for k, v in sign.items() if k not in ("image", "significance") or v})
        entry.setdefault("significance", base.get("significance", []))
        merged[sign["name"]] = entry
    for entry in merged.values():
        entry.setdefault("significance", [])
    return list(merged.values())


@dataclass
class Scenario:
    """A validated scenario document; equality is equality of the normalized data"""
    data: dict
    source: str = "<scenario>"

    def __eq__(self, other):
        return isinstance(other, Scenario) and self.data == other.data

    @property
    def name(self) -> str:
        return self.data["name"]

    @property
    def res(self) -> float:
        return self.data["world"]["res"]

    @property
    def agents(self) -> List[dict]:
        return self.data["agents"]

    def agent(self, agent_id: int) -> dict:
        for agent in self.agents:
            if agent["id"] == agent_id:
                return agent
        raise KeyError(agent_id)

    @property
    def tick_cap(self) -> int:
        return self.data["limits"].get("tick_cap", settings.RELOCATION["TICK_CAP"])

    @property
    def iteration_cap(self) -> int:
        return self.data["limits"].get("iteration_cap", settings.RELOCATION["PMA_ITERATION_CAP"])

    def build_workspace(self) -> Workspace:
        world = self.data["world"]
        return Workspace(
            bounds=tuple(world["bounds"]),
            obstacles=[Obstacle(o["id"], tuple(map(tuple, o["vertices"])), o["type"]) for o in world["obstacles"]],
            agents=[AgentBody(a["id"], tuple(a["position"]), a["radius"]) for a in self.agents],
            obstacle_types={name: set(t["destroyable_by"]) for name, t in world["obstacle_types"].items()},
        )

    def knowledge_base(self, agent: dict) -> KnowledgeBase:
        return KnowledgeBase(_sign(s) for s in merged_signs(self.data["common_signs"], agent["kb"]))

    def places(self, agent: dict) -> Dict[str, GoalArea]:
        return {name: GoalArea(tuple(p["cp"]), p["r_g"]) for name, p in agent["places"].items()}

    def build_minds(self) -> List[AgentMind]:
        defaults = settings.RELOCATION
        minds = []
        for agent in self.agents:
            minds.append(AgentMind(
                agent_id=agent["id"],
                kb=self.knowledge_base(agent),
                current=Situation.of(agent["start"]),
                goal=Situation.of(agent["goal"]),
                position=tuple(agent["position"]),
                places=self.places(agent),
                goal_place=agent["goal_place"],
                self_sign=agent["self_sign"],
                public_sign=agent.get("public_sign"),
                introspection=agent["introspection"],
                alpha_m=agent.get("alpha_m", defaults["ALPHA_M"]),
                alpha_fallback=agent.get("alpha_fallback"),
                delta=agent.get("delta", defaults["LIAN_DELTA"]),
                iteration_cap=self.iteration_cap,
            ))
        return minds

    def build(self) -> Tuple[SharedWorld, List[AgentMind]]:
        return SharedWorld(self.build_workspace(), self.res), self.build_minds()

    def header(self) -> dict:
        """Everything a renderer needs to redraw the initial world"""
        world = self.data["world"]
        return {
            "name": self.name,
            "bounds": world["bounds"],
            "res": world["res"],
            "obstacle_types": world["obstacle_types"],
            "obstacles": world["obstacles"],
            "agents": [
                {
                    "id": a["id"],
                    "position": a["position"],
                    "radius": a["radius"],
                    "goal": a["places"][a["goal_place"]],
                }
                for a in self.agents
            ],
        }


def _check_references(data: dict, report: _Collector):
    world = data["world"]
    agent_ids = [a["id"] for a in data["agents"]]
    for index, agent_id in enumerate(agent_ids):
        if agent_ids.index(agent_id) != index:
            report.add(("agents", index, "id"), INVALID_VALUE, f"Duplicate agent id {agent_id}")

    for name, declared in world["obstacle_types"].items():
        for agent_id in declared["destroyable_by"]:
            if agent_id not in agent_ids:
                report.add(("world", "obstacle_types", name, "destroyable_by"), UNRESOLVED_REFERENCE,
                           f"Obstacle type '{name}' names unknown agent {agent_id}")

    obstacle_ids = []
    for index, obstacle in enumerate(world["obstacles"]):
        path = ("world", "obstacles", index)
        if obstacle["id"] in obstacle_ids:
            report.add(path + ("id",), INVALID_VALUE, f"Duplicate obstacle id {obstacle['id']}")
        obstacle_ids.append(obstacle["id"])
        if world["obstacle_types"] and obstacle["type"] not in world["obstacle_types"]:
            report.add(path + ("type",), UNRESOLVED_REFERENCE, f"Undeclared obstacle type '{obstacle['type']}'")

    for index, agent in enumerate(data["agents"]):
        path = ("agents", index)
        if agent["goal_place"] not in agent["places"]:
            report.add(path + ("goal_place",), UNRESOLVED_REFERENCE,
                       f"Agent {agent['id']} has no place '{agent['goal_place']}'")


def _check_knowledge(data: dict, report: _Collector):
    common = data["common_signs"]
    for sign in common:
        sign.setdefault("significance", [])

    significance_by_name = {s["name"]: (s["significance"], ("common_signs", i)) for i, s in enumerate(common)}
    for agent_index, agent in enumerate(data["agents"]):
        path = ("agents", agent_index)
        for sign_index, sign in enumerate(agent["kb"]):
            if sign.get("significance") is None:
                continue
            declared = significance_by_name.get(sign["name"])
            if declared is not None and declared[0] != sign["significance"]:
                report.add(path + ("kb", sign_index, "significance"), COMMON_SIGN_MISMATCH,
                           f"Sign '{sign['name']}' significance differs from its declaration elsewhere")
            elif declared is None:
                significance_by_name[sign["name"]] = (sign["significance"], path + ("kb", sign_index))

        signs = merged_signs(common, agent["kb"])
        try:
            kb = KnowledgeBase(_sign(s) for s in signs)
        except KnowledgeBaseInvalid as exc:
            code = UNRESOLVED_REFERENCE if "unknown sign" in str(exc) else INVALID_VALUE
            report.add(_sign_path(data, agent_index, exc.sign), code, str(exc))
            continue

        for key in ("start", "goal"):
            for name in sorted(Situation.of(agent[key]).unknown_signs(kb)):
                report.add(path + (key,), UNRESOLVED_REFERENCE, f"Agent {agent['id']} {key} names unknown sign '{name}'")
        for name in (agent["self_sign"], agent.get("public_sign")):
            if name is not None and name not in kb:
                report.add(path + ("self_sign",), UNRESOLVED_REFERENCE, f"Agent {agent['id']} has no sign '{name}'")
        for sign in kb:
            for relation in sign.personal_meaning:
                for feature in relation.features():
                    if isinstance(feature, PathPlanOperator) and feature.place not in agent["places"]:
                        report.add(_sign_path(data, agent_index, sign.name), UNRESOLVED_REFERENCE,
                                   f"Sign '{sign.name}' plans to unbound place '{feature.place}'")


def _sign_path(data: dict, agent_index: int, name: Optional[str]) -> NodePath:
    for index, sign in enumerate(data["agents"][agent_index]["kb"]):
        if sign["name"] == name:
            return ("agents", agent_index, "kb", index)
    for index, sign in enumerate(data["common_signs"]):
        if sign["name"] == name:
            return ("common_signs", index)
    return ("agents", agent_index, "kb")


def _check_geometry(scenario: Scenario, report: _Collector):
    world = scenario.data["world"]
    for index, obstacle in enumerate(world["obstacles"]):
        try:
            Obstacle(obstacle["id"], tuple(map(tuple, obstacle["vertices"])), obstacle["type"])
        except WorldModelError as exc:
            report.add(("world", "obstacles", index, "vertices"), GEOMETRY_ERROR, str(exc))
    if report.diagnostics:
        return
    try:
        workspace = scenario.build_workspace()
    except WorldModelError as exc:
        report.add(("world",), GEOMETRY_ERROR, str(exc))
        return
    radius = workspace.agent_radius
    if world["res"] <= 0 or (radius is not None and world["res"] < 2 * radius):
        report.add(("world", "res"), GEOMETRY_ERROR,
                   f"Resolution {world['res']} is finer than the agent diameter allows")


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """
    Parse and validate a scenario document.

    Raises:
        ScenarioError: with one Diagnostic per problem, each carrying line and column
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None) or getattr(exc, "context_mark", None)
        line, column = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError([Diagnostic(line, column, SYNTAX_ERROR, problem)], source)

    report = _Collector(_node_marks(node) if node is not None else {})
    if not isinstance(raw, dict):
        report.add((), SYNTAX_ERROR, "A scenario must be a mapping")
        raise ScenarioError(report.diagnostics, source)

    serializer = ScenarioSerializer(data=raw)
    if not serializer.is_valid():
        for path, message in _flatten_errors(serializer.errors):
            report.add(path, INVALID_VALUE, message)
        raise ScenarioError(report.diagnostics, source)

    data = _plain(serializer.validated_data)
    _check_references(data, report)
    if not report.diagnostics:
        _check_knowledge(data, report)
    scenario = Scenario(data, source)
    if not report.diagnostics:
        _check_geometry(scenario, report)
    if report.diagnostics:
        logger.warning("Scenario %s rejected with %s diagnostic(s)", source, len(report.diagnostics))
        raise ScenarioError(report.diagnostics, source)
    logger.debug("Scenario %s parsed: %s agents", source, len(data["agents"]))
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))


def dump_scenario(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario.data, sort_keys=False, default_flow_style=None, allow_unicode=True)
