"""
Sign world model: features, causal relations, signs and situations.

A sign has a name and three components. The image holds recognition
features, the significance holds communicable rules shared by every agent
that knows the sign, and the personal meaning holds the agent's own ways of
realizing those rules. xi_links binds significance relations to personal
meaning relations.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .exceptions import KnowledgeBaseInvalid

logger = logging.getLogger(__name__)

EMPTY_SIGN = "empty"


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


@dataclass(frozen=True)
class SignLink:
    name: str

    def as_data(self):
        return self.name


@dataclass(frozen=True)
class SensorDatum:
    channel: str
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", _freeze(self.value))

    def as_data(self):
        return {"sensor": self.channel, "value": _thaw(self.value)}


@dataclass(frozen=True)
class PersonalFeature:
    """Agent-internal property; names a lower personal meaning when id is a sign name"""
    id: str
    target: Optional[str] = None

    def as_data(self):
        data = {"personal": self.id}
        if self.target is not None:
            data["target"] = self.target
        return data


@dataclass(frozen=True)
class PathPlanOperator:
    place: str

    def as_data(self):
        return {"plan": self.place}


Feature = Union[SignLink, SensorDatum, PersonalFeature, PathPlanOperator]
FeatureGroups = Tuple[Tuple[Feature, ...], ...]


def feature_from_data(data) -> Feature:
    """Inverse of Feature.as_data"""
    if isinstance(data, str):
        return SignLink(data)
    if "sensor" in data:
        return SensorDatum(str(data["sensor"]), data.get("value"))
    if "personal" in data:
        return PersonalFeature(str(data["personal"]), data.get("target"))
    if "plan" in data:
        return PathPlanOperator(str(data["plan"]))
    raise ValueError(f"Unrecognized feature {data!r}")


def groups_from_data(groups) -> FeatureGroups:
    return tuple(tuple(feature_from_data(f) for f in group) for group in groups or ())


def groups_as_data(groups: FeatureGroups) -> List[list]:
    return [[f.as_data() for f in group] for group in groups]


def _sign_groups(groups: FeatureGroups) -> Tuple[Tuple[str, ...], ...]:
    return tuple(
        tuple(f.name for f in group if isinstance(f, SignLink))
        for group in groups
    )


@dataclass(frozen=True)
class CausalRelation:
    """Condition groups and effect groups of a rule owned by one sign"""
    conditions: FeatureGroups
    effects: FeatureGroups
    owner: str
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(tuple(g) for g in self.conditions))
        object.__setattr__(self, "effects", tuple(tuple(g) for g in self.effects))

    @property
    def name(self) -> str:
        return self.label or self.owner

    def features(self) -> Iterator[Feature]:
        for group in self.conditions + self.effects:
            yield from group

    def links(self) -> FrozenSet[str]:
        return frozenset(f.name for f in self.features() if isinstance(f, SignLink))

    @property
    def condition_signs(self) -> Tuple[Tuple[str, ...], ...]:
        return _sign_groups(self.conditions)

    @property
    def effect_signs(self) -> Tuple[Tuple[str, ...], ...]:
        return _sign_groups(self.effects)

    def describe(self) -> dict:
        """Communicable description: sign links only"""
        return {
            "sign": self.owner,
            "label": self.name,
            "conditions": [list(g) for g in self.condition_signs],
            "effects": [list(g) for g in self.effect_signs],
        }

    def as_data(self) -> dict:
        data = {
            "conditions": groups_as_data(self.conditions),
            "effects": groups_as_data(self.effects),
        }
        if self.label is not None:
            data["label"] = self.label
        return data


@dataclass(frozen=True)
class Sign:
    name: str
    image: FeatureGroups = ()
    significance: Tuple[CausalRelation, ...] = ()
    personal_meaning: Tuple[CausalRelation, ...] = ()
    xi_links: Mapping[int, Tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(tuple(g) for g in self.image))
        object.__setattr__(self, "significance", tuple(self.significance))
        object.__setattr__(self, "personal_meaning", tuple(self.personal_meaning))
        object.__setattr__(
            self, "xi_links",
            {int(k): tuple(int(i) for i in v) for k, v in dict(self.xi_links).items()},
        )

    def __hash__(self):
        return hash(self.name)

    def sensor_data(self) -> FrozenSet[SensorDatum]:
        return frozenset(f for group in self.image for f in group if isinstance(f, SensorDatum))

    def sensor_value(self, channel: str):
        for datum in self.sensor_data():
            if datum.channel == channel:
                return datum.value
        return None


class KnowledgeBase:
    """Validated, read-only collection of signs in declaration order"""

    def __init__(self, signs: Iterable[Sign]):
        self._signs: Dict[str, Sign] = {}
        for sign in signs:
            if sign.name in self._signs:
                raise KnowledgeBaseInvalid(f"Duplicate sign '{sign.name}'", sign.name)
            self._signs[sign.name] = sign
        self.validate()
        self.channels = frozenset(
            d.channel for sign in self._signs.values() for d in sign.sensor_data()
        )

    def __contains__(self, name) -> bool:
        return name in self._signs

    def __getitem__(self, name) -> Sign:
        return self._signs[name]

    def __iter__(self) -> Iterator[Sign]:
        return iter(self._signs.values())

    def __len__(self) -> int:
        return len(self._signs)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return list(self._signs.values()) == list(other._signs.values())

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(self._signs)

    def get(self, name) -> Optional[Sign]:
        return self._signs.get(name)

    def _check_links(self, sign: Sign, features: Iterable[Feature], where: str):
        for feature in features:
            if isinstance(feature, SignLink) and feature.name not in self._signs:
                raise KnowledgeBaseInvalid(
                    f"Sign '{sign.name}' {where} links unknown sign '{feature.name}'", sign.name
                )
            if isinstance(feature, PersonalFeature) and feature.target is not None \
                    and feature.target not in self._signs:
                raise KnowledgeBaseInvalid(
                    f"Sign '{sign.name}' {where} targets unknown sign '{feature.target}'", sign.name
                )

    def _check_relation(self, sign: Sign, relation: CausalRelation, where: str, allowed: tuple):
        if not relation.conditions and not relation.effects:
            raise KnowledgeBaseInvalid(f"Sign '{sign.name}' has an empty {where} relation", sign.name)
        if sign.name not in relation.links():
            raise KnowledgeBaseInvalid(
                f"Sign '{sign.name}' {where} relation '{relation.name}' does not link its own sign",
                sign.name,
            )
        for feature in relation.features():
            if not isinstance(feature, allowed):
                raise KnowledgeBaseInvalid(
                    f"Sign '{sign.name}' {where} may not hold {type(feature).__name__}", sign.name
                )
        self._check_links(sign, relation.features(), where)

    def _check_operator_level(self, sign: Sign, relation: CausalRelation):
        """Path-planning operators sit in effects of relations that expand no further"""
        if not any(isinstance(f, PathPlanOperator) for f in relation.features()):
            return
        if any(isinstance(f, PathPlanOperator) for group in relation.conditions for f in group):
            raise KnowledgeBaseInvalid(
                f"Sign '{sign.name}' personal meaning '{relation.name}' has a path-planning operator "
                f"among its conditions", sign.name
            )
        for group in relation.effects:
            for feature in group:
                lower = None
                if isinstance(feature, SignLink) and feature.name != sign.name:
                    lower = self._signs.get(feature.name)
                elif isinstance(feature, PersonalFeature) and feature.target is None:
                    lower = self._signs.get(feature.id)
                if lower is not None and lower.personal_meaning:
                    raise KnowledgeBaseInvalid(
                        f"Sign '{sign.name}' personal meaning '{relation.name}' puts a path-planning "
                        f"operator next to '{lower.name}', which expands further", sign.name
                    )

    def validate(self):
        for sign in self._signs.values():
            for group in sign.image:
                for feature in group:
                    if not isinstance(feature, (SignLink, SensorDatum)):
                        raise KnowledgeBaseInvalid(
                            f"Sign '{sign.name}' image may not hold {type(feature).__name__}", sign.name
                        )
                self._check_links(sign, group, "image")
            for relation in sign.significance:
                self._check_relation(sign, relation, "significance", (SignLink,))
            for relation in sign.personal_meaning:
                self._check_relation(
                    sign, relation, "personal meaning", (SignLink, PersonalFeature, PathPlanOperator)
                )
                self._check_operator_level(sign, relation)
            for sig_index, pm_indexes in sign.xi_links.items():
                if not 0 <= sig_index < len(sign.significance):
                    raise KnowledgeBaseInvalid(
                        f"Sign '{sign.name}' maps missing significance {sig_index}", sign.name
                    )
                for pm_index in pm_indexes:
                    if not 0 <= pm_index < len(sign.personal_meaning):
                        raise KnowledgeBaseInvalid(
                            f"Sign '{sign.name}' maps to missing personal meaning {pm_index}", sign.name
                        )


@dataclass(frozen=True)
class Situation:
    """
    Grouped set of sign names. Groups keep their order for presentation;
    containment and equality of content ignore it (see canonical()).
    """
    groups: Tuple[Tuple[str, ...], ...] = ()

    def __post_init__(self):
        cleaned = []
        seen = set()
        for group in self.groups:
            names = tuple(dict.fromkeys(str(name) for name in group))
            key = frozenset(names)
            if names and key not in seen:
                seen.add(key)
                cleaned.append(names)
        object.__setattr__(self, "groups", tuple(cleaned))

    @classmethod
    def of(cls, groups: Iterable[Iterable[str]]) -> "Situation":
        return cls(tuple(tuple(g) for g in groups))

    def __len__(self):
        return len(self.groups)

    def signs(self) -> FrozenSet[str]:
        return frozenset(name for group in self.groups for name in group)

    def issubset(self, other: "Situation") -> bool:
        return self.signs() <= other.signs()

    def holds(self, group: Iterable[str]) -> bool:
        return frozenset(group) <= self.signs()

    def with_group(self, group: Iterable[str]) -> "Situation":
        return Situation(self.groups + (tuple(group),))

    def extend(self, groups: Iterable[Iterable[str]]) -> "Situation":
        return Situation(self.groups + tuple(tuple(g) for g in groups))

    def without_sign(self, name: str) -> "Situation":
        return Situation(tuple(g for g in self.groups if name not in g))

    def residual(self, current: "Situation") -> "Situation":
        """Groups of this (goal) situation not yet held by current"""
        return Situation(tuple(g for g in self.groups if not current.holds(g)))

    def canonical(self) -> Tuple[Tuple[str, ...], ...]:
        return tuple(sorted(tuple(sorted(g)) for g in self.groups))

    def as_list(self) -> List[List[str]]:
        return [list(g) for g in self.groups]

    def unknown_signs(self, kb: KnowledgeBase) -> Sequence[str]:
        return sorted(name for name in self.signs() if name not in kb)
