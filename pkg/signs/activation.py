"""
Activation spreading over a knowledge base: bottom-up recognition,
the significance/personal-meaning mapping and top-down expansion of
personal meanings into executable operators.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Tuple, Union

from .exceptions import CyclicHierarchy, IndexOutOfRange, UnresolvedFeature
from .knowledge import (
    CausalRelation, KnowledgeBase, PathPlanOperator, PersonalFeature, SensorDatum, Sign,
    SignLink, Situation
)

logger = logging.getLogger(__name__)

Operator = Union[PathPlanOperator, PersonalFeature]


def recognize(kb: KnowledgeBase, low_level: Iterable[SensorDatum]) -> FrozenSet[str]:
    """
    Activate every sign one of whose image groups is fully matched by the
    input data and the signs already active, until nothing changes.
    """
    data = frozenset(low_level)
    unknown = sorted({d.channel for d in data} - kb.channels)
    if unknown:
        raise UnresolvedFeature(f"Unknown sensor channels: {', '.join(unknown)}")

    active = set()
    changed = True
    while changed:
        changed = False
        for sign in kb:
            if sign.name in active:
                continue
            for group in sign.image:
                if group and all(
                    (f.name in active) if isinstance(f, SignLink) else (f in data)
                    for f in group
                ):
                    active.add(sign.name)
                    changed = True
                    break
    logger.debug("Recognized %s", sorted(active))
    return frozenset(active)


def _check_index(sign: Sign, relations, index: int):
    if not 0 <= index < len(relations):
        raise IndexOutOfRange(sign.name, index, len(relations))


def xi(sign: Sign, significance_index: int) -> List[CausalRelation]:
    """Personal meanings realizing a significance; empty when the agent cannot act on it"""
    _check_index(sign, sign.significance, significance_index)
    return [sign.personal_meaning[i] for i in sign.xi_links.get(significance_index, ())]


def xi_indexes(sign: Sign, significance_index: int) -> Tuple[int, ...]:
    _check_index(sign, sign.significance, significance_index)
    return tuple(sign.xi_links.get(significance_index, ()))


def xi_inverse(sign: Sign, pm_index: int) -> List[CausalRelation]:
    _check_index(sign, sign.personal_meaning, pm_index)
    return [
        sign.significance[sig_index]
        for sig_index, pm_indexes in sorted(sign.xi_links.items())
        if pm_index in pm_indexes
    ]


def effect_coverage(relation: CausalRelation, target: Situation) -> int:
    """Number of distinct target signs named by the relation's effects"""
    named = {name for group in relation.effect_signs for name in group}
    return len(named & target.signs())


@dataclass(frozen=True)
class Activation:
    trace: Tuple[str, ...]
    operators: Tuple[Operator, ...]


def _operator_label(op: Operator) -> str:
    if isinstance(op, PathPlanOperator):
        return f"plan {op.place}"
    return f"{op.id} {op.target}" if op.target else op.id


def activate_top_down(kb: KnowledgeBase, sign: Sign, pm_index: int) -> Activation:
    """
    Expand a personal meaning depth-first until only path-planning operators
    and atomic personal features remain.

    Effect features linking another sign that owns personal meanings (and
    personal features named after such a sign) are replaced by that sign's
    first personal meaning. Revisiting a relation already on the expansion
    stack raises CyclicHierarchy.
    """
    _check_index(sign, sign.personal_meaning, pm_index)
    trace: List[str] = []
    operators: List[Operator] = []

    def expand(current: Sign, index: int, stack: Tuple[Tuple[str, int], ...]):
        key = (current.name, index)
        if key in stack:
            raise CyclicHierarchy(stack + (key,))
        stack = stack + (key,)
        relation = current.personal_meaning[index]
        trace.append(relation.name)
        for group in relation.effects:
            for feature in group:
                if isinstance(feature, PathPlanOperator):
                    operators.append(feature)
                    trace.append(_operator_label(feature))
                    continue
                if isinstance(feature, SignLink):
                    if feature.name == current.name:
                        continue
                    lower = kb.get(feature.name)
                    if lower is not None and lower.personal_meaning:
                        expand(lower, 0, stack)
                    continue
                if isinstance(feature, PersonalFeature):
                    lower = kb.get(feature.id)
                    if lower is not None and lower.personal_meaning and feature.target is None:
                        expand(lower, 0, stack)
                    else:
                        operators.append(feature)
                        trace.append(_operator_label(feature))

    expand(sign, pm_index, ())
    return Activation(tuple(trace), tuple(operators))
