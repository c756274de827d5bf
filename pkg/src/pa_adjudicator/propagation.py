"""Bottom-up propagation of judgments and confidence scores.

Judgments follow the three-valued rule set: under AND, any False wins,
then any NoInformation, else True; under OR, any True wins, then any
NoInformation, else False; NOT swaps True/False and fixes NoInformation.

Confidence is selected (never computed) from the children that share the
winning judgment class: AND takes min over True children, max over False
children, min over NoInformation children; OR takes max over True, min
over False, min over NoInformation. NOT leaves the confidence unchanged.

Confidences are exact rationals end to end, so re-propagation is
byte-exact against persisted results.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .checklist import ChecklistNode, Judgment, Operator, leaves

TRUE = Judgment.TRUE
FALSE = Judgment.FALSE
NO_INFORMATION = Judgment.NO_INFORMATION

# Leaf confidences in synthetic data are drawn from this grid.
CONFIDENCE_GRID = tuple(Fraction(i, 10) for i in range(1, 11))


class PropagationError(Exception):
    pass


class EmptyChildren(PropagationError):
    pass


class ArityError(PropagationError):
    pass


class MissingLeafResult(PropagationError):
    pass


class UnknownLeafId(PropagationError):
    pass


@dataclass(frozen=True)
class NodeResult:
    node_id: str
    judgment: Judgment
    confidence: Fraction
    children_results: tuple["NodeResult", ...] = ()

    def find(self, node_id: str) -> "NodeResult | None":
        if self.node_id == node_id:
            return self
        for child in self.children_results:
            found = child.find(node_id)
            if found is not None:
                return found
        return None


_NOT_TABLE = {TRUE: FALSE, FALSE: TRUE, NO_INFORMATION: NO_INFORMATION}


def propagate_node(
    op: Operator, children: Sequence[tuple[Judgment, Fraction]]
) -> tuple[Judgment, Fraction]:
    """Combine child (judgment, confidence) pairs under one operator."""
    if not children:
        raise EmptyChildren("cannot propagate over zero children")

    if op is Operator.NOT:
        if len(children) != 1:
            raise ArityError(f"NOT requires exactly one child, got {len(children)}")
        judgment, confidence = children[0]
        return _NOT_TABLE[judgment], confidence

    judgments = [j for j, _ in children]
    if op is Operator.AND:
        if FALSE in judgments:
            result = FALSE
            pick = max
        elif NO_INFORMATION in judgments:
            result = NO_INFORMATION
            pick = min
        else:
            result = TRUE
            pick = min
    elif op is Operator.OR:
        if TRUE in judgments:
            result = TRUE
            pick = max
        elif NO_INFORMATION in judgments:
            result = NO_INFORMATION
            pick = min
        else:
            result = FALSE
            pick = min
    else:
        raise PropagationError(f"unknown operator {op!r}")

    confidence = pick(f for j, f in children if j is result)
    return result, confidence


def propagate_tree(
    root: ChecklistNode, leaf_results: Mapping[str, tuple[Judgment, Fraction]]
) -> NodeResult:
    """Propagate leaf results bottom-up to a complete NodeResult tree."""
    leaf_ids = {leaf.id for leaf in leaves(root)}
    unknown = set(leaf_results) - leaf_ids
    if unknown:
        raise UnknownLeafId(f"results for unknown leaf ids: {sorted(unknown)}")
    missing = leaf_ids - set(leaf_results)
    if missing:
        raise MissingLeafResult(f"no results for leaves: {sorted(missing)}")
    return _propagate(root, leaf_results)


def _propagate(node: ChecklistNode, leaf_results) -> NodeResult:
    if node.is_leaf:
        judgment, confidence = leaf_results[node.id]
        if not isinstance(confidence, Fraction):
            confidence = Fraction(confidence)
        return NodeResult(node.id, judgment, confidence)
    child_results = tuple(_propagate(child, leaf_results) for child in node.children)
    judgment, confidence = propagate_node(
        node.operator, [(c.judgment, c.confidence) for c in child_results]
    )
    return NodeResult(node.id, judgment, confidence, child_results)


def override_leaf(
    root: ChecklistNode,
    result: NodeResult,
    leaf_id: str,
    judgment: Judgment,
    confidence: Fraction,
) -> NodeResult:
    """Incrementally re-propagate after replacing one leaf's result.

    Only the leaf's ancestors are recomputed; sibling subtrees are reused
    as-is. Equals propagation from scratch with the updated leaf.
    """
    target = root.find(leaf_id)
    if target is None or not target.is_leaf:
        raise UnknownLeafId(f"{leaf_id!r} is not a leaf of this checklist")
    return _rebuild(root, result, leaf_id, judgment, confidence)


def _rebuild(node: ChecklistNode, result: NodeResult, leaf_id, judgment, confidence) -> NodeResult:
    if node.id == leaf_id:
        return NodeResult(node.id, judgment, Fraction(confidence))
    if node.find(leaf_id) is None:
        return result
    child_results = tuple(
        _rebuild(child, child_result, leaf_id, judgment, confidence)
        for child, child_result in zip(node.children, result.children_results)
    )
    new_judgment, new_confidence = propagate_node(
        node.operator, [(c.judgment, c.confidence) for c in child_results]
    )
    return NodeResult(node.id, new_judgment, new_confidence, child_results)


def subchecklists(root: ChecklistNode) -> list[ChecklistNode]:
    """Every internal node, i.e. every parent with an operator."""
    return [node for node in root.walk() if not node.is_leaf]


def fraction_to_str(f: Fraction) -> str:
    """Serialize exactly: one-decimal strings for the /10 grid, 'p/q' otherwise."""
    if f.denominator == 1:
        return f"{f.numerator}.0"
    if 10 % f.denominator == 0:
        scaled = f.numerator * (10 // f.denominator)
        return f"{scaled // 10}.{scaled % 10}"
    return f"{f.numerator}/{f.denominator}"


def generate_synthetic(
    guidelines: Sequence[ChecklistNode],
    count: int | None = None,
    seed: int = 0,
    exhaustive: bool = False,
) -> list[dict]:
    """Build a labeled parent-judgment dataset from sub-checklists.

    Each record assigns every direct child of one sub-checklist a random
    judgment and a confidence from the 0.1..1.0 grid, then computes the
    oracle parent judgment and confidence with propagate_node. Exhaustive
    mode emits all 3^m judgment permutations per sub-checklist instead of
    sampling `count` records. Deterministic for a fixed seed.
    """
    subs: list[ChecklistNode] = []
    for guideline in guidelines:
        subs.extend(subchecklists(guideline))
    if not subs:
        raise PropagationError("no sub-checklists in the supplied guidelines")

    rng = random.Random(seed)
    records: list[dict] = []

    if exhaustive:
        for sub in subs:
            slots = sub.children
            for assignment in _all_assignments(len(slots)):
                records.append(_make_record(sub, assignment, rng))
        return records

    if count is None:
        raise ValueError("count is required unless exhaustive=True")
    judgments = list(Judgment)
    for i in range(count):
        sub = subs[i % len(subs)]
        assignment = tuple(rng.choice(judgments) for _ in sub.children)
        records.append(_make_record(sub, assignment, rng))
    return records


def _all_assignments(m: int):
    if m == 0:
        yield ()
        return
    for rest in _all_assignments(m - 1):
        for j in Judgment:
            yield (j,) + rest


def _make_record(sub: ChecklistNode, assignment: tuple[Judgment, ...], rng) -> dict:
    confidences = tuple(rng.choice(CONFIDENCE_GRID) for _ in assignment)
    pairs = list(zip(assignment, confidences))
    oracle_judgment, oracle_confidence = propagate_node(sub.operator, pairs)
    return {
        "subchecklist": {
            "id": sub.id,
            "text": sub.text,
            "operator": sub.operator.value,
            "children": [{"id": c.id, "text": c.text} for c in sub.children],
        },
        "leaf_assignments": {
            child.id: {"judgment": j.value, "confidence": fraction_to_str(f)}
            for child, j, f in zip(sub.children, assignment, confidences)
        },
        "oracle_judgment": oracle_judgment.value,
        "oracle_confidence": fraction_to_str(oracle_confidence),
    }
