"""Hierarchical guideline checklists: parsing, validation, and traversal.

A checklist is a tree of guideline statements. Internal nodes carry a
logical operator (AND, OR, NOT) over their children; leaves are testable
criteria. Trees are immutable after validation and safe to share across
concurrent pipeline tasks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Optional


class ChecklistError(Exception):
    """Base class for checklist parsing/validation failures."""


class SchemaError(ChecklistError):
    """The input document does not conform to the checklist schema."""


class StructureError(ChecklistError):
    """The tree shape violates a structural invariant."""


class Operator(str, Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"


class Judgment(str, Enum):
    """Tri-valued outcome for a checklist item."""

    TRUE = "True"
    FALSE = "False"
    NO_INFORMATION = "NoInformation"

    def sort_key(self) -> int:
        # Used only for deterministic serialization, never for logic.
        return ("True", "False", "NoInformation").index(self.value)


@dataclass(frozen=True)
class ChecklistNode:
    id: str
    text: str
    operator: Optional[Operator] = None
    children: tuple["ChecklistNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["ChecklistNode"]:
        """Depth-first, left-to-right traversal including self."""
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, node_id: str) -> Optional["ChecklistNode"]:
        for node in self.walk():
            if node.id == node_id:
                return node
        return None


@dataclass(frozen=True)
class NecessityDecision:
    """Root-level medical-necessity outcome.

    y is 1 (justified), -1 (not justified) or 0 (insufficient evidence).
    """

    y: int
    root_confidence: Fraction

    _Y_BY_JUDGMENT = {
        Judgment.TRUE: 1,
        Judgment.FALSE: -1,
        Judgment.NO_INFORMATION: 0,
    }

    @classmethod
    def from_judgment(cls, judgment: Judgment, confidence: Fraction) -> "NecessityDecision":
        return cls(y=cls._Y_BY_JUDGMENT[judgment], root_confidence=confidence)


def parse_checklist(document) -> ChecklistNode:
    """Parse and validate a checklist interchange document.

    Accepts a JSON string or an already-decoded dict. Raises SchemaError
    for malformed documents and StructureError for shape violations.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc
    root = _build_node(document, path="$")
    validate(root)
    return root


def _build_node(obj, path: str) -> ChecklistNode:
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: node must be an object, got {type(obj).__name__}")
    node_id = obj.get("id")
    text = obj.get("text")
    if not isinstance(node_id, str) or not node_id:
        raise SchemaError(f"{path}: 'id' must be a non-empty string")
    if not isinstance(text, str) or not text:
        raise SchemaError(f"{path}: 'text' must be a non-empty string")
    unknown = set(obj) - {"id", "text", "operator", "children"}
    if unknown:
        raise SchemaError(f"{path}: unknown fields {sorted(unknown)}")

    operator = None
    if obj.get("operator") is not None:
        try:
            operator = Operator(obj["operator"])
        except ValueError:
            raise SchemaError(f"{path}: unknown operator {obj['operator']!r}") from None

    raw_children = obj.get("children") or []
    if not isinstance(raw_children, list):
        raise SchemaError(f"{path}: 'children' must be a list")
    children = tuple(
        _build_node(child, path=f"{path}.children[{i}]") for i, child in enumerate(raw_children)
    )
    return ChecklistNode(id=node_id, text=text, operator=operator, children=children)


def validate(root: ChecklistNode) -> None:
    """Check every structural invariant; raise StructureError on violation."""
    seen_ids: set[str] = set()
    for node in root.walk():
        if node.id in seen_ids:
            raise StructureError(f"duplicate node id {node.id!r}")
        seen_ids.add(node.id)

        if node.children and node.operator is None:
            raise StructureError(f"node {node.id!r} has children but no operator")
        if not node.children and node.operator is not None:
            raise StructureError(f"node {node.id!r} has operator {node.operator.value} but no children")
        if node.operator is Operator.NOT and len(node.children) != 1:
            raise StructureError(
                f"node {node.id!r}: NOT requires exactly one child, got {len(node.children)}"
            )
        if node.operator in (Operator.AND, Operator.OR) and len(node.children) < 2:
            raise StructureError(
                f"node {node.id!r}: {node.operator.value} requires at least two children"
            )
    # Child ids extend the parent id; the root id itself is unconstrained,
    # so its direct children may start fresh paths (e.g. root "footwear"
    # with children "1" and "2").
    _check_id_prefixes(root, is_root=True)


def _check_id_prefixes(node: ChecklistNode, is_root: bool) -> None:
    for child in node.children:
        if not is_root and not child.id.startswith(node.id):
            raise StructureError(
                f"child id {child.id!r} does not extend parent id {node.id!r}"
            )
        _check_id_prefixes(child, is_root=False)


def leaves(root: ChecklistNode) -> list[ChecklistNode]:
    """Leaves in depth-first, left-to-right order."""
    return [node for node in root.walk() if node.is_leaf]


def to_dict(node: ChecklistNode) -> dict:
    """Serialize back to the interchange form (inverse of parse_checklist)."""
    out: dict = {"id": node.id, "text": node.text}
    if node.operator is not None:
        out["operator"] = node.operator.value
    if node.children:
        out["children"] = [to_dict(child) for child in node.children]
    return out


def dumps(node: ChecklistNode) -> str:
    return json.dumps(to_dict(node), indent=2, sort_keys=True)
