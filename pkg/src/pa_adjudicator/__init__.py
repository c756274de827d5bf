"""Medical-necessity adjudication of patient documents against
hierarchical clinical-guideline checklists."""

from .checklist import (
    ChecklistNode,
    Judgment,
    NecessityDecision,
    Operator,
    leaves,
    parse_checklist,
)
from .propagation import NodeResult, propagate_node, propagate_tree

__all__ = [
    "ChecklistNode",
    "Judgment",
    "NecessityDecision",
    "NodeResult",
    "Operator",
    "leaves",
    "parse_checklist",
    "propagate_node",
    "propagate_tree",
]
