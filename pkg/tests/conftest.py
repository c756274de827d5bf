import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from pa_adjudicator.checklist import ChecklistNode, Operator, parse_checklist
from pa_adjudicator.store import RecordStore

FIXTURES = Path(__file__).parent / "fixtures"

# Filled in by the acceptance suite; echoed after the run so each criterion
# gets one visible pass/fail line even when pytest captures stdout.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
GUIDELINES = Path(__file__).parents[1] / "src" / "pa_adjudicator" / "fixtures" / "guidelines"


@pytest.fixture(scope="session")
def footwear():
    return parse_checklist((GUIDELINES / "footwear.json").read_text())


@pytest.fixture(scope="session")
def bundled_guidelines():
    return [parse_checklist(p.read_text()) for p in sorted(GUIDELINES.glob("*.json"))]


@pytest.fixture(scope="session")
def footwear_cases():
    return json.loads((FIXTURES / "footwear_cases.json").read_text())


@pytest.fixture(scope="session")
def sentence_fixture():
    return json.loads((FIXTURES / "sentence_fixture.json").read_text())


@pytest.fixture
def store(tmp_path):
    return RecordStore(tmp_path / "store")


def random_tree(rng: random.Random, max_leaves: int = 8) -> ChecklistNode:
    """Random checklist with mixed AND/OR/NOT and 1..max_leaves leaves."""
    target = rng.randint(1, max_leaves)
    counter = [0]

    def build(depth: int, budget: int, prefix: str) -> tuple[ChecklistNode, int]:
        if budget == 1 or depth >= 4:
            counter[0] += 1
            leaf_id = f"{prefix}L{counter[0]}"
            return ChecklistNode(id=leaf_id, text=f"criterion {counter[0]}"), 1
        op = rng.choice([Operator.AND, Operator.OR, Operator.NOT])
        node_id = f"{prefix}n{counter[0]}_{depth}"
        if op is Operator.NOT:
            child, used = build(depth + 1, budget, node_id + ".")
            return ChecklistNode(id=node_id, text="not:", operator=op, children=(child,)), used
        n_children = rng.randint(2, min(3, budget))
        children = []
        used_total = 0
        remaining = budget
        for i in range(n_children):
            slots_left = n_children - i - 1
            share = remaining - slots_left if i == n_children - 1 else rng.randint(1, remaining - slots_left)
            child, used = build(depth + 1, share, f"{node_id}.{i}.")
            children.append(child)
            used_total += used
            remaining -= used
        return (
            ChecklistNode(id=node_id, text="group:", operator=op, children=tuple(children)),
            used_total,
        )

    root, _ = build(0, target, "")
    return root


_CONFIDENCE_GRID = tuple(Fraction(i, 10) for i in range(1, 11))


def random_confidence(rng: random.Random) -> Fraction:
    return rng.choice(_CONFIDENCE_GRID)
