"""Independent reference implementations used only to check the engine.

These are written directly from the rule tables as literal case-by-case
code, deliberately not sharing logic with pa_adjudicator.propagation, and
a closed-form vote-majority probability computed by exact trinomial
enumeration.
"""
from fractions import Fraction
from itertools import product

from pa_adjudicator.checklist import ChecklistNode, Judgment, Operator

T = Judgment.TRUE
F = Judgment.FALSE
N = Judgment.NO_INFORMATION


def ref_combine(op, children):
    """Reference parent (judgment, confidence) from the two rule figures."""
    judgments = [j for j, _ in children]
    confs = lambda wanted: [f for j, f in children if j == wanted]

    if op == Operator.NOT:
        assert len(children) == 1
        j, f = children[0]
        if j == T:
            return F, f
        if j == F:
            return T, f
        return N, f  # NOT NoInformation = NoInformation

    if op == Operator.AND:
        # False AND anything = False; True AND NoInformation = NoInformation.
        if F in judgments:
            return F, max(confs(F))
        if N in judgments:
            return N, min(confs(N))
        return T, min(confs(T))

    if op == Operator.OR:
        # True OR anything = True; False OR NoInformation = NoInformation.
        if T in judgments:
            return T, max(confs(T))
        if N in judgments:
            return N, min(confs(N))
        return F, min(confs(F))

    raise AssertionError(f"unexpected operator {op}")


def ref_evaluate(node: ChecklistNode, leaf_results: dict):
    """Recursive whole-tree reference evaluator."""
    if node.is_leaf:
        return leaf_results[node.id]
    child_values = [ref_evaluate(child, leaf_results) for child in node.children]
    return ref_combine(node.operator, child_values)


def ref_majority(votes: dict) -> Judgment:
    """Reference vote reduction: strict plurality, any tie -> NoInformation."""
    best = max(votes.values())
    leaders = [j for j, c in votes.items() if c == best]
    return leaders[0] if len(leaders) == 1 else N


def majority_correct_probability(n: int, p: Fraction, gold: Judgment) -> Fraction:
    """Exact P(final judgment == gold) for the p-noise jury.

    Per run the gold label survives with probability 1-p; a flip lands on
    each of the two other labels with probability p/2. The final judgment
    is the strict plurality of n runs, ties resolving to NoInformation.
    """
    p = Fraction(p)
    others = [j for j in (T, F, N) if j != gold]
    probs = {gold: 1 - p, others[0]: p / 2, others[1]: p / 2}

    total = Fraction(0)
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = n - a - b
            counts = {gold: a, others[0]: b, others[1]: c}
            if ref_majority(counts) != gold:
                continue
            weight = (
                _multinomial(n, a, b, c)
                * probs[gold] ** a
                * probs[others[0]] ** b
                * probs[others[1]] ** c
            )
            total += weight
    return total


def _multinomial(n: int, a: int, b: int, c: int) -> int:
    import math

    return math.factorial(n) // (math.factorial(a) * math.factorial(b) * math.factorial(c))


def all_judgment_assignments(leaf_ids):
    """Every mapping of the given leaves to the three judgments."""
    for combo in product((T, F, N), repeat=len(leaf_ids)):
        yield dict(zip(leaf_ids, combo))
