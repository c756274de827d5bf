"""Metrics harness: token recall, judgment accuracy, propagation accuracies.

Token recall is |tokens(gold) ∩ tokens(predicted)| / |tokens(gold)| with
multiset semantics; tokens are lowercased runs of alphanumerics. Fixtures
with no gold tokens are reported as skipped, never as 0.
"""
from __future__ import annotations

import csv
import io
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .agents import AgentConfig, AmbiguousOperator, extract_operators
from .checklist import ChecklistNode, Judgment, Operator
from .propagation import propagate_node

_TOKEN_RE = re.compile(r"[0-9a-z]+")


class EvaluationError(Exception):
    pass


class EmptyGold(EvaluationError):
    pass


class MisalignedIds(EvaluationError):
    pass


@dataclass(frozen=True)
class EvidenceAnnotation:
    note_id: str
    leaf_id: str
    gold_judgment: Judgment
    gold_evidence: tuple[str, ...]


@dataclass
class MetricReport:
    metrics: dict = field(default_factory=dict)
    breakdown: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"metrics": self.metrics, "breakdown": self.breakdown, "metadata": self.metadata},
            indent=2,
            sort_keys=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["metric", "value"])
        for name in sorted(self.metrics):
            writer.writerow([name, self.metrics[name]])
        return buf.getvalue()


def tokenize(text: str) -> Counter:
    return Counter(_TOKEN_RE.findall(text.lower()))


def token_recall(gold: str, predicted: Iterable[str]) -> float:
    """Fraction of gold tokens covered by the predicted evidence strings."""
    gold_tokens = tokenize(gold)
    if not gold_tokens:
        raise EmptyGold("gold evidence has no tokens; recall is undefined")
    predicted_tokens = Counter()
    for text in predicted:
        predicted_tokens.update(tokenize(text))
    hit = sum((gold_tokens & predicted_tokens).values())
    return hit / sum(gold_tokens.values())


def mean_token_recall(
    annotations: Sequence[EvidenceAnnotation],
    predicted: Mapping[tuple[str, str], Sequence[str]],
) -> MetricReport:
    """Average recall over (note_id, leaf_id) annotations with gold evidence.

    `predicted` maps (note_id, leaf_id) to the evidence strings the system
    surfaced for that leaf.
    """
    recalls = {}
    skipped = []
    for ann in annotations:
        gold = " ".join(ann.gold_evidence)
        key = (ann.note_id, ann.leaf_id)
        try:
            recalls[key] = token_recall(gold, predicted.get(key, []))
        except EmptyGold:
            skipped.append(key)
    mean = sum(recalls.values()) / len(recalls) if recalls else 0.0
    return MetricReport(
        metrics={"mean_token_recall": mean},
        breakdown={f"{n}/{l}": r for (n, l), r in sorted(recalls.items())},
        metadata={"evaluated": len(recalls), "skipped_empty_gold": len(skipped)},
    )


def judgment_accuracy(
    results: Mapping[str, Judgment], gold: Mapping[str, Judgment]
) -> MetricReport:
    """Exact-match three-class accuracy with a confusion matrix."""
    if set(results) != set(gold):
        raise MisalignedIds(
            f"result ids and gold ids differ: {sorted(set(results) ^ set(gold))[:10]}"
        )
    if not gold:
        raise MisalignedIds("no items to score")
    confusion = {g.value: {p.value: 0 for p in Judgment} for g in Judgment}
    correct = 0
    for item_id, gold_judgment in gold.items():
        predicted = results[item_id]
        confusion[gold_judgment.value][predicted.value] += 1
        if predicted is gold_judgment:
            correct += 1
    return MetricReport(
        metrics={"accuracy": correct / len(gold)},
        breakdown={"confusion": confusion},
        metadata={"items": len(gold)},
    )


def propagation_accuracies(
    records: Sequence[dict],
    operator_client=None,
    cfg: AgentConfig | None = None,
) -> MetricReport:
    """Response/score accuracy of propagate_node against a synthetic dataset,
    plus operator accuracy when an extraction client is supplied."""
    response_correct = 0
    score_correct = 0
    operator_correct = 0
    operator_total = 0

    for record in records:
        sub = record["subchecklist"]
        operator = Operator(sub["operator"])
        children = [
            (
                Judgment(a["judgment"]),
                _parse_fraction(a["confidence"]),
            )
            for a in record["leaf_assignments"].values()
        ]
        judgment, confidence = propagate_node(operator, children)
        response_ok = judgment.value == record["oracle_judgment"]
        score_ok = response_ok and confidence == _parse_fraction(record["oracle_confidence"])
        response_correct += response_ok
        score_correct += score_ok

        if operator_client is not None:
            parent = ChecklistNode(
                id=sub["id"],
                text=sub["text"],
                operator=operator,
                children=tuple(
                    ChecklistNode(id=c["id"], text=c["text"]) for c in sub["children"]
                ),
            )
            operator_total += 1
            try:
                extraction = extract_operators(parent, operator_client, cfg or AgentConfig())
                operator_correct += extraction.operator is operator
            except AmbiguousOperator:
                pass

    n = len(records)
    metrics = {
        "response_accuracy": response_correct / n if n else 0.0,
        "score_accuracy": score_correct / n if n else 0.0,
    }
    if operator_client is not None:
        metrics["operator_accuracy"] = operator_correct / operator_total if operator_total else 0.0
    return MetricReport(metrics=metrics, metadata={"records": n})


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def load_annotations(path) -> list[EvidenceAnnotation]:
    """Read line-delimited JSON fixtures: {note_id, leaf_id, gold_judgment, gold_evidence[]}."""
    annotations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            annotations.append(
                EvidenceAnnotation(
                    note_id=obj["note_id"],
                    leaf_id=obj["leaf_id"],
                    gold_judgment=Judgment(obj["gold_judgment"]),
                    gold_evidence=tuple(obj.get("gold_evidence", [])),
                )
            )
    return annotations
