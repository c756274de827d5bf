"""Evidence classification, jury voting, and operator extraction.

The classification agent gives one verdict per candidate chunk; the jury
agent turns classified evidence into a leaf judgment by running n times
and taking the vote. Confidence is the majority fraction (an exact
rational, votes/n). Any tie resolves conservatively to NoInformation —
a split jury signals contradiction, which belongs in human review.

Citations are only ever accepted from the candidate set: unknown chunk
ids are dropped and counted as hallucinations, never surfaced as
evidence.
"""
from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .checklist import ChecklistNode, Judgment, Operator
from .clients import ClientError, CompletionClient
from .prompts import STRATEGY_ICL, STRATEGY_ICL_COT, render
from .retrieval import ScoredChunk

logger = logging.getLogger(__name__)


class FormatError(Exception):
    """The client response did not match the constrained format."""


class AmbiguousOperator(Exception):
    """The model abstained from naming an operator."""


class Verdict(str, Enum):
    SUPPORTING = "Supporting"
    CONTRADICTORY = "Contradictory"
    IRRELEVANT = "Irrelevant"


@dataclass(frozen=True)
class EvidenceVerdict:
    chunk_id: str
    verdict: Verdict


@dataclass(frozen=True)
class LeafResult:
    leaf_id: str
    judgment: Judgment
    confidence: Fraction
    evidence: tuple[str, ...]
    votes: dict
    runs: int
    hallucinated_citations: int = 0
    histogram_entropy: float = 0.0


@dataclass(frozen=True)
class OperatorExtraction:
    operator: Operator
    rationale: str


@dataclass
class AgentConfig:
    n_votes: int = 10
    prompt_strategy: str = STRATEGY_ICL
    sampling: dict = field(default_factory=lambda: {"temperature": 0.7})
    max_retries: int = 2
    max_parallel: int = 1

    def __post_init__(self):
        if self.n_votes < 1:
            raise ValueError("n_votes must be >= 1")
        if self.prompt_strategy not in (STRATEGY_ICL, STRATEGY_ICL_COT):
            raise ValueError(f"unknown prompt strategy {self.prompt_strategy!r}")


def _parse_json_object(text: str) -> dict:
    match = re.search(r"\{.*\}", text, re.DOTALL)
    if not match:
        raise FormatError(f"no JSON object in response: {text[:120]!r}")
    try:
        obj = json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise FormatError(f"unparseable JSON in response: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("response JSON is not an object")
    return obj


def _complete_with_retries(client: CompletionClient, prompt: str, cfg: AgentConfig, parse):
    """Call the client, retrying format failures up to cfg.max_retries."""
    last: FormatError | None = None
    for _ in range(cfg.max_retries + 1):
        text = client.complete(prompt, cfg.sampling)
        try:
            return parse(_parse_json_object(text))
        except FormatError as exc:
            last = exc
    raise last


def classify_evidence(
    leaf: ChecklistNode,
    candidates: Sequence[ScoredChunk],
    client: CompletionClient,
    cfg: AgentConfig,
) -> list[EvidenceVerdict]:
    """One verdict per candidate chunk; format failures degrade to Irrelevant."""
    if not candidates:
        raise ValueError("candidates must be non-empty")

    def classify_one(scored: ScoredChunk) -> EvidenceVerdict:
        chunk = scored.chunk
        prompt = render(
            "classification",
            checklist_item=leaf.text,
            chunks=f"[{chunk.chunk_id}] {chunk.text}",
            strategy=cfg.prompt_strategy,
            payload={
                "task": "classification",
                "leaf_id": leaf.id,
                "checklist_item": leaf.text,
                "chunk": {"chunk_id": chunk.chunk_id, "text": chunk.text},
            },
        )

        def parse(obj: dict) -> Verdict:
            try:
                return Verdict(obj["verdict"])
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad verdict in {obj!r}") from exc

        try:
            verdict = _complete_with_retries(client, prompt, cfg, parse)
        except FormatError as exc:
            logger.warning("unparseable verdict for %s/%s, degrading to Irrelevant: %s",
                           leaf.id, chunk.chunk_id, exc)
            verdict = Verdict.IRRELEVANT
        return EvidenceVerdict(chunk_id=chunk.chunk_id, verdict=verdict)

    return _map_ordered(classify_one, candidates, cfg.max_parallel)


def judge_leaf(
    leaf: ChecklistNode,
    candidates: Sequence[ScoredChunk],
    verdicts: Sequence[EvidenceVerdict],
    client: CompletionClient,
    cfg: AgentConfig,
) -> LeafResult:
    """Run the jury n_votes times and reduce by majority vote.

    Evidence is the union of candidate chunk ids cited by runs that agree
    with the final judgment, in candidate order.
    """
    if len(verdicts) != len(candidates):
        raise ValueError("verdicts must align one-to-one with candidates")
    verdict_by_id = {v.chunk_id: v.verdict for v in verdicts}
    candidate_ids = [s.chunk.chunk_id for s in candidates]
    chunk_lines = "\n".join(
        f"[{s.chunk.chunk_id}] {s.chunk.text}" for s in candidates
    )
    verdict_lines = "\n".join(
        f"[{v.chunk_id}] verdict: {v.verdict.value}" for v in verdicts
    )
    payload_chunks = [
        {
            "chunk_id": s.chunk.chunk_id,
            "text": s.chunk.text,
            "verdict": verdict_by_id[s.chunk.chunk_id].value,
        }
        for s in candidates
    ]

    def run_once(run_index: int) -> tuple[Judgment, list[str]]:
        prompt = render(
            "jury",
            checklist_item=leaf.text,
            chunks=chunk_lines,
            verdicts=verdict_lines,
            strategy=cfg.prompt_strategy,
            payload={
                "task": "jury",
                "leaf_id": leaf.id,
                "checklist_item": leaf.text,
                "chunks": payload_chunks,
                "run": run_index,
            },
        )

        def parse(obj: dict) -> tuple[Judgment, list[str]]:
            try:
                judgment = Judgment(obj["judgment"])
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad judgment in {obj!r}") from exc
            cited = obj.get("evidence", [])
            if not isinstance(cited, list) or not all(isinstance(c, str) for c in cited):
                raise FormatError(f"bad evidence list in {obj!r}")
            return judgment, cited

        try:
            return _complete_with_retries(client, prompt, cfg, parse)
        except FormatError as exc:
            # A jury run without a usable judgment cannot be voted on.
            raise ClientError(f"jury run {run_index} unparseable after retries: {exc}") from exc

    runs = _map_ordered(run_once, range(cfg.n_votes), cfg.max_parallel)

    votes = Counter(judgment for judgment, _ in runs)
    judgment, confidence = reduce_votes(votes, cfg.n_votes)

    cited_union: set[str] = set()
    hallucinated = 0
    for run_judgment, cited in runs:
        for chunk_id in cited:
            if chunk_id not in verdict_by_id:
                hallucinated += 1
                logger.warning("dropping hallucinated citation %r for leaf %s", chunk_id, leaf.id)
            elif run_judgment is judgment:
                cited_union.add(chunk_id)
    evidence = tuple(cid for cid in candidate_ids if cid in cited_union)

    return LeafResult(
        leaf_id=leaf.id,
        judgment=judgment,
        confidence=confidence,
        evidence=evidence,
        votes={j.value: votes.get(j, 0) for j in Judgment},
        runs=cfg.n_votes,
        hallucinated_citations=hallucinated,
        histogram_entropy=_entropy(votes, cfg.n_votes),
    )


def reduce_votes(votes: Counter, n: int) -> tuple[Judgment, Fraction]:
    """Majority reduction: plurality winner; any tie -> NoInformation.

    Confidence is the top vote count over n in both cases.
    """
    top = max(votes.values())
    winners = [j for j, c in votes.items() if c == top]
    judgment = winners[0] if len(winners) == 1 else Judgment.NO_INFORMATION
    return judgment, Fraction(top, n)


def _entropy(votes: Counter, n: int) -> float:
    return -sum((c / n) * math.log2(c / n) for c in votes.values() if c)


def extract_operators(
    parent: ChecklistNode, client: CompletionClient, cfg: AgentConfig
) -> OperatorExtraction:
    """One-time guideline-authoring assist: name the operator joining a
    parent's child statements, or raise AmbiguousOperator on abstention."""
    if not parent.children:
        raise ValueError("operator extraction needs a parent with children")
    child_lines = "\n".join(f"[{c.id}] {c.text}" for c in parent.children)
    prompt = render(
        "operator",
        checklist_item=parent.text,
        chunks=child_lines,
        strategy=cfg.prompt_strategy,
        payload={
            "task": "operator",
            "parent_id": parent.id,
            "parent_text": parent.text,
            "children": [{"id": c.id, "text": c.text} for c in parent.children],
        },
    )

    def parse(obj: dict) -> OperatorExtraction | None:
        if "operator" not in obj:
            raise FormatError(f"no operator field in {obj!r}")
        raw = obj["operator"]
        if raw is None:
            return None
        try:
            operator = Operator(raw)
        except ValueError as exc:
            raise FormatError(f"unknown operator {raw!r}") from exc
        return OperatorExtraction(operator=operator, rationale=str(obj.get("rationale", "")))

    try:
        extraction = _complete_with_retries(client, prompt, cfg, parse)
    except FormatError as exc:
        raise ClientError(f"operator extraction unparseable after retries: {exc}") from exc
    if extraction is None:
        raise AmbiguousOperator(f"model abstained on parent {parent.id!r}")
    return extraction


def _map_ordered(fn, items, max_parallel: int) -> list:
    if max_parallel <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_parallel) as pool:
        return list(pool.map(fn, items))
