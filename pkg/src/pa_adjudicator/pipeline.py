"""End-to-end adjudication: ingest, retrieve, classify, judge, propagate.

Produces persistent adjudication records, applies reviewer overrides with
incremental re-propagation under optimistic versioning, and exports
overridden leaves as new evaluation fixtures.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import checklist as cl
from .agents import AgentConfig, LeafResult, classify_evidence, judge_leaf
from .checklist import ChecklistNode, Judgment, NecessityDecision
from .clients import make_client
from .ingest import DocumentChunk, chunk_resources, chunk_text
from .propagation import (
    NodeResult,
    fraction_to_str,
    override_leaf,
    propagate_tree,
)
from .retrieval import EvidenceIndex, HashEmbedder, HttpEmbedder
from .store import RecordStore, UnknownRecord

STATUS_COMPLETED = "Completed"
STATUS_NEEDS_REVIEW = "NeedsReview"
STATUS_OVERRIDDEN = "Overridden"
STATUS_FAILED = "Failed"


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class UnknownLeaf(Exception):
    pass


@dataclass
class PipelineConfig:
    k: int = 20
    n_votes: int = 10
    strategy: str = "icl"
    review_threshold: Fraction = Fraction(7, 10)
    client: str = "mock:oracle"
    encoder: str = "test"
    chunking: str = "auto"  # auto | sentence | resource
    include_ancestors: bool = False
    max_retries: int = 2
    max_parallel: int = 1
    seed: int = 0
    oracle_labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.k <= 50:
            raise ValueError("k must be in 1..50")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data or {})
        if "review_threshold" in data:
            data["review_threshold"] = Fraction(str(data["review_threshold"]))
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n_votes": self.n_votes,
            "strategy": self.strategy,
            "review_threshold": fraction_to_str(self.review_threshold),
            "client": self.client,
            "encoder": self.encoder,
            "chunking": self.chunking,
            "include_ancestors": self.include_ancestors,
            "max_retries": self.max_retries,
            "max_parallel": self.max_parallel,
            "seed": self.seed,
        }

    def agent_config(self) -> AgentConfig:
        return AgentConfig(
            n_votes=self.n_votes,
            prompt_strategy={"icl": "icl", "icl-cot": "icl-cot"}[self.strategy],
            max_retries=self.max_retries,
            max_parallel=self.max_parallel,
        )


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _ingest(documents: Sequence[dict], mode: str) -> list[DocumentChunk]:
    chunks: list[DocumentChunk] = []
    for i, doc in enumerate(documents):
        source_id = doc.get("id") or f"doc{i}"
        kind = doc.get("kind", "note")
        if mode == "sentence" or (mode == "auto" and kind == "note"):
            chunks.extend(chunk_text(doc["text"], source_id=source_id))
        elif mode == "resource" or (mode == "auto" and kind == "resources"):
            chunks.extend(chunk_resources(doc["resources"], source_id=source_id))
        else:
            raise ValueError(f"document {source_id!r} has unknown kind {kind!r}")
    return chunks


def _make_embedder(spec: str):
    if spec == "test":
        return HashEmbedder()
    return HttpEmbedder(spec)


def run_adjudication(
    checklist_doc,
    documents: Sequence[dict],
    config: PipelineConfig,
    store: RecordStore,
) -> dict:
    """Run the full pipeline and persist the record before returning it.

    On failure the partial record is persisted with status Failed and the
    failing stage identified, then PipelineError is raised.
    """
    record_id = uuid.uuid4().hex
    record: dict = {
        "id": record_id,
        "created_at": _now(),
        "version": 1,
        "status": STATUS_FAILED,
        "config": config.to_dict(),
        "audit": [],
    }

    def fail(stage: str, exc: Exception) -> PipelineError:
        record["failed_stage"] = stage
        record["error"] = str(exc)
        store.put_new(record)
        return PipelineError(stage, str(exc))

    try:
        root = checklist_doc if isinstance(checklist_doc, ChecklistNode) else cl.parse_checklist(checklist_doc)
        record["checklist"] = cl.to_dict(root)
    except Exception as exc:
        raise fail("checklist", exc) from exc

    try:
        if not documents:
            raise ValueError("document set is empty")
        record["documents_digest"] = hashlib.sha256(
            json.dumps(list(documents), sort_keys=True).encode("utf-8")
        ).hexdigest()
        record["sources"] = {doc.get("id") or f"doc{i}": doc for i, doc in enumerate(documents)}
        chunks = _ingest(documents, config.chunking)
        if not chunks:
            raise ValueError("documents produced no chunks")
        record["chunks"] = {
            c.chunk_id: {"text": c.text, "source_id": c.source_id, "kind": c.kind.value}
            for c in chunks
        }
    except Exception as exc:
        raise fail("ingest", exc) from exc

    try:
        index = EvidenceIndex(chunks, _make_embedder(config.encoder))
    except Exception as exc:
        raise fail("retrieval", exc) from exc

    client = make_client(config.client, oracle_labels=config.oracle_labels, seed=config.seed)
    agent_cfg = config.agent_config()
    chunk_by_id = {c.chunk_id: c for c in chunks}

    leaf_results: dict[str, LeafResult] = {}
    try:
        for leaf in cl.leaves(root):
            query = leaf.text
            if config.include_ancestors:
                query = " ".join(_ancestor_texts(root, leaf.id) + [leaf.text])
            candidates = index.top_k(query, config.k)
            verdicts = classify_evidence(leaf, candidates, client, agent_cfg)
            result = judge_leaf(leaf, candidates, verdicts, client, agent_cfg)
            _verify_provenance(result, chunk_by_id, record["sources"])
            leaf_results[leaf.id] = result
    except Exception as exc:
        raise fail("agents", exc) from exc

    try:
        tree = propagate_tree(
            root, {lid: (r.judgment, r.confidence) for lid, r in leaf_results.items()}
        )
        decision = NecessityDecision.from_judgment(tree.judgment, tree.confidence)
    except Exception as exc:
        raise fail("propagation", exc) from exc

    record["leaf_results"] = {lid: _leaf_result_to_dict(r) for lid, r in leaf_results.items()}
    record["tree"] = _node_result_to_dict(tree)
    record["decision"] = {"y": decision.y, "root_confidence": fraction_to_str(decision.root_confidence)}
    record["hallucinated_citations"] = sum(r.hallucinated_citations for r in leaf_results.values())
    record["status"] = (
        STATUS_NEEDS_REVIEW if tree.confidence < config.review_threshold else STATUS_COMPLETED
    )
    store.put_new(record)
    return record


def _ancestor_texts(root: ChecklistNode, leaf_id: str) -> list[str]:
    path: list[str] = []

    def walk(node: ChecklistNode, trail: list[str]) -> bool:
        if node.id == leaf_id:
            path.extend(trail)
            return True
        return any(walk(child, trail + [node.text]) for child in node.children)

    walk(root, [])
    return path


def _verify_provenance(result: LeafResult, chunk_by_id: dict, sources: dict) -> None:
    """Every surfaced evidence chunk must be an exact substring of its source."""
    for chunk_id in result.evidence:
        chunk = chunk_by_id[chunk_id]
        source = sources.get(chunk.source_id, {})
        if chunk.kind.value == "Sentence" and chunk.text not in source.get("text", ""):
            raise ValueError(
                f"evidence {chunk_id} is not a substring of source {chunk.source_id}"
            )


def _leaf_result_to_dict(result: LeafResult) -> dict:
    return {
        "leaf_id": result.leaf_id,
        "judgment": result.judgment.value,
        "confidence": fraction_to_str(result.confidence),
        "evidence": list(result.evidence),
        "votes": result.votes,
        "runs": result.runs,
        "hallucinated_citations": result.hallucinated_citations,
        "histogram_entropy": result.histogram_entropy,
    }


def _node_result_to_dict(node: NodeResult) -> dict:
    out = {
        "node_id": node.node_id,
        "judgment": node.judgment.value,
        "confidence": fraction_to_str(node.confidence),
    }
    if node.children_results:
        out["children"] = [_node_result_to_dict(c) for c in node.children_results]
    return out


def node_result_from_dict(data: dict) -> NodeResult:
    return NodeResult(
        node_id=data["node_id"],
        judgment=Judgment(data["judgment"]),
        confidence=Fraction(data["confidence"]),
        children_results=tuple(node_result_from_dict(c) for c in data.get("children", [])),
    )


def replay(record: dict) -> bool:
    """Re-propagate stored leaf results; True iff the stored tree/decision match."""
    root = cl.parse_checklist(record["checklist"])
    leaf_results = {
        lid: (Judgment(r["judgment"]), Fraction(r["confidence"]))
        for lid, r in record["leaf_results"].items()
    }
    tree = propagate_tree(root, leaf_results)
    stored = node_result_from_dict(record["tree"])
    decision = NecessityDecision.from_judgment(tree.judgment, tree.confidence)
    return tree == stored and record["decision"] == {
        "y": decision.y,
        "root_confidence": fraction_to_str(decision.root_confidence),
    }


def apply_override(
    store: RecordStore,
    record_id: str,
    leaf_id: str,
    judgment: Judgment,
    reviewer: str,
    note: str = "",
    version: int | None = None,
) -> dict:
    """Replace one leaf's judgment with a reviewer's, then re-propagate.

    The override carries confidence 1 (human assertion is ground truth
    here), preserves the leaf's evidence, appends an audit entry, and
    bumps the record version under an optimistic-concurrency check.
    """
    record = store.get(record_id)
    if version is None:
        version = record["version"]
    if leaf_id not in record.get("leaf_results", {}):
        raise UnknownLeaf(f"record {record_id} has no leaf {leaf_id!r}")

    root = cl.parse_checklist(record["checklist"])
    old_tree = node_result_from_dict(record["tree"])
    old_leaf = record["leaf_results"][leaf_id]
    old_decision = dict(record["decision"])

    new_tree = override_leaf(root, old_tree, leaf_id, judgment, Fraction(1))
    decision = NecessityDecision.from_judgment(new_tree.judgment, new_tree.confidence)

    updated = dict(record)
    leaf_entry = dict(old_leaf)
    leaf_entry.update(
        {
            "judgment": judgment.value,
            "confidence": fraction_to_str(Fraction(1)),
            "reviewer_note": note,
            "overridden_by": reviewer,
        }
    )
    updated["leaf_results"] = dict(record["leaf_results"], **{leaf_id: leaf_entry})
    updated["tree"] = _node_result_to_dict(new_tree)
    updated["decision"] = {
        "y": decision.y,
        "root_confidence": fraction_to_str(decision.root_confidence),
    }
    updated["status"] = STATUS_OVERRIDDEN
    updated["version"] = version + 1

    audit_entry = {
        "timestamp": _now(),
        "record_id": record_id,
        "reviewer": reviewer,
        "leaf_id": leaf_id,
        "old_judgment": old_leaf["judgment"],
        "new_judgment": judgment.value,
        "old_y": old_decision["y"],
        "new_y": decision.y,
        "note": note,
        "version": version + 1,
    }
    updated["audit"] = list(record.get("audit", [])) + [audit_entry]
    store.update(updated, expected_version=version, audit_entry=audit_entry)
    return updated


def export_override_fixtures(store: RecordStore) -> list[dict]:
    """Overridden leaves as evaluation fixtures (the review feedback loop)."""
    fixtures = []
    for record in store.list(status=STATUS_OVERRIDDEN):
        chunk_map = record.get("chunks", {})
        for leaf_id, leaf in record.get("leaf_results", {}).items():
            if "overridden_by" not in leaf:
                continue
            fixtures.append(
                {
                    "note_id": record["id"],
                    "leaf_id": leaf_id,
                    "gold_judgment": leaf["judgment"],
                    "gold_evidence": [
                        chunk_map[cid]["text"] for cid in leaf.get("evidence", []) if cid in chunk_map
                    ],
                }
            )
    return fixtures
