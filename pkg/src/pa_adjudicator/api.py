"""REST surface of the adjudication service.

POST /adjudications              -> 202 {"id": ...} (pipeline runs inline)
GET  /adjudications/{id}         -> full record
GET  /adjudications?status=...   -> record summaries
POST /adjudications/{id}/overrides -> updated record (409 on stale version)
GET  /adjudications/{id}/evidence/{leaf_id} -> evidence chunks with sources
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .checklist import ChecklistError, Judgment
from .pipeline import (
    PipelineConfig,
    PipelineError,
    UnknownLeaf,
    apply_override,
    run_adjudication,
)
from .store import ConcurrentOverrideConflict, RecordStore, UnknownRecord


class ChecklistNodeModel(BaseModel):
    id: str
    text: str
    operator: Optional[str] = None
    children: Optional[list["ChecklistNodeModel"]] = None

    def to_plain(self) -> dict:
        out: dict = {"id": self.id, "text": self.text}
        if self.operator is not None:
            out["operator"] = self.operator
        if self.children:
            out["children"] = [c.to_plain() for c in self.children]
        return out


class DocumentModel(BaseModel):
    id: str
    kind: str = "note"
    text: Optional[str] = None
    resources: Optional[list[dict]] = None

    def to_plain(self) -> dict:
        out: dict = {"id": self.id, "kind": self.kind}
        if self.text is not None:
            out["text"] = self.text
        if self.resources is not None:
            out["resources"] = self.resources
        return out


class ConfigModel(BaseModel):
    k: int = 20
    n_votes: int = 10
    strategy: str = "icl"
    review_threshold: float | str = 0.7
    client: str = "mock:oracle"
    encoder: str = "test"
    chunking: str = "auto"
    include_ancestors: bool = False
    max_retries: int = 2
    max_parallel: int = 1
    seed: int = 0
    oracle_labels: dict = Field(default_factory=dict)


class AdjudicationCreate(BaseModel):
    checklist: ChecklistNodeModel
    documents: list[DocumentModel]
    config: ConfigModel = Field(default_factory=ConfigModel)


class CreatedResponse(BaseModel):
    id: str
    status: str


class OverrideRequest(BaseModel):
    leaf_id: str
    judgment: str
    reviewer: str
    note: str = ""
    version: int


class RecordSummary(BaseModel):
    id: str
    status: str
    created_at: str
    version: int
    y: Optional[int] = None
    root_confidence: Optional[str] = None


def _summary(record: dict) -> RecordSummary:
    decision = record.get("decision") or {}
    return RecordSummary(
        id=record["id"],
        status=record["status"],
        created_at=record["created_at"],
        version=record["version"],
        y=decision.get("y"),
        root_confidence=decision.get("root_confidence"),
    )


def create_app(store: RecordStore) -> FastAPI:
    app = FastAPI(title="pa-adjudicator", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.post("/adjudications", status_code=202, response_model=CreatedResponse)
    def create_adjudication(body: AdjudicationCreate):
        try:
            config = PipelineConfig.from_dict(body.config.model_dump())
        except (ValueError, TypeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            record = run_adjudication(
                body.checklist.to_plain(),
                [d.to_plain() for d in body.documents],
                config,
                store,
            )
        except PipelineError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ChecklistError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return CreatedResponse(id=record["id"], status=record["status"])

    @app.get("/adjudications")
    def list_adjudications(status: Optional[str] = Query(default=None)):
        summaries = [_summary(r) for r in store.list(status=status)]
        summaries.sort(key=lambda s: (_confidence_key(s.root_confidence), s.id))
        return summaries

    @app.get("/adjudications/{record_id}")
    def get_adjudication(record_id: str):
        try:
            return store.get(record_id)
        except UnknownRecord as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/adjudications/{record_id}/overrides")
    def post_override(record_id: str, body: OverrideRequest):
        try:
            judgment = Judgment(body.judgment)
        except ValueError:
            raise HTTPException(status_code=422, detail=f"unknown judgment {body.judgment!r}")
        try:
            return apply_override(
                store,
                record_id,
                body.leaf_id,
                judgment,
                reviewer=body.reviewer,
                note=body.note,
                version=body.version,
            )
        except UnknownRecord as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except UnknownLeaf as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ConcurrentOverrideConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    @app.get("/adjudications/{record_id}/evidence/{leaf_id}")
    def get_evidence(record_id: str, leaf_id: str):
        try:
            record = store.get(record_id)
        except UnknownRecord as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        leaf = record.get("leaf_results", {}).get(leaf_id)
        if leaf is None:
            raise HTTPException(status_code=404, detail=f"no leaf {leaf_id!r}")
        chunks = record.get("chunks", {})
        sources = record.get("sources", {})
        evidence = []
        for chunk_id in leaf.get("evidence", []):
            chunk = chunks.get(chunk_id, {})
            source = sources.get(chunk.get("source_id"), {})
            evidence.append(
                {
                    "chunk_id": chunk_id,
                    "text": chunk.get("text", ""),
                    "source_id": chunk.get("source_id"),
                    "kind": chunk.get("kind"),
                    "source_text": source.get("text", ""),
                }
            )
        return {
            "leaf_id": leaf_id,
            "judgment": leaf["judgment"],
            "confidence": leaf["confidence"],
            "evidence": evidence,
        }

    return app


def _confidence_key(value: Optional[str]) -> Fraction:
    # Queue is triaged lowest-confidence first; records without a decision sink last.
    if value is None:
        return Fraction(2)
    return Fraction(value)
