"""Decompose patient records into evidence chunks.

Free-text notes are split into sentences; structured record bundles are
flattened one chunk per resource. Both paths are deterministic: identical
input yields byte-identical chunk lists, and every sentence chunk is an
exact substring of its source note (this underwrites evidence provenance
downstream).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class IngestError(Exception):
    pass


class EmptyInput(IngestError):
    pass


class MalformedResource(IngestError):
    pass


class ChunkKind(str, Enum):
    SENTENCE = "Sentence"
    RESOURCE = "Resource"


@dataclass(frozen=True)
class DocumentChunk:
    chunk_id: str
    source_id: str
    text: str
    kind: ChunkKind


# Fixed guard list: a '.' terminating one of these tokens never ends a sentence.
ABBREVIATIONS = ("dr.", "mr.", "ms.", "e.g.", "i.e.", "vs.", "mg.", "hx.")

_TERMINATORS = ".!?"


def chunk_text(note: str, source_id: str = "note") -> list[DocumentChunk]:
    """Split a free-text note into ordered sentence chunks.

    Boundaries are '.', '?', '!' followed by whitespace (with an
    abbreviation guard) and newlines, so section headers like
    "Chief Complaint:" become chunks of their own.
    """
    if not note or not note.strip():
        raise EmptyInput("note is empty")

    pieces: list[str] = []
    start = 0
    for i, ch in enumerate(note):
        if ch == "\n":
            pieces.append(note[start:i])
            start = i + 1
        elif ch in _TERMINATORS:
            nxt = note[i + 1] if i + 1 < len(note) else " "
            if not nxt.isspace():
                continue  # decimal points, "3.5", mid-token punctuation
            if ch == "." and _ends_with_abbreviation(note, i):
                continue
            pieces.append(note[start : i + 1])
            start = i + 1
    pieces.append(note[start:])

    chunks = []
    for piece in pieces:
        text = piece.strip()
        if not text:
            continue
        chunks.append(
            DocumentChunk(
                chunk_id=f"{source_id}:s{len(chunks):04d}",
                source_id=source_id,
                text=text,
                kind=ChunkKind.SENTENCE,
            )
        )
    return chunks


def _ends_with_abbreviation(note: str, dot_index: int) -> bool:
    j = dot_index
    while j > 0 and not note[j - 1].isspace():
        j -= 1
    token = note[j : dot_index + 1].lower()
    return token in ABBREVIATIONS


def chunk_resources(bundle: list, source_id: str = "bundle") -> list[DocumentChunk]:
    """One chunk per resource; text is a sorted-key 'key: value' flattening."""
    if not isinstance(bundle, list):
        raise MalformedResource("bundle must be a list of resource objects")
    chunks = []
    for i, resource in enumerate(bundle):
        if not isinstance(resource, dict) or not resource:
            raise MalformedResource(f"resource {i} is not a non-empty object")
        lines = []
        for key in sorted(resource):
            value = resource[key]
            if isinstance(value, (dict, list)):
                raise MalformedResource(f"resource {i} field {key!r} is not flat")
            lines.append(f"{key}: {value}")
        chunks.append(
            DocumentChunk(
                chunk_id=f"{source_id}:r{i:04d}",
                source_id=source_id,
                text="\n".join(lines),
                kind=ChunkKind.RESOURCE,
            )
        )
    return chunks
