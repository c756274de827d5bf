"""Durable record store with optimistic versioning and an audit log.

Records are JSON documents keyed by id, one file per record, plus a
write-ahead append log for audit entries (the audit entry is written
before the record file is replaced). Writers take a process-local lock
and check the caller's version token; readers get lock-free snapshots.
"""
from __future__ import annotations

import json
import os
import threading
from pathlib import Path


class StoreError(Exception):
    pass


class UnknownRecord(StoreError):
    pass


class ConcurrentOverrideConflict(StoreError):
    """The record changed since the caller read its version token."""


class RecordStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.records_dir = self.root / "records"
        self.records_dir.mkdir(parents=True, exist_ok=True)
        self.audit_path = self.root / "audit.log"
        self._lock = threading.Lock()

    def _path(self, record_id: str) -> Path:
        if not record_id or "/" in record_id or record_id.startswith("."):
            raise UnknownRecord(f"invalid record id {record_id!r}")
        return self.records_dir / f"{record_id}.json"

    def put_new(self, record: dict) -> None:
        with self._lock:
            self._write(record)

    def get(self, record_id: str) -> dict:
        path = self._path(record_id)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise UnknownRecord(f"no record {record_id!r}") from None

    def list(self, status: str | None = None) -> list[dict]:
        records = []
        for path in sorted(self.records_dir.glob("*.json")):
            record = json.loads(path.read_text(encoding="utf-8"))
            if status is None or record.get("status") == status:
                records.append(record)
        return records

    def update(self, record: dict, expected_version: int, audit_entry: dict | None = None) -> None:
        """Replace a record iff its stored version equals expected_version.

        The caller passes the already-bumped record (version + 1); the
        audit entry, when given, is appended to the write-ahead log first.
        """
        with self._lock:
            current = self.get(record["id"])
            if current.get("version") != expected_version:
                raise ConcurrentOverrideConflict(
                    f"record {record['id']} is at version {current.get('version')}, "
                    f"caller expected {expected_version}"
                )
            if audit_entry is not None:
                self.append_audit(audit_entry)
            self._write(record)

    def append_audit(self, entry: dict) -> None:
        with open(self.audit_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def audit_entries(self) -> list[dict]:
        if not self.audit_path.exists():
            return []
        with open(self.audit_path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def _write(self, record: dict) -> None:
        path = self._path(record["id"])
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(record, sort_keys=True, indent=1), encoding="utf-8")
        tmp.replace(path)
