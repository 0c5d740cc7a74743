"""Append-only annotation storage.

One JSON Lines file, one record per submitted annotation, never rewritten.
Re-annotating a response appends a new record; readers resolve the history
by taking the last record per (query_id, group, annotator_id).  Appends
fsync before the caller is told the write succeeded, so an acknowledged
annotation survives a crash; a torn final line from a mid-write crash is
tolerated on read and overwritten by the next append.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator

from .errors import DuplicateSubmission, MalformedRecord
from .evaluation import AnnotationRecord


class AnnotationStore:
    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._tokens: set[str] = set()
        self._torn_tail = False
        if self.path.is_file():
            for _ in self._iter_records():  # validates the file and collects tokens
                pass

    def _iter_records(self) -> Iterator[AnnotationRecord]:
        """Yield records in file order; malformed rows fail except a torn tail."""
        self._torn_tail = False
        if not self.path.is_file():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
        for line_number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            is_last = line_number == len(lines)
            try:
                obj = json.loads(line)
                record = AnnotationRecord.from_obj(obj, line_number)
            except (json.JSONDecodeError, MalformedRecord):
                if is_last and not line.endswith("\n"):
                    # interrupted append: the record was never acknowledged
                    self._torn_tail = True
                    return
                raise
            if record.submission_token is not None:
                self._tokens.add(record.submission_token)
            yield record

    def append(self, record: AnnotationRecord) -> None:
        """Durably append one record; duplicate submission tokens are rejected."""
        with self._lock:
            if record.submission_token is not None:
                if record.submission_token in self._tokens:
                    raise DuplicateSubmission(record.submission_token)
                self._tokens.add(record.submission_token)
            line = json.dumps(record.to_obj(), ensure_ascii=False, sort_keys=True) + "\n"
            mode = "r+b" if self._torn_tail and self.path.is_file() else "ab"
            with open(self.path, mode) as fh:
                if mode == "r+b":
                    # truncate the torn tail before writing over it
                    content = fh.read()
                    cut = content.rfind(b"\n") + 1
                    fh.seek(cut)
                    fh.truncate()
                    self._torn_tail = False
                fh.write(line.encode("utf-8"))
                fh.flush()
                os.fsync(fh.fileno())

    def all_records(self) -> list[AnnotationRecord]:
        """Every stored record in append order, including superseded ones."""
        with self._lock:
            return list(self._iter_records())

    def effective_records(self) -> list[AnnotationRecord]:
        """Latest record per (query_id, group, annotator_id), in first-seen order."""
        latest: dict[tuple[str, str, str], AnnotationRecord] = {}
        for record in self.all_records():
            latest[(record.query_id, record.group, record.annotator_id)] = record
        return list(latest.values())

    def records_for_group(self, group: str) -> list[AnnotationRecord]:
        return [r for r in self.effective_records() if r.group == group]

    def groups(self) -> list[str]:
        return sorted({r.group for r in self.effective_records()})
