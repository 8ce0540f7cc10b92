"""Append-only line-delimited JSON persistence for results and questionnaires.

Appends are serialized by a lock (single-writer contract); each record is
one line, flushed and fsynced so concurrent submitters cannot interleave
partial lines. Reads return records in file order.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Iterator

from .errors import ConflictError, TimbrespaceError


class RecordLog:
    """One append-only JSONL file with duplicate-key rejection."""

    def __init__(self, path: str | Path, key_fields: tuple[str, ...]):
        self.path = Path(path)
        self.key_fields = key_fields
        self._lock = threading.Lock()
        self._keys = set()
        if self.path.exists():
            for record in self._iter_records():
                self._keys.add(self._key(record))
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def _key(self, record: dict):
        return tuple(record.get(f) for f in self.key_fields)

    def _iter_records(self) -> Iterator[dict]:
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def append(self, record: dict) -> None:
        key = self._key(record)
        with self._lock:
            if key in self._keys:
                raise ConflictError(f"duplicate record for key {key}")
            line = json.dumps(record, sort_keys=True, separators=(",", ":"))
            try:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise TimbrespaceError(f"cannot persist record: {exc}") from exc
            self._keys.add(key)

    def records(self, **filters) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        for record in self._iter_records():
            if all(record.get(k) == v for k, v in filters.items()):
                out.append(record)
        return out

    def __len__(self) -> int:
        return len(self._keys)


class ResultStore:
    """Task results, questionnaire responses, and the participant registry."""

    def __init__(self, directory: str | Path):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.directory = directory
        self.results = RecordLog(directory / "results.jsonl",
                                 ("task_id", "participant_id", "attempt"))
        self.questionnaires = RecordLog(directory / "questionnaires.jsonl",
                                        ("questionnaire", "participant_id", "pass"))
        self.participants = RecordLog(directory / "participants.jsonl",
                                      ("participant_id",))
        self._registry_lock = threading.Lock()
        self._participant_index = {r["participant_id"]: r["index"]
                                   for r in self.participants.records()}

    def register_participant(self, participant_id: str) -> int:
        """Idempotent registration; returns the participant's stable index."""
        with self._registry_lock:
            if participant_id in self._participant_index:
                return self._participant_index[participant_id]
            index = len(self._participant_index)
            self.participants.append({"participant_id": participant_id, "index": index})
            self._participant_index[participant_id] = index
            return index

    def export_results(self) -> str:
        if not self.results.path.exists():
            return ""
        return self.results.path.read_text(encoding="utf-8")
