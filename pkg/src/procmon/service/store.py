"""Append-only, line-delimited persistence for service sessions.

One JSONL file per session plus one shared file for uploaded domains. Each
session line is a command record with a monotone `seq`; replaying the file
through the service's apply path rebuilds the session. Desk-scale by
design: no locking across processes, no compaction.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

_ID_RE = re.compile(r"[a-z0-9][a-z0-9-]{0,63}")


class StoreError(ValueError):
    pass


def _check_id(value: str) -> str:
    if not _ID_RE.fullmatch(value):
        raise StoreError(f"malformed id {value!r}")
    return value


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _session_path(self, session_id: str) -> Path:
        return self.root / f"session-{_check_id(session_id)}.jsonl"

    @property
    def _domains_path(self) -> Path:
        return self.root / "domains.jsonl"

    def append(self, session_id: str, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self._session_path(session_id).open("a") as fh:
            fh.write(line + "\n")

    def read(self, session_id: str) -> list[dict]:
        path = self._session_path(session_id)
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines() if line]

    def session_ids(self) -> list[str]:
        ids = []
        for path in sorted(self.root.glob("session-*.jsonl")):
            ids.append(path.stem.removeprefix("session-"))
        return ids

    def append_domain(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self._domains_path.open("a") as fh:
            fh.write(line + "\n")

    def domains(self) -> list[dict]:
        if not self._domains_path.exists():
            return []
        return [
            json.loads(line)
            for line in self._domains_path.read_text().splitlines()
            if line
        ]
