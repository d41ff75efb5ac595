"""Append-only JSON-lines event store backing the auth service tables.

The log is the service's durable database: every table mutation is one
JSON object per line, replayed at startup to rebuild in-memory state.
It is not a diagnostic log; key material appears here (hex) and nowhere
else on disk.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Iterator


class EventLog:
    def __init__(self, path: str | Path | None) -> None:
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)

    @property
    def path(self) -> Path | None:
        return self._path

    def append(self, kind: str, **data: Any) -> None:
        if self._path is None:
            return
        line = json.dumps({"kind": kind, **data}, sort_keys=True, separators=(",", ":"))
        with self._lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def replay(self) -> Iterator[dict[str, Any]]:
        if self._path is None or not self._path.exists():
            return
        with self._path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)
