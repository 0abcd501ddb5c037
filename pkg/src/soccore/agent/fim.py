"""File integrity monitoring: content-hash baselines over watched trees."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)


@dataclass
class FimEvent:
    action: str  # added | modified | deleted
    path: str
    sha256: str | None

    def message(self) -> str:
        if self.action == "deleted":
            return f"File '{self.path}' deleted"
        return f"File '{self.path}' {self.action} sha256={self.sha256}"


def hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


class FimWatcher:
    """Polling watcher; the first scan establishes the baseline silently."""

    def __init__(self, watch_paths: list[str]):
        self.watch_paths = [Path(p) for p in watch_paths]
        self._baseline: dict[str, str] = {}
        self._primed = False

    def _scan(self) -> dict[str, str]:
        snapshot: dict[str, str] = {}
        for root in self.watch_paths:
            if not root.exists():
                continue
            candidates = [root] if root.is_file() else sorted(root.rglob("*"))
            for path in candidates:
                if not path.is_file():
                    continue
                try:
                    snapshot[str(path)] = hash_file(path)
                except OSError as exc:
                    log.warning("cannot hash %s: %s", path, exc)
        return snapshot

    def poll(self) -> list[FimEvent]:
        snapshot = self._scan()
        if not self._primed:
            self._baseline = snapshot
            self._primed = True
            return []
        events: list[FimEvent] = []
        for path, digest in snapshot.items():
            old = self._baseline.get(path)
            if old is None:
                events.append(FimEvent("added", path, digest))
            elif old != digest:
                events.append(FimEvent("modified", path, digest))
        for path in self._baseline:
            if path not in snapshot:
                events.append(FimEvent("deleted", path, None))
        self._baseline = snapshot
        return events
