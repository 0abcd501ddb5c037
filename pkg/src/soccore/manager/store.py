"""Alert persistence: append-only JSONL journal with an in-memory index."""

from __future__ import annotations

import json
import threading
from datetime import datetime
from pathlib import Path

from soccore.errors import SocError
from soccore.engine.alerts import Alert


class BadFilter(SocError):
    pass


class AlertStore:
    """Single-writer journal; queries serve newest-first stable pages."""

    def __init__(self, journal_path: str | Path):
        self.path = Path(journal_path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: list[dict] = []
        self._next_id = 1
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    self._records.append(record)
                    self._next_id = max(self._next_id, int(record.get("id", 0)) + 1)
        self._fh = self.path.open("a", encoding="utf-8")

    def append(self, alert: Alert) -> Alert:
        with self._lock:
            alert.id = self._next_id
            self._next_id += 1
            record = alert.to_record()
            self._records.append(record)
            self._fh.write(json.dumps(record) + "\n")
            self._fh.flush()
        return alert

    def __len__(self) -> int:
        return len(self._records)

    def get(self, alert_id: int) -> dict | None:
        for record in self._records:
            if record.get("id") == alert_id:
                return record
        return None

    def query(
        self,
        min_level: int | None = None,
        max_level: int | None = None,
        agent: str | None = None,
        since: str | None = None,
        until: str | None = None,
        limit: int = 50,
        offset: int = 0,
    ) -> dict:
        if limit < 0 or offset < 0:
            raise BadFilter("limit and offset must be non-negative")
        for bound in (min_level, max_level):
            if bound is not None and not 0 <= bound <= 15:
                raise BadFilter(f"level bound {bound} outside 0..15")

        def parse_time(label: str, value: str) -> datetime:
            try:
                return datetime.fromisoformat(value)
            except ValueError as exc:
                raise BadFilter(f"bad {label} timestamp: {value!r}") from exc

        since_dt = parse_time("since", since) if since else None
        until_dt = parse_time("until", until) if until else None

        with self._lock:
            selected = []
            for record in self._records:
                level = record.get("rule.level", 0)
                if min_level is not None and level < min_level:
                    continue
                if max_level is not None and level > max_level:
                    continue
                if agent is not None and record.get("agent.id") != agent:
                    continue
                if since_dt or until_dt:
                    stamp = datetime.fromisoformat(record["timestamp"])
                    if since_dt and stamp < since_dt:
                        continue
                    if until_dt and stamp > until_dt:
                        continue
                selected.append(record)
        selected.sort(key=lambda r: r.get("id", 0), reverse=True)
        page = selected[offset : offset + limit] if limit else selected[offset:]
        return {
            "alerts": page,
            "total": len(selected),
            "offset": offset,
            "limit": limit,
        }

    def close(self) -> None:
        with self._lock:
            self._fh.close()
