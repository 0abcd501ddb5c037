"""File reputation client: hash lookups against a scan backend.

The backend is configured by URL. ``mock:<path>`` serves verdicts from a
JSON fixture mapping sha256 -> {positives, total, permalink}; anything else
is treated as an HTTP service queried as GET <url>/<hash>.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from soccore.errors import SocError


class BackendUnavailable(SocError):
    pass


@dataclass
class Verdict:
    positives: int
    total: int
    permalink: str

    def to_record(self) -> dict:
        return {
            "positives": self.positives,
            "total": self.total,
            "permalink": self.permalink,
        }


class MockReputationBackend:
    """Fixture-driven verdicts; unknown hashes scan clean."""

    def __init__(self, fixture: dict | str | Path, default_total: int = 70):
        if not isinstance(fixture, dict):
            try:
                fixture = json.loads(Path(fixture).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise BackendUnavailable(f"cannot load reputation fixture: {exc}") from exc
        self.fixture = fixture
        self.default_total = default_total

    def scan(self, sha256: str) -> Verdict:
        entry = self.fixture.get(sha256, {})
        return Verdict(
            positives=int(entry.get("positives", 0)),
            total=int(entry.get("total", self.default_total)),
            permalink=entry.get("permalink", f"https://reputation.invalid/file/{sha256}"),
        )


class HttpReputationBackend:
    def __init__(self, base_url: str, api_key: str = "", timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout

    def scan(self, sha256: str) -> Verdict:
        import requests

        headers = {"x-apikey": self.api_key} if self.api_key else {}
        try:
            response = requests.get(
                f"{self.base_url}/{sha256}", headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:
            raise BackendUnavailable(f"reputation backend error: {exc}") from exc
        try:
            return Verdict(
                positives=int(payload["positives"]),
                total=int(payload["total"]),
                permalink=str(payload.get("permalink", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"malformed backend response: {exc}") from exc


def backend_from_config(backend: str, api_key: str = ""):
    """None when unconfigured; mock or HTTP backend otherwise."""
    if not backend:
        return None
    if backend.startswith("mock:"):
        return MockReputationBackend(backend[len("mock:"):])
    return HttpReputationBackend(backend, api_key)
