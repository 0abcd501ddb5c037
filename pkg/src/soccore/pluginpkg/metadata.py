"""Plugin metadata: the metadata.json document describing one plugin.

The document shape is fixed by the exchange format:

    { "id": "...", "name": "...", "description": "...", "version": "0.0.1",
      "enabled": false, "script": {"interval": 60}, "agents": ["001", "002"] }

Unknown fields are preserved so packages produced by newer tooling survive a
round trip through this implementation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from soccore.errors import SocError


class MetadataError(SocError):
    """Base for metadata document failures."""


class MalformedDocument(MetadataError):
    """The document is not syntactically valid."""


class SchemaViolation(MetadataError):
    """A required field is missing or has the wrong type."""

    def __init__(self, field_name: str, detail: str):
        super().__init__(f"{field_name}: {detail}")
        self.field_name = field_name


class InvariantViolation(MetadataError):
    """A field is present and well-typed but violates a value constraint."""


class BadVersion(SocError):
    """A version string does not match the dotted-integer grammar."""


_HEX32 = re.compile(r"^[0-9a-f]{32}$")
_VERSION = re.compile(r"^\d+(\.\d+)*$")
_AGENT_ID = re.compile(r"^\d{3}$")


def normalize_plugin_id(raw: str) -> str:
    """Canonical plugin id: dashes stripped, lowercased, 32 hex chars."""
    norm = raw.replace("-", "").lower()
    if not _HEX32.match(norm):
        raise InvariantViolation(f"plugin id {raw!r} is not 32 hex characters")
    return norm


def is_valid_version(text: str) -> bool:
    return bool(_VERSION.match(text))


def version_components(text: str) -> list[int]:
    if not is_valid_version(text):
        raise BadVersion(f"bad version string: {text!r}")
    return [int(part) for part in text.split(".")]


def compare_versions(a: str, b: str) -> int:
    """Componentwise numeric comparison; the shorter version is zero-padded.

    Returns -1, 0 or 1 for a<b, a==b, a>b.
    """
    ca, cb = version_components(a), version_components(b)
    width = max(len(ca), len(cb))
    ca += [0] * (width - len(ca))
    cb += [0] * (width - len(cb))
    return (ca > cb) - (ca < cb)


@dataclass
class PluginMetadata:
    id: str
    name: str
    description: str
    version: str
    enabled: bool
    script_interval: int
    agents: list[str]
    #: unknown top-level fields, kept for round-tripping
    extra: dict = field(default_factory=dict)
    #: unknown fields inside the "script" object
    script_extra: dict = field(default_factory=dict)

    @property
    def norm_id(self) -> str:
        return normalize_plugin_id(self.id)

    def validate(self) -> None:
        normalize_plugin_id(self.id)
        if not is_valid_version(self.version):
            raise InvariantViolation(f"bad version string: {self.version!r}")
        if self.script_interval < 1:
            raise InvariantViolation(
                f"script interval must be >= 1, got {self.script_interval}"
            )
        for agent in self.agents:
            if not _AGENT_ID.match(agent):
                raise InvariantViolation(f"bad agent id: {agent!r}")

    def replace(self, **changes) -> "PluginMetadata":
        data = {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "version": self.version,
            "enabled": self.enabled,
            "script_interval": self.script_interval,
            "agents": list(self.agents),
            "extra": dict(self.extra),
            "script_extra": dict(self.script_extra),
        }
        data.update(changes)
        meta = PluginMetadata(**data)
        meta.validate()
        return meta

    def to_json_text(self) -> str:
        doc = {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "version": self.version,
            "enabled": self.enabled,
            "script": {"interval": self.script_interval, **self.script_extra},
            "agents": list(self.agents),
        }
        doc.update(self.extra)
        return json.dumps(doc, indent=2) + "\n"


_KNOWN_FIELDS = ("id", "name", "description", "version", "enabled", "script", "agents")


def _require(obj: dict, name: str, types, type_label: str):
    if name not in obj:
        raise SchemaViolation(name, "missing required field")
    value = obj[name]
    if not isinstance(value, types) or isinstance(value, bool) != (types is bool):
        raise SchemaViolation(name, f"expected {type_label}")
    return value


def parse_metadata(text: str) -> PluginMetadata:
    """Parse and validate a metadata.json document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"metadata is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedDocument("metadata document must be a JSON object")

    plugin_id = _require(obj, "id", str, "string")
    name = _require(obj, "name", str, "string")
    description = _require(obj, "description", str, "string")
    version = _require(obj, "version", str, "string")
    enabled = _require(obj, "enabled", bool, "boolean")
    script = _require(obj, "script", dict, "object")
    agents = _require(obj, "agents", list, "array")

    if "interval" not in script:
        raise SchemaViolation("script.interval", "missing required field")
    interval = script["interval"]
    if isinstance(interval, bool) or not isinstance(interval, int):
        raise SchemaViolation("script.interval", "expected integer")
    for entry in agents:
        if not isinstance(entry, str):
            raise SchemaViolation("agents", "expected array of strings")

    # ordered set: keep first occurrence of each agent id
    seen: dict[str, None] = {}
    for entry in agents:
        seen.setdefault(entry)

    meta = PluginMetadata(
        id=plugin_id,
        name=name,
        description=description,
        version=version,
        enabled=enabled,
        script_interval=interval,
        agents=list(seen),
        extra={k: v for k, v in obj.items() if k not in _KNOWN_FIELDS},
        script_extra={k: v for k, v in script.items() if k != "interval"},
    )
    meta.validate()
    return meta
