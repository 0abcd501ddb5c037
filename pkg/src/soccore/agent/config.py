"""Agent configuration: YAML file plus environment overrides."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from soccore.errors import ConfigError

ENV_PREFIX = "SOC_AGENT_"

_AGENT_ID = re.compile(r"^\d{3}$")


@dataclass
class AgentConfig:
    agent_id: str = "001"
    manager_api: str = "http://127.0.0.1:55002"
    manager_ingest: str = "127.0.0.1:1514"
    ossec_dir: str = "soc-agent-data"
    poll_interval: float = 3.0
    interpreter: str = "python3"
    hostname: str = ""
    username: str = ""
    tailed_files: list[dict] = field(default_factory=list)
    fim_watches: list[str] = field(default_factory=list)
    descriptor_dir: str = "soc-daemons"
    ship_buffer: int = 10000
    run_timeout_factor: float = 0.9

    def validate(self) -> None:
        if not _AGENT_ID.match(self.agent_id):
            raise ConfigError(f"agent_id must be 3 decimal digits, got {self.agent_id!r}")
        if self.poll_interval < 1:
            raise ConfigError("poll_interval must be >= 1 second")
        for entry in self.tailed_files:
            if not isinstance(entry, dict) or "path" not in entry:
                raise ConfigError(f"tailed_files entries need a path, got {entry!r}")

    def ossec_path(self) -> Path:
        return Path(self.ossec_dir)

    def ingest_endpoint(self) -> tuple[str, int]:
        host, _, port = self.manager_ingest.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"manager_ingest must be host:port, got {self.manager_ingest!r}")
        return host, int(port)


_FLOAT_FIELDS = {"poll_interval", "run_timeout_factor"}
_INT_FIELDS = {"ship_buffer"}


def load_agent_config(path: str | None = None, env: dict | None = None) -> AgentConfig:
    env = os.environ if env is None else env
    data: dict = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad config file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must be a mapping")

    config = AgentConfig()
    for name in AgentConfig.__dataclass_fields__:
        if name in data:
            setattr(config, name, data[name])
        env_name = ENV_PREFIX + name.upper()
        if env_name in env:
            raw = env[env_name]
            if name in _FLOAT_FIELDS:
                setattr(config, name, float(raw))
            elif name in _INT_FIELDS:
                setattr(config, name, int(raw))
            elif name == "fim_watches":
                setattr(config, name, [t for t in raw.split(",") if t])
            else:
                setattr(config, name, raw)

    unknown = set(data) - set(AgentConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    config.validate()
    return config
