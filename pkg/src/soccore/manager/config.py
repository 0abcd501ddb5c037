"""Manager configuration: YAML file with environment-variable overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from soccore.errors import ConfigError

ENV_PREFIX = "SOC_MGR_"


@dataclass
class ManagerConfig:
    api_host: str = "127.0.0.1"
    api_port: int = 55002
    ingest_host: str = "127.0.0.1"
    ingest_port: int = 1514
    data_root: str = "soc-manager-data"
    agents: list[str] = field(default_factory=list)
    ticket_webhook_url: str = ""
    ticket_threshold: int = 5
    auto_ticket_level: int = 15
    reputation_backend: str = ""
    reputation_api_key: str = ""
    ar_interpreter: str = "python3"
    ar_timeout: float = 30.0
    activity_window: float = 10.0
    # optional TLS for the API; plaintext is fine at desk scale
    tls_certfile: str = ""
    tls_keyfile: str = ""

    def data_path(self) -> Path:
        return Path(self.data_root)


_INT_FIELDS = {"api_port", "ingest_port", "ticket_threshold", "auto_ticket_level"}
_FLOAT_FIELDS = {"ar_timeout", "activity_window"}
_LIST_FIELDS = {"agents"}


def load_manager_config(path: str | None = None, env: dict | None = None) -> ManagerConfig:
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

    config = ManagerConfig()
    for name in ManagerConfig.__dataclass_fields__:
        if name in data:
            setattr(config, name, data[name])
        env_name = ENV_PREFIX + name.upper()
        if env_name in env:
            raw = env[env_name]
            if name in _INT_FIELDS:
                setattr(config, name, int(raw))
            elif name in _FLOAT_FIELDS:
                setattr(config, name, float(raw))
            elif name in _LIST_FIELDS:
                setattr(config, name, [t.strip() for t in raw.split(",") if t.strip()])
            else:
                setattr(config, name, raw)

    unknown = set(data) - set(ManagerConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return config
