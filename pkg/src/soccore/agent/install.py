"""Daemon installation: host-scheduler descriptor files.

Instead of registering with systemd/schtasks directly, startup writes a
descriptor named ``soc_plugin_system`` into a configurable directory with the
launch command a host scheduler would run; delstartup removes it. Both are
idempotent. startup also creates the agent's local state directories.
"""

from __future__ import annotations

from pathlib import Path

from soccore.errors import SocError
from soccore.agent.config import AgentConfig

DESCRIPTOR_NAME = "soc_plugin_system"


class DescriptorWriteFailure(SocError):
    pass


def descriptor_path(config: AgentConfig) -> Path:
    return Path(config.descriptor_dir) / DESCRIPTOR_NAME


def install_daemon(config: AgentConfig, mode: str, config_path: str | None = None) -> Path:
    if mode not in ("startup", "delstartup"):
        raise ValueError(f"mode must be startup or delstartup, got {mode!r}")
    path = descriptor_path(config)
    if mode == "delstartup":
        try:
            path.unlink(missing_ok=True)
        except OSError as exc:
            raise DescriptorWriteFailure(f"cannot remove {path}: {exc}") from exc
        return path

    command = "soc agent run"
    if config_path:
        command += f" --config {config_path}"
    content = (
        f"# launch descriptor for the SOC plugin-system agent daemon\n"
        f"agent_id={config.agent_id}\n"
        f"command={command}\n"
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
        root = config.ossec_path()
        (root / "shared" / "plugins").mkdir(parents=True, exist_ok=True)
        (root / "plugin_download").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DescriptorWriteFailure(f"cannot write {path}: {exc}") from exc
    return path
