"""Deployment questionnaire: turns answers into topology file text.

The interactive front end (CLI) collects counts per role and per-entry
connection details; this module validates the answers and renders the
topology lines. Integration answers (ticket webhook, reputation key) ride
along as ``#``-prefixed directive lines the deployer understands.

Desk scale: at most one server of each kind; cluster topologies are out of
scope and the questionnaire says so when asked for more.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from soccore.errors import SocError
from soccore.autoconfig.topology import (
    AGENT_TYPES,
    NETWORK_TYPES,
    TopologyEntry,
    format_topology,
)


class EmptyTopology(SocError):
    pass


class InvalidAnswer(SocError):
    def __init__(self, fieldname: str, reason: str):
        super().__init__(f"{fieldname}: {reason}")
        self.field = fieldname


@dataclass
class HostAnswer:
    ip: str
    key_path: str
    ssh_user: str


@dataclass
class FormatterAnswers:
    elastic: HostAnswer | None = None
    kibana: HostAnswer | None = None
    wazuh: HostAnswer | None = None
    #: (device_type, host) pairs for linux/windows agents and cisco/juniper devices
    devices: list[tuple[str, HostAnswer]] = field(default_factory=list)
    ticket_webhook: str = ""
    reputation_key: str = ""
    agents_only: bool = False


def _entry(device_type: str, host: HostAnswer) -> TopologyEntry:
    for name, value in (("ip", host.ip), ("key_path", host.key_path), ("ssh_user", host.ssh_user)):
        if not value or not value.strip():
            raise InvalidAnswer(name, "must not be empty")
    return TopologyEntry(host.ip.strip(), host.key_path.strip(), device_type, host.ssh_user.strip())


def formatter(answers: FormatterAnswers) -> str:
    """Render the topology text for the answered questionnaire."""
    entries: list[TopologyEntry] = []
    if not answers.agents_only:
        for role in ("elastic", "kibana", "wazuh"):
            host = getattr(answers, role)
            if host is not None:
                entries.append(_entry(role, host))
    for device_type, host in answers.devices:
        if device_type not in AGENT_TYPES + NETWORK_TYPES:
            raise InvalidAnswer("device_type", f"{device_type!r} is not an agent/device role")
        entries.append(_entry(device_type, host))
    if not entries:
        raise EmptyTopology("the questionnaire produced no topology entries")

    directives = ""
    if answers.ticket_webhook:
        directives += f"# ticket_webhook={answers.ticket_webhook}\n"
    if answers.reputation_key:
        directives += f"# reputation_key={answers.reputation_key}\n"
    return directives + format_topology(entries)


def parse_directives(text: str) -> dict:
    """Read the optional integration directives back out of a topology file."""
    integrations: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line.startswith("#"):
            continue
        body = line.lstrip("#").strip()
        if "=" in body:
            key, value = body.split("=", 1)
            if key.strip() in ("ticket_webhook", "reputation_key"):
                integrations[key.strip()] = value.strip()
    return integrations


def strip_directives(text: str) -> str:
    return "".join(
        line + "\n"
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    )
