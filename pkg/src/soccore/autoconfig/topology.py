"""Topology file: the colon-space-delimited deployment inventory.

One entry per line:

    IP: SSH Key Path: Device Type: SSH User

The delimiter is the two-character sequence ": " so absolute key paths parse;
a field containing the delimiter itself cannot be represented and is rejected
when formatting.
"""

from __future__ import annotations

from dataclasses import dataclass

from soccore.errors import SocError

DEVICE_TYPES = ("linux", "windows", "cisco", "juniper", "elastic", "kibana", "wazuh")
AGENT_TYPES = ("linux", "windows")
NETWORK_TYPES = ("cisco", "juniper")
SERVER_TYPES = ("elastic", "kibana", "wazuh")

DELIMITER = ": "


class BadLine(SocError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


class UnknownDeviceType(SocError):
    def __init__(self, token: str):
        super().__init__(
            f"unknown device type {token!r}; expected one of {', '.join(DEVICE_TYPES)}"
        )
        self.token = token


@dataclass(frozen=True)
class TopologyEntry:
    ip: str
    key_path: str
    device_type: str
    ssh_user: str

    def to_line(self) -> str:
        fields = (self.ip, self.key_path, self.device_type, self.ssh_user)
        for value in fields:
            if not value:
                raise BadLine(0, "topology fields must be nonempty")
            if DELIMITER in value:
                raise BadLine(0, f"field {value!r} contains the ': ' delimiter")
        return DELIMITER.join(fields)


def parse_topology(text: str) -> list[TopologyEntry]:
    entries: list[TopologyEntry] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(DELIMITER)]
        if len(fields) != 4:
            raise BadLine(line_no, f"expected 4 ': '-separated fields, got {len(fields)}")
        ip, key_path, device_type, ssh_user = fields
        if not all(fields):
            raise BadLine(line_no, "empty field")
        if device_type not in DEVICE_TYPES:
            raise UnknownDeviceType(device_type)
        entries.append(TopologyEntry(ip, key_path, device_type, ssh_user))
    return entries


def format_topology(entries: list[TopologyEntry]) -> str:
    return "".join(entry.to_line() + "\n" for entry in entries)
