"""Syslog-style log line parsing and formatting.

Wire format for agent-shipped lines:

    MON DAY HH:MM:SS HOSTNAME USERNAME: MESSAGE

with single-space separators (a double space before single-digit days is
accepted on input). The year is not on the wire and is assumed to be the
ingest year.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from soccore.errors import SocError

SOURCE_PLUGIN = "plugin_shipper"
SOURCE_TAIL = "tailed_file"
SOURCE_FIM = "fim"
SOURCE_EXTERNAL = "external"

_MONTHS = (
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
)
_MONTH_INDEX = {name: i + 1 for i, name in enumerate(_MONTHS)}

_LINE_RE = re.compile(
    r"^([A-Z][a-z]{2}) {1,2}(\d{1,2}) (\d{2}):(\d{2}):(\d{2}) (\S+) ([^:\s]+): (.*)$"
)


class UnparsableLine(SocError):
    """The line does not match the syslog wire format."""


@dataclass
class LogEvent:
    timestamp: datetime
    hostname: str
    username: str
    message: str
    raw: str
    agent_id: str
    source: str = SOURCE_EXTERNAL
    parsed: bool = field(default=True)


def _utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


def parse_syslog_line(
    line: str, agent_id: str, now: datetime | None = None, source: str = SOURCE_EXTERNAL
) -> LogEvent:
    """Split a wire-format line into a LogEvent; raises UnparsableLine."""
    match = _LINE_RE.match(line)
    if not match:
        raise UnparsableLine(f"not syslog format: {line!r}")
    mon, day, hh, mm, ss, hostname, username, message = match.groups()
    if mon not in _MONTH_INDEX:
        raise UnparsableLine(f"unknown month name: {mon!r}")
    year = (now or _utc_now()).year
    try:
        timestamp = datetime(
            year, _MONTH_INDEX[mon], int(day), int(hh), int(mm), int(ss)
        )
    except ValueError as exc:
        raise UnparsableLine(f"invalid calendar time in line: {exc}") from exc
    return LogEvent(
        timestamp=timestamp,
        hostname=hostname,
        username=username,
        message=message,
        raw=line,
        agent_id=agent_id,
        source=source,
    )


def unparsed_event(
    line: str, agent_id: str, now: datetime | None = None, source: str = SOURCE_EXTERNAL
) -> LogEvent:
    """Wrap a malformed line so it still flows through the decoders."""
    return LogEvent(
        timestamp=now or _utc_now(),
        hostname="",
        username="",
        message=line,
        raw=line,
        agent_id=agent_id,
        source=source,
        parsed=False,
    )


def format_syslog_line(
    timestamp: datetime, hostname: str, username: str, message: str
) -> str:
    """Render the wire format. Host/user tokens must be space/colon free."""
    for label, token in (("hostname", hostname), ("username", username)):
        if not token or re.search(r"[\s]", token) or (label == "username" and ":" in token):
            raise ValueError(f"{label} {token!r} is not a valid syslog token")
    stamp = f"{_MONTHS[timestamp.month - 1]} {timestamp.day} {timestamp:%H:%M:%S}"
    return f"{stamp} {hostname} {username}: {message}"


def sanitize_token(token: str, fallback: str = "-") -> str:
    """Make an arbitrary string usable as a hostname/username token."""
    cleaned = re.sub(r"[\s:]+", "_", token.strip())
    return cleaned or fallback
