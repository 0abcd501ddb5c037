"""Alert values emitted by the rule engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

from soccore.engine.decoders import DecodedEvent
from soccore.engine.rules import Rule
from soccore.engine.syslog import LogEvent


@dataclass
class Alert:
    rule_id: int
    level: int
    description: str
    fields: dict[str, str]
    agent_id: str
    timestamp: datetime
    group: str
    decoder_name: str
    full_log: str
    #: sequence number assigned when the alert is persisted
    id: int = field(default=0)

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "timestamp": self.timestamp.isoformat(),
            "agent.id": self.agent_id,
            "rule.id": self.rule_id,
            "rule.level": self.level,
            "rule.description": self.description,
            "rule.group": self.group,
            "decoder.name": self.decoder_name,
            "full_log": self.full_log,
        }
        for name, value in self.fields.items():
            record[f"data.{name}"] = value
        return record


def alert_for(event: LogEvent, decoded: DecodedEvent, rule: Rule) -> Alert:
    """Bind a matched rule to the event it fired on."""
    return Alert(
        rule_id=rule.id,
        level=rule.level,
        description=rule.description,
        fields=dict(decoded.fields),
        agent_id=event.agent_id,
        timestamp=event.timestamp,
        group=rule.group,
        decoder_name=decoded.decoder_name,
        full_log=event.raw,
    )
