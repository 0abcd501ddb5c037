"""Immutable engine snapshot: the decoder/rule set live at a point in time.

The manager swaps the active snapshot atomically when plugins are enabled or
disabled; evaluations in flight keep using the snapshot they started with.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from soccore.engine.alerts import Alert, alert_for
from soccore.engine.decoders import Decoder, decode, parse_decoders
from soccore.engine.rules import Rule, check_rule_references, match_rules, parse_rules
from soccore.engine.syslog import LogEvent


@dataclass(frozen=True)
class EngineSnapshot:
    decoders: tuple[Decoder, ...] = ()
    rules: tuple[Rule, ...] = ()
    version: int = 0

    @classmethod
    def from_documents(
        cls, decoder_doc: str, rule_doc: str, version: int = 0, strict: bool = True
    ) -> "EngineSnapshot":
        decoders = parse_decoders(decoder_doc)
        rules = parse_rules(rule_doc)
        if strict:
            check_rule_references(rules, decoders)
        return cls(decoders=tuple(decoders), rules=tuple(rules), version=version)

    def evaluate(self, event: LogEvent) -> "Evaluation":
        decoded = decode(event, list(self.decoders))
        if decoded is None:
            return Evaluation(decoded=None, rule=None, alert=None)
        rule = match_rules(decoded, list(self.rules))
        alert = alert_for(event, decoded, rule) if rule else None
        return Evaluation(decoded=decoded, rule=rule, alert=alert)


@dataclass
class Evaluation:
    decoded: object
    rule: Rule | None
    alert: Alert | None = field(default=None)
