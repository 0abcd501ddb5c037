"""Log analysis engine: syslog parsing, decoder chains, rule matching."""

from soccore.engine.patterns import PatternError, UnsupportedToken, pattern_translate
from soccore.engine.syslog import (
    LogEvent,
    UnparsableLine,
    format_syslog_line,
    parse_syslog_line,
    unparsed_event,
)
from soccore.engine.decoders import (
    DecodedEvent,
    Decoder,
    MalformedDocument,
    OrderArityMismatch,
    UnknownParent,
    decode,
    parse_decoders,
)
from soccore.engine.rules import (
    DuplicateRuleId,
    LevelOutOfRange,
    Rule,
    RuleReferenceError,
    check_rule_references,
    match_rules,
    parse_rules,
)
from soccore.engine.alerts import Alert, alert_for
from soccore.engine.snapshot import EngineSnapshot

__all__ = [
    "Alert",
    "DecodedEvent",
    "Decoder",
    "DuplicateRuleId",
    "EngineSnapshot",
    "LevelOutOfRange",
    "LogEvent",
    "MalformedDocument",
    "OrderArityMismatch",
    "PatternError",
    "Rule",
    "RuleReferenceError",
    "UnknownParent",
    "UnparsableLine",
    "UnsupportedToken",
    "alert_for",
    "check_rule_references",
    "decode",
    "format_syslog_line",
    "match_rules",
    "parse_decoders",
    "parse_rules",
    "parse_syslog_line",
    "pattern_translate",
    "unparsed_event",
]
