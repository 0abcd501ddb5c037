"""Independent brute-force re-evaluation of ingested lines.

The harness replays every line the manager journaled through this evaluator
and requires the engine's observed alerts to match. Decoding and matching are
re-implemented here as plain exhaustive loops: every rule is evaluated
independently against the decoded fields and the first satisfied one (in
document order) wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from soccore.engine.decoders import Decoder
from soccore.engine.patterns import compile_pattern
from soccore.engine.rules import Rule
from soccore.engine.snapshot import EngineSnapshot
from soccore.engine.syslog import UnparsableLine, parse_syslog_line


@dataclass
class PredictedAlert:
    level: int
    description: str
    agent_id: str
    rule_id: int


def brute_force_decode(message: str, decoders: list[Decoder]):
    """(decoder name, fields) or None, by exhaustive trial in document order."""
    roots = [d for d in decoders if d.parent is None]
    for root in roots:
        match = compile_pattern(root.prematch).search(message)
        if match is None:
            continue
        tail = match.group(1) if match.re.groups else message[match.end():]
        children = [d for d in decoders if d.parent == root.name]
        for child in children:
            cmatch = compile_pattern(child.regex).search(tail)
            if cmatch is not None:
                return child.name, dict(zip(child.order, cmatch.groups()))
        return root.name, {}
    return None


def brute_force_match(decoder_name: str, fields: dict, rules: list[Rule]):
    """Evaluate every rule independently; return the first satisfied one."""
    satisfied = []
    for index, rule in enumerate(rules):
        if rule.decoded_as != decoder_name:
            continue
        hit = True
        for matcher in rule.matchers:
            value = fields.get(matcher.name)
            if value is None or compile_pattern(matcher.pattern).fullmatch(value) is None:
                hit = False
                break
        if hit:
            satisfied.append((index, rule))
    if not satisfied:
        return None
    return min(satisfied)[1]


def predict_alert(
    line: str, agent_id: str, snapshot: EngineSnapshot
) -> PredictedAlert | None:
    try:
        event = parse_syslog_line(line, agent_id)
        message = event.message
    except UnparsableLine:
        message = line
    decoded = brute_force_decode(message, list(snapshot.decoders))
    if decoded is None:
        return None
    name, fields = decoded
    rule = brute_force_match(name, fields, list(snapshot.rules))
    if rule is None or rule.level == 0:
        return None
    return PredictedAlert(
        level=rule.level,
        description=rule.description,
        agent_id=agent_id,
        rule_id=rule.id,
    )
