"""Rule documents and first-match rule evaluation.

Rules are evaluated in document order against a decoded event; the first rule
whose decoded_as equals the decoder name and whose field matchers all hold
wins. Matcher values are dialect patterns matched against the whole decoded
value, so plain strings behave as exact equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from soccore.errors import SocError
from soccore.engine.decoders import (
    DecodedEvent,
    Decoder,
    MalformedDocument,
    _element_text,
    _parse_xmlish,
)
from soccore.engine.patterns import compile_pattern

LEVEL_MIN, LEVEL_MAX = 0, 15


class DuplicateRuleId(SocError):
    def __init__(self, rule_id: int):
        super().__init__(f"rule id {rule_id} appears more than once")
        self.rule_id = rule_id


class LevelOutOfRange(SocError):
    def __init__(self, level: str):
        super().__init__(f"rule level {level} outside {LEVEL_MIN}..{LEVEL_MAX}")


class RuleReferenceError(SocError):
    """A rule references a decoder or field the decoder set cannot produce."""


@dataclass
class FieldMatcher:
    name: str
    pattern: str

    def matches(self, value: str) -> bool:
        return compile_pattern(self.pattern).fullmatch(value) is not None


@dataclass
class Rule:
    id: int
    level: int
    decoded_as: str
    description: str
    matchers: list[FieldMatcher] = field(default_factory=list)
    group: str = ""

    def satisfied_by(self, decoded: DecodedEvent) -> bool:
        if decoded.decoder_name != self.decoded_as:
            return False
        for matcher in self.matchers:
            value = decoded.fields.get(matcher.name)
            if value is None or not matcher.matches(value):
                return False
        return True


def parse_rules(doc: str) -> list[Rule]:
    """Parse a rule document into Rule values in document order."""
    if not doc.strip():
        return []
    rules: list[Rule] = []
    seen_ids: set[int] = set()
    for elem in _parse_xmlish(doc, "rule"):
        raw_id = elem.get("id")
        raw_level = elem.get("level")
        if raw_id is None or raw_level is None:
            raise MalformedDocument("<rule> requires id and level attributes")
        try:
            rule_id = int(raw_id)
        except ValueError as exc:
            raise MalformedDocument(f"rule id {raw_id!r} is not an integer") from exc
        if rule_id <= 0:
            raise MalformedDocument(f"rule id must be positive, got {rule_id}")
        try:
            level = int(raw_level)
        except ValueError as exc:
            raise LevelOutOfRange(raw_level) from exc
        if not LEVEL_MIN <= level <= LEVEL_MAX:
            raise LevelOutOfRange(raw_level)
        if rule_id in seen_ids:
            raise DuplicateRuleId(rule_id)
        seen_ids.add(rule_id)

        decoded_as = None
        description = None
        group = ""
        matchers: list[FieldMatcher] = []
        for child in elem:
            if child.tag == "decoded_as":
                decoded_as = _element_text(child)
            elif child.tag == "description":
                description = _element_text(child)
            elif child.tag == "group":
                group = _element_text(child)
            elif child.tag == "field":
                fname = child.get("name")
                if not fname:
                    raise MalformedDocument(f"rule {rule_id}: <field> without a name")
                pattern = _element_text(child)
                compile_pattern(pattern)  # reject bad dialect at parse time
                matchers.append(FieldMatcher(fname, pattern))
            else:
                raise MalformedDocument(
                    f"unexpected element <{child.tag}> in rule {rule_id}"
                )
        if decoded_as is None:
            raise MalformedDocument(f"rule {rule_id} has no decoded_as")
        if description is None:
            raise MalformedDocument(f"rule {rule_id} has no description")
        rules.append(
            Rule(
                id=rule_id,
                level=level,
                decoded_as=decoded_as,
                description=description,
                matchers=matchers,
                group=group,
            )
        )
    return rules


def match_rules(decoded: DecodedEvent, rules: list[Rule]) -> Rule | None:
    """First rule in document order satisfied by the decoded event."""
    for rule in rules:
        if rule.satisfied_by(decoded):
            return rule
    return None


def producible_fields(decoders: list[Decoder]) -> dict[str, set[str]]:
    """Field names each decoder name can bind, by union over same-named decoders."""
    out: dict[str, set[str]] = {}
    for dec in decoders:
        out.setdefault(dec.name, set()).update(dec.order)
    return out


def check_rule_references(rules: list[Rule], decoders: list[Decoder]) -> None:
    """Reject rules that can never fire against the given decoder set."""
    fields_by_name = producible_fields(decoders)
    for rule in rules:
        if rule.decoded_as not in fields_by_name:
            raise RuleReferenceError(
                f"rule {rule.id}: decoded_as {rule.decoded_as!r} names no known decoder"
            )
        available = fields_by_name[rule.decoded_as]
        for matcher in rule.matchers:
            if matcher.name not in available:
                raise RuleReferenceError(
                    f"rule {rule.id}: field {matcher.name!r} is not produced "
                    f"by decoder {rule.decoded_as!r}"
                )
