"""Decoder documents and the two-level decode chain.

A decoder document is a flat sequence of <decoder> elements. A root decoder
(no <parent>) carries a <prematch>; decoders naming a root as <parent> carry
a <regex> whose capture groups are bound to the field names in <order>.

Decoding: the first root whose prematch matches the message wins. Its
children are tried in document order against the decode tail — the prematch's
first capture when it has one, otherwise the text after the prematch match.
The first child regex that matches binds the fields; if none does, the event
is decoded as the bare root with no fields.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from soccore.errors import SocError
from soccore.engine.patterns import compile_pattern
from soccore.engine.syslog import LogEvent


class MalformedDocument(SocError):
    """The document is not parseable as a decoder/rule definition."""


class UnknownParent(SocError):
    def __init__(self, name: str):
        super().__init__(f"parent decoder {name!r} is not defined earlier in the document")
        self.parent = name


class OrderArityMismatch(SocError):
    def __init__(self, decoder: str, expected: int, got: int):
        super().__init__(
            f"decoder {decoder!r}: order lists {got} fields "
            f"but the regex has {expected} capture groups"
        )
        self.decoder = decoder
        self.expected = expected
        self.got = got


@dataclass
class Decoder:
    name: str
    prematch: str | None = None
    parent: str | None = None
    regex: str | None = None
    order: list[str] = field(default_factory=list)

    @property
    def is_root(self) -> bool:
        return self.parent is None

    def prematch_re(self) -> re.Pattern:
        return compile_pattern(self.prematch)

    def regex_re(self) -> re.Pattern:
        return compile_pattern(self.regex)


@dataclass
class DecodedEvent:
    decoder_name: str
    fields: dict[str, str]


def _element_text(elem: ET.Element) -> str:
    # patterns printed across several lines collapse to a single-line pattern
    text = (elem.text or "").strip()
    return re.sub(r"\s*\n\s*", " ", text)


def _parse_xmlish(doc: str, expected_tag: str) -> list[ET.Element]:
    """Parse a rootless sequence of elements, as the document dialect uses."""
    try:
        wrapper = ET.fromstring(f"<__doc__>{doc}</__doc__>")
    except ET.ParseError as exc:
        raise MalformedDocument(f"document is not well-formed: {exc}") from exc
    if (wrapper.text or "").strip():
        raise MalformedDocument("stray text outside elements")
    for elem in wrapper:
        if elem.tag != expected_tag:
            raise MalformedDocument(f"unexpected element <{elem.tag}>")
        if (elem.tail or "").strip():
            raise MalformedDocument("stray text outside elements")
    return list(wrapper)


def parse_decoders(doc: str) -> list[Decoder]:
    """Parse a decoder document into Decoder values in document order."""
    if not doc.strip():
        return []
    decoders: list[Decoder] = []
    for elem in _parse_xmlish(doc, "decoder"):
        name = elem.get("name")
        if not name:
            raise MalformedDocument("<decoder> without a name attribute")
        dec = Decoder(name=name)
        for child in elem:
            if child.tag == "prematch":
                dec.prematch = _element_text(child)
            elif child.tag == "parent":
                dec.parent = _element_text(child)
            elif child.tag == "regex":
                dec.regex = _element_text(child)
            elif child.tag == "order":
                dec.order = [t.strip() for t in _element_text(child).split(",") if t.strip()]
            else:
                raise MalformedDocument(f"unexpected element <{child.tag}> in decoder {name!r}")

        if dec.parent is not None:
            if dec.parent not in {d.name for d in decoders}:
                raise UnknownParent(dec.parent)
            if dec.regex is None:
                raise MalformedDocument(f"child decoder {name!r} has no regex")
            if dec.prematch is not None:
                raise MalformedDocument(f"child decoder {name!r} must not carry a prematch")
        else:
            if dec.prematch is None:
                raise MalformedDocument(f"root decoder {name!r} has no prematch")
            if dec.regex is not None:
                raise MalformedDocument(f"root decoder {name!r} must not carry a regex")

        # compile now so bad patterns fail at parse time, not at decode time
        if dec.prematch is not None:
            dec.prematch_re()
        if dec.regex is not None:
            compiled = dec.regex_re()
            if dec.order and len(dec.order) != compiled.groups:
                raise OrderArityMismatch(name, compiled.groups, len(dec.order))
        decoders.append(dec)
    return decoders


def decode(event: LogEvent, decoders: list[Decoder]) -> DecodedEvent | None:
    """Run the decoder chain over an event; None means no root prematched."""
    return decode_text(event.message, decoders)


def decode_text(message: str, decoders: list[Decoder]) -> DecodedEvent | None:
    for root in decoders:
        if not root.is_root:
            continue
        match = root.prematch_re().search(message)
        if not match:
            continue
        tail = match.group(1) if match.re.groups else message[match.end():]
        for child in decoders:
            if child.parent != root.name:
                continue
            cmatch = child.regex_re().search(tail)
            if cmatch:
                fields = dict(zip(child.order, cmatch.groups()))
                return DecodedEvent(decoder_name=child.name, fields=fields)
        return DecodedEvent(decoder_name=root.name, fields={})
    return None
