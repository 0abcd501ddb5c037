"""Plugin archive (zip) layout, validation, deterministic packing, template.

A plugin archive holds at most five members with fixed names:

    metadata.json
    script.py
    decoders.xml
    rules.xml
    active-response/script.py

A MINIMAL archive (what agents download) carries exactly the first two; a
FULL archive carries all five. Anything else is rejected.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass

from soccore.errors import SocError
from soccore.pluginpkg.metadata import PluginMetadata, parse_metadata

MEMBER_METADATA = "metadata.json"
MEMBER_SCRIPT = "script.py"
MEMBER_DECODERS = "decoders.xml"
MEMBER_RULES = "rules.xml"
MEMBER_AR_SCRIPT = "active-response/script.py"

CANONICAL_MEMBERS = (
    MEMBER_METADATA,
    MEMBER_SCRIPT,
    MEMBER_DECODERS,
    MEMBER_RULES,
    MEMBER_AR_SCRIPT,
)
MANDATORY_MEMBERS = (MEMBER_METADATA, MEMBER_SCRIPT)
OPTIONAL_MEMBERS = (MEMBER_DECODERS, MEMBER_RULES, MEMBER_AR_SCRIPT)

# fixed timestamp so identical content packs to identical bytes
_EPOCH = (1980, 1, 1, 0, 0, 0)


class CorruptArchive(SocError):
    """Not a readable zip, or the member layout is not a plugin package."""


class MissingMember(SocError):
    def __init__(self, name: str):
        super().__init__(f"archive is missing member {name!r}")
        self.member = name


class NotFull(SocError):
    """A full export was requested of a package without the server-side members."""


class DecoderDocError(SocError):
    """decoders.xml failed to parse; carries the underlying parser error."""


class RuleDocError(SocError):
    """rules.xml failed to parse; carries the underlying parser error."""


@dataclass
class PluginPackage:
    metadata: PluginMetadata
    metadata_text: str
    script: str
    decoders_doc: str | None = None
    rules_doc: str | None = None
    active_response_script: str | None = None

    @property
    def is_full(self) -> bool:
        return (
            self.decoders_doc is not None
            and self.rules_doc is not None
            and self.active_response_script is not None
        )

    @property
    def size_class(self) -> str:
        return "full" if self.is_full else "minimal"

    def with_metadata(self, meta: PluginMetadata) -> "PluginPackage":
        """Replace the metadata; the stored text is re-serialized canonically."""
        return PluginPackage(
            metadata=meta,
            metadata_text=meta.to_json_text(),
            script=self.script,
            decoders_doc=self.decoders_doc,
            rules_doc=self.rules_doc,
            active_response_script=self.active_response_script,
        )


def validate_package(archive: bytes) -> PluginPackage:
    """Validate an archive byte stream and return the package it contains."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(archive))
    except (zipfile.BadZipFile, ValueError) as exc:
        raise CorruptArchive(f"not a readable zip archive: {exc}") from exc

    with zf:
        names = [n for n in zf.namelist() if not n.endswith("/")]
        for name in names:
            if name not in CANONICAL_MEMBERS:
                raise CorruptArchive(f"unexpected member {name!r}")
        if len(names) != len(set(names)):
            raise CorruptArchive("duplicate members in archive")
        for required in MANDATORY_MEMBERS:
            if required not in names:
                raise MissingMember(required)
        present_optional = [m for m in OPTIONAL_MEMBERS if m in names]
        if present_optional and len(present_optional) != len(OPTIONAL_MEMBERS):
            # server-side members travel together: a package is FULL or MINIMAL
            absent = next(m for m in OPTIONAL_MEMBERS if m not in names)
            raise MissingMember(absent)

        def read_text(name: str) -> str:
            try:
                return zf.read(name).decode("utf-8")
            except UnicodeDecodeError as exc:
                raise CorruptArchive(f"member {name!r} is not UTF-8 text") from exc

        metadata_text = read_text(MEMBER_METADATA)
        metadata = parse_metadata(metadata_text)
        package = PluginPackage(
            metadata=metadata,
            metadata_text=metadata_text,
            script=read_text(MEMBER_SCRIPT),
        )
        if present_optional:
            package.decoders_doc = read_text(MEMBER_DECODERS)
            package.rules_doc = read_text(MEMBER_RULES)
            package.active_response_script = read_text(MEMBER_AR_SCRIPT)
            _check_documents(package)
    return package


def _check_documents(package: PluginPackage) -> None:
    # imported here to keep the archive layer usable without the engine
    from soccore.engine import decoders as dec_mod
    from soccore.engine import rules as rule_mod

    try:
        dec_mod.parse_decoders(package.decoders_doc or "")
    except SocError as exc:
        raise DecoderDocError(str(exc)) from exc
    try:
        rule_mod.parse_rules(package.rules_doc or "")
    except SocError as exc:
        raise RuleDocError(str(exc)) from exc


def pack(package: PluginPackage, size: str = "full") -> bytes:
    """Produce a deterministic archive: fixed member order and timestamps."""
    if size not in ("full", "minimal"):
        raise ValueError(f"size must be 'full' or 'minimal', got {size!r}")
    if size == "full" and not package.is_full:
        raise NotFull("cannot produce a full export of a minimal package")

    members: list[tuple[str, str]] = [
        (MEMBER_METADATA, package.metadata_text),
        (MEMBER_SCRIPT, package.script),
    ]
    if size == "full":
        members += [
            (MEMBER_DECODERS, package.decoders_doc or ""),
            (MEMBER_RULES, package.rules_doc or ""),
            (MEMBER_AR_SCRIPT, package.active_response_script or ""),
        ]

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, text in members:
            info = zipfile.ZipInfo(name, date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, text.encode("utf-8"))
    return buf.getvalue()


def package_from_dir(path) -> PluginPackage:
    """Load a package from an unpacked directory using the canonical names."""
    import pathlib

    root = pathlib.Path(path)
    meta_file = root / MEMBER_METADATA
    script_file = root / MEMBER_SCRIPT
    if not meta_file.is_file():
        raise MissingMember(MEMBER_METADATA)
    if not script_file.is_file():
        raise MissingMember(MEMBER_SCRIPT)

    metadata_text = meta_file.read_text(encoding="utf-8")
    package = PluginPackage(
        metadata=parse_metadata(metadata_text),
        metadata_text=metadata_text,
        script=script_file.read_text(encoding="utf-8"),
    )
    optional = [root / name for name in OPTIONAL_MEMBERS]
    present = [p for p in optional if p.is_file()]
    if present:
        if len(present) != len(optional):
            absent = next(p for p in optional if not p.is_file())
            raise MissingMember(str(absent.relative_to(root)))
        package.decoders_doc = optional[0].read_text(encoding="utf-8")
        package.rules_doc = optional[1].read_text(encoding="utf-8")
        package.active_response_script = optional[2].read_text(encoding="utf-8")
        _check_documents(package)
    return package


def write_package_dir(package: PluginPackage, path) -> None:
    """Materialize the canonical file structure under ``path``."""
    import pathlib

    root = pathlib.Path(path)
    root.mkdir(parents=True, exist_ok=True)
    (root / MEMBER_METADATA).write_text(package.metadata_text, encoding="utf-8")
    (root / MEMBER_SCRIPT).write_text(package.script, encoding="utf-8")
    if package.is_full:
        (root / MEMBER_DECODERS).write_text(package.decoders_doc, encoding="utf-8")
        (root / MEMBER_RULES).write_text(package.rules_doc, encoding="utf-8")
        ar = root / MEMBER_AR_SCRIPT
        ar.parent.mkdir(exist_ok=True)
        ar.write_text(package.active_response_script, encoding="utf-8")


TEMPLATE_METADATA = """\
{ "id": "0bab811d-dc33-45b8-970b-e15ef64cb12d",
  "name": "Plugin Name",
  "description": "Plugin Description",
  "version": "0.0.1",
  "enabled": false,
  "script": {"interval": 60},
  "agents": ["001", "002"]
}
"""

TEMPLATE_DECODERS = """\
<decoder name="DecoderNameForThePlugin">
<prematch>\\.*SOC_NES: (\\.+)</prematch>
</decoder>
<decoder name="DecoderNameForThePlugin">
<parent>DecoderNameForThePlugin</parent>
<regex>(TheNameOfThePlugin): (Value_1) (Value_2) (Value_3)</regex>
<order>pluginName, val1, val2, val3</order>
</decoder>
"""

# the rule id/level carry working example values so the template validates
TEMPLATE_RULES = """\
<rule id="100001" level="10">
<decoded_as>DecoderNameForThePlugin</decoded_as>
<description>TheNameOfThePlugin has been triggered</description>
<field name="pluginName">TheNameOfThePlugin</field>
<field name="val1">The Value Of val1 variable</field>
<field name="val2">The Value Of val2 variable</field>
<field name="val3">The Value Of val3 variable</field>
<group>TheNameOfThePlugin</group>
</rule>
"""

TEMPLATE_SCRIPT = '''\
#!/usr/bin/env python3
"""Detection script skeleton.

Runs on the agent every metadata interval. Report findings on stdout:

    LOG: <message shipped to the manager and fed to the decoders>
    ARY: <arg1> <arg2> ...   requests the manager-side response script
    ARN: <reserved>

Any other output line is ignored by the agent daemon.
"""


def main() -> None:
    # detection / health-check logic goes here, e.g.:
    # print("LOG: TheNameOfThePlugin: value1 value2 value3")
    pass


if __name__ == "__main__":
    main()
'''

TEMPLATE_AR_SCRIPT = '''\
#!/usr/bin/env python3
"""Manager-side countermeasure, invoked with the arguments the agent sent."""

import sys


def main(args: list) -> None:
    # countermeasure logic (firewall rules, quarantine, notification, ...)
    print("active response invoked with:", " ".join(args))


if __name__ == "__main__":
    main(sys.argv[1:])
'''


def make_template() -> bytes:
    """A FULL archive engineers download as the starting point for a plugin."""
    package = PluginPackage(
        metadata=parse_metadata(TEMPLATE_METADATA),
        metadata_text=TEMPLATE_METADATA,
        script=TEMPLATE_SCRIPT,
        decoders_doc=TEMPLATE_DECODERS,
        rules_doc=TEMPLATE_RULES,
        active_response_script=TEMPLATE_AR_SCRIPT,
    )
    return pack(package, "full")
