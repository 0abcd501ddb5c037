"""Plugin package format: metadata, archive layout, pack/unpack, templates."""

from soccore.pluginpkg.metadata import (
    BadVersion,
    InvariantViolation,
    MalformedDocument,
    MetadataError,
    PluginMetadata,
    SchemaViolation,
    compare_versions,
    normalize_plugin_id,
    parse_metadata,
)
from soccore.pluginpkg.archive import (
    CANONICAL_MEMBERS,
    CorruptArchive,
    DecoderDocError,
    MissingMember,
    NotFull,
    PluginPackage,
    RuleDocError,
    make_template,
    pack,
    package_from_dir,
    validate_package,
    write_package_dir,
)

__all__ = [
    "BadVersion",
    "CANONICAL_MEMBERS",
    "CorruptArchive",
    "DecoderDocError",
    "InvariantViolation",
    "MalformedDocument",
    "MetadataError",
    "MissingMember",
    "NotFull",
    "PluginMetadata",
    "PluginPackage",
    "RuleDocError",
    "SchemaViolation",
    "compare_versions",
    "make_template",
    "normalize_plugin_id",
    "pack",
    "package_from_dir",
    "parse_metadata",
    "validate_package",
    "write_package_dir",
]
