"""Plugin registry: on-disk plugin store, composite decoder/rule documents,
per-agent flag files, and the enable/disable state machine.

On-disk layout under the data root:

    plugins/<id>/...                        canonical package files
    etc/decoders/local_decoder.xml          enabled plugins' decoder fragments
    etc/rules/local_rules.xml               enabled plugins' rule fragments
    etc/shared/default/plugins/<agent>.json per-agent flag files
    active-response/plugins/<id>.py         installed response scripts

Fragments are appended between comment markers carrying the plugin id, so
disabling removes exactly what enabling added.
"""

from __future__ import annotations

import json
import logging
import re
import shutil
from pathlib import Path

from soccore.errors import SocError
from soccore.engine.snapshot import EngineSnapshot
from soccore.pluginpkg import (
    PluginMetadata,
    PluginPackage,
    package_from_dir,
    write_package_dir,
)

log = logging.getLogger(__name__)

_AGENT_ID = re.compile(r"^\d{3}$")


class UnknownPlugin(SocError):
    def __init__(self, plugin_id: str):
        super().__init__(f"no plugin with id {plugin_id!r}")
        self.plugin_id = plugin_id


class DuplicatePlugin(SocError):
    def __init__(self, plugin_id: str):
        super().__init__(f"plugin {plugin_id!r} is already registered")
        self.plugin_id = plugin_id


class IdMismatch(SocError):
    pass


class AlreadyEnabled(SocError):
    pass


class NotEnabled(SocError):
    pass


class UnknownAgent(SocError):
    def __init__(self, agent_id: str):
        super().__init__(f"no agent with id {agent_id!r}")
        self.agent_id = agent_id


class FragmentParseError(SocError):
    """A plugin's decoder/rule fragments do not survive composite validation."""


class NotFullPackage(SocError):
    """The registry only accepts FULL packages."""


def diff_agents(old: set[str], new: set[str]) -> tuple[set[str], set[str]]:
    """Agents gaining the plugin (install) and losing it (remove)."""
    install = set(new) - set(old)
    remove = set(old) - set(new)
    return install, remove


def _marker_begin(plugin_id: str) -> str:
    return f"<!-- soc-plugin:{plugin_id}:begin -->"


def _marker_end(plugin_id: str) -> str:
    return f"<!-- soc-plugin:{plugin_id}:end -->"


def _fragment_block(plugin_id: str, doc: str) -> str:
    if doc and not doc.endswith("\n"):
        doc += "\n"
    return f"{_marker_begin(plugin_id)}\n{doc}{_marker_end(plugin_id)}\n"


def _excise_block(text: str, plugin_id: str) -> str:
    begin, end = _marker_begin(plugin_id), _marker_end(plugin_id)
    start = text.find(begin)
    if start < 0:
        return text
    stop = text.find(end, start)
    if stop < 0:
        return text
    stop += len(end)
    if stop < len(text) and text[stop] == "\n":
        stop += 1
    return text[:start] + text[stop:]


_MARKER_SCAN = re.compile(r"<!-- soc-plugin:([0-9a-f]{32}):begin -->")


class PluginRegistry:
    def __init__(
        self,
        data_root: str | Path,
        builtin_decoders: str = "",
        builtin_rules: str = "",
    ):
        self.root = Path(data_root)
        self.plugins_dir = self.root / "plugins"
        self.decoders_file = self.root / "etc" / "decoders" / "local_decoder.xml"
        self.rules_file = self.root / "etc" / "rules" / "local_rules.xml"
        self.shared_dir = self.root / "etc" / "shared" / "default" / "plugins"
        self.ar_dir = self.root / "active-response" / "plugins"
        self._builtin_decoders = builtin_decoders
        self._builtin_rules = builtin_rules

        self._plugins: dict[str, PluginPackage] = {}
        self._enabled_order: list[str] = []
        self._agents: dict[str, None] = {}
        self._snapshot = EngineSnapshot()
        self._snapshot_version = 0
        self._load()

    # -- state loading -----------------------------------------------------

    def _load(self) -> None:
        for directory in (
            self.plugins_dir,
            self.decoders_file.parent,
            self.rules_file.parent,
            self.shared_dir,
            self.ar_dir,
        ):
            directory.mkdir(parents=True, exist_ok=True)
        for composite in (self.decoders_file, self.rules_file):
            if not composite.exists():
                composite.write_text("", encoding="utf-8")

        for entry in sorted(self.plugins_dir.iterdir()):
            if not entry.is_dir():
                continue
            try:
                package = package_from_dir(entry)
            except SocError as exc:
                log.warning("skipping unreadable plugin directory %s: %s", entry, exc)
                continue
            self._plugins[package.metadata.norm_id] = package
            for agent in package.metadata.agents:
                if _AGENT_ID.match(agent):
                    self._agents.setdefault(agent)

        for flag_file in self.shared_dir.glob("*.json"):
            if _AGENT_ID.match(flag_file.stem):
                self._agents.setdefault(flag_file.stem)

        # enable order is recoverable from the composite's marker order
        decoders_text = self.decoders_file.read_text(encoding="utf-8")
        marker_order = [
            pid for pid in _MARKER_SCAN.findall(decoders_text) if pid in self._plugins
        ]
        self._enabled_order = [
            pid for pid in marker_order if self._plugins[pid].metadata.enabled
        ]
        for pid, package in self._plugins.items():
            if package.metadata.enabled and pid not in self._enabled_order:
                log.warning("healing missing fragments for enabled plugin %s", pid)
                self._append_fragments(pid, package)
                self._enabled_order.append(pid)
        for pid in _MARKER_SCAN.findall(decoders_text):
            if pid not in self._enabled_order:
                log.warning("dropping stale fragment block %s", pid)
                self._write_composites(
                    _excise_block(self.decoders_file.read_text(encoding="utf-8"), pid),
                    _excise_block(self.rules_file.read_text(encoding="utf-8"), pid),
                )
        self._swap_snapshot()
        self._publish_flag_files(self._agents)

    # -- queries -----------------------------------------------------------

    @property
    def snapshot(self) -> EngineSnapshot:
        return self._snapshot

    @property
    def enabled_order(self) -> list[str]:
        return list(self._enabled_order)

    def list_metadata(self) -> list[PluginMetadata]:
        return [pkg.metadata for pkg in self._plugins.values()]

    def get(self, plugin_id: str) -> PluginPackage:
        from soccore.pluginpkg import normalize_plugin_id

        pid = normalize_plugin_id(plugin_id)
        if pid not in self._plugins:
            raise UnknownPlugin(plugin_id)
        return self._plugins[pid]

    def is_enabled(self, plugin_id: str) -> bool:
        return self.get(plugin_id).metadata.enabled

    def plugin_dir(self, plugin_id: str) -> Path:
        return self.plugins_dir / self.get(plugin_id).metadata.norm_id

    def ar_script_path(self, plugin_id: str) -> Path:
        return self.ar_dir / f"{self.get(plugin_id).metadata.norm_id}.py"

    def registered_agents(self) -> list[str]:
        return list(self._agents)

    def is_registered_agent(self, agent_id: str) -> bool:
        return agent_id in self._agents

    def flag_entries(self, agent_id: str) -> list[dict]:
        if agent_id not in self._agents:
            raise UnknownAgent(agent_id)
        return self._entries_for(agent_id)

    # -- mutations ----------------------------------------------------------

    def register_agent(self, agent_id: str) -> None:
        if not _AGENT_ID.match(agent_id):
            raise UnknownAgent(agent_id)
        if agent_id not in self._agents:
            self._agents.setdefault(agent_id)
            self._publish_flag_files([agent_id])

    def import_package(self, package: PluginPackage) -> PluginMetadata:
        pid = package.metadata.norm_id
        if pid in self._plugins:
            raise DuplicatePlugin(pid)
        if not package.is_full:
            raise NotFullPackage("imported plugins must be FULL packages")
        wants_enabled = package.metadata.enabled
        if wants_enabled:
            self._validate_fragments(package)
            package = package.with_metadata(package.metadata.replace(enabled=False))
        write_package_dir(package, self.plugins_dir / pid)
        self._plugins[pid] = package
        for agent in package.metadata.agents:
            self.register_agent(agent)
        if wants_enabled:
            self.enable(pid)
        return self._plugins[pid].metadata

    def delete(self, plugin_id: str) -> None:
        package = self.get(plugin_id)
        pid = package.metadata.norm_id
        if package.metadata.enabled:
            self.disable(pid)
        shutil.rmtree(self.plugins_dir / pid, ignore_errors=True)
        del self._plugins[pid]

    def enable(self, plugin_id: str) -> None:
        package = self.get(plugin_id)
        pid = package.metadata.norm_id
        if package.metadata.enabled:
            raise AlreadyEnabled(f"plugin {pid} is already enabled")
        self._validate_fragments(package)

        self._append_fragments(pid, package)
        self.ar_dir.mkdir(parents=True, exist_ok=True)
        (self.ar_dir / f"{pid}.py").write_text(
            package.active_response_script or "", encoding="utf-8"
        )
        self._store_metadata(pid, package.metadata.replace(enabled=True))
        self._enabled_order.append(pid)
        self._swap_snapshot()
        for agent in self._plugins[pid].metadata.agents:
            self.register_agent(agent)
        self._publish_flag_files(self._plugins[pid].metadata.agents)

    def disable(self, plugin_id: str) -> None:
        package = self.get(plugin_id)
        pid = package.metadata.norm_id
        if not package.metadata.enabled:
            raise NotEnabled(f"plugin {pid} is not enabled")
        decoders_text = self.decoders_file.read_text(encoding="utf-8")
        rules_text = self.rules_file.read_text(encoding="utf-8")
        self._write_composites(
            _excise_block(decoders_text, pid), _excise_block(rules_text, pid)
        )
        (self.ar_dir / f"{pid}.py").unlink(missing_ok=True)
        self._store_metadata(pid, package.metadata.replace(enabled=False))
        self._enabled_order.remove(pid)
        self._swap_snapshot()
        self._publish_flag_files(self._plugins[pid].metadata.agents)

    def update_metadata(self, plugin_id: str, new_meta: PluginMetadata) -> PluginMetadata:
        package = self.get(plugin_id)
        pid = package.metadata.norm_id
        if new_meta.norm_id != pid:
            raise IdMismatch(f"metadata id {new_meta.id!r} does not match {plugin_id!r}")
        new_meta.validate()
        old_meta = package.metadata

        if not old_meta.enabled and not new_meta.enabled:
            self._store_metadata(pid, new_meta)
        elif not old_meta.enabled and new_meta.enabled:
            self._store_metadata(pid, new_meta.replace(enabled=False))
            self.enable(pid)
        elif old_meta.enabled and not new_meta.enabled:
            self.disable(pid)
            self._store_metadata(pid, new_meta)
        else:
            self._store_metadata(pid, new_meta)
            touched = set(old_meta.agents) | set(new_meta.agents)
            for agent in new_meta.agents:
                self.register_agent(agent)
            self._publish_flag_files(touched)
        return self._plugins[pid].metadata

    # -- composite documents -------------------------------------------------

    def composite_documents(self) -> tuple[str, str]:
        return (
            self.decoders_file.read_text(encoding="utf-8"),
            self.rules_file.read_text(encoding="utf-8"),
        )

    def rebuild_composites(self) -> tuple[str, str]:
        """Recompute both composites from scratch from the enabled set."""
        decoders = "".join(
            _fragment_block(pid, self._plugins[pid].decoders_doc or "")
            for pid in self._enabled_order
        )
        rules = "".join(
            _fragment_block(pid, self._plugins[pid].rules_doc or "")
            for pid in self._enabled_order
        )
        return decoders, rules

    def _append_fragments(self, pid: str, package: PluginPackage) -> None:
        decoders_text = self.decoders_file.read_text(encoding="utf-8")
        rules_text = self.rules_file.read_text(encoding="utf-8")
        decoders_text += _fragment_block(pid, package.decoders_doc or "")
        rules_text += _fragment_block(pid, package.rules_doc or "")
        self._write_composites(decoders_text, rules_text)

    def _write_composites(self, decoders_text: str, rules_text: str) -> None:
        self.decoders_file.write_text(decoders_text, encoding="utf-8")
        self.rules_file.write_text(rules_text, encoding="utf-8")

    def _validate_fragments(self, package: PluginPackage) -> None:
        pid = package.metadata.norm_id
        decoders_text, rules_text = self.composite_documents()
        decoders_text += _fragment_block(pid, package.decoders_doc or "")
        rules_text += _fragment_block(pid, package.rules_doc or "")
        try:
            EngineSnapshot.from_documents(
                self._builtin_decoders + decoders_text,
                self._builtin_rules + rules_text,
                strict=True,
            )
        except SocError as exc:
            raise FragmentParseError(f"plugin {pid}: {exc}") from exc

    def _swap_snapshot(self) -> None:
        decoders_text, rules_text = self.composite_documents()
        self._snapshot_version += 1
        self._snapshot = EngineSnapshot.from_documents(
            self._builtin_decoders + decoders_text,
            self._builtin_rules + rules_text,
            version=self._snapshot_version,
            strict=False,
        )

    # -- flag files ----------------------------------------------------------

    def _entries_for(self, agent_id: str) -> list[dict]:
        entries = []
        for pid in self._enabled_order:
            meta = self._plugins[pid].metadata
            if agent_id in meta.agents:
                entries.append({"id": pid, "version": meta.version})
        return entries

    def _publish_flag_files(self, agents) -> None:
        for agent in agents:
            if agent not in self._agents:
                continue
            path = self.shared_dir / f"{agent}.json"
            text = json.dumps(self._entries_for(agent), indent=2) + "\n"
            if not path.exists() or path.read_text(encoding="utf-8") != text:
                path.write_text(text, encoding="utf-8")

    def _store_metadata(self, pid: str, meta: PluginMetadata) -> None:
        package = self._plugins[pid].with_metadata(meta)
        self._plugins[pid] = package
        (self.plugins_dir / pid / "metadata.json").write_text(
            package.metadata_text, encoding="utf-8"
        )
