"""Manager service facade: registry operations, the ingest pipeline, and the
ticketing / reputation / active-response integrations behind them.

Registry mutations are serialized under one lock; ingestion runs concurrently
against immutable engine snapshots and its own store lock.
"""

from __future__ import annotations

import logging
import threading
from collections import deque
from datetime import datetime, timezone
from pathlib import Path

from soccore.clock import SystemClock
from soccore.engine.alerts import Alert
from soccore.engine.syslog import (
    SOURCE_EXTERNAL,
    SOURCE_FIM,
    SOURCE_PLUGIN,
    SOURCE_TAIL,
    UnparsableLine,
    format_syslog_line,
    parse_syslog_line,
    unparsed_event,
)
from soccore.manager.builtin import BUILTIN_DECODERS, BUILTIN_RULES
from soccore.manager.config import ManagerConfig
from soccore.manager.notify import WebhookNotifier
from soccore.manager.registry import PluginRegistry, diff_agents
from soccore.manager.reputation import BackendUnavailable, backend_from_config
from soccore.manager.response import ActiveResponseRunner, PluginDisabled
from soccore.manager.store import AlertStore
from soccore.manager.tickets import TicketBook
from soccore.pluginpkg import PluginMetadata, pack, validate_package

log = logging.getLogger(__name__)

__all__ = ["ManagerService", "diff_agents"]


class ManagerService:
    def __init__(
        self,
        config: ManagerConfig,
        clock=None,
        notifier_synchronous: bool = False,
        webhook_transport=None,
        reputation_backend=None,
    ):
        self.config = config
        self.clock = clock or SystemClock()
        root = Path(config.data_root)
        self.registry = PluginRegistry(root, BUILTIN_DECODERS, BUILTIN_RULES)
        for agent in config.agents:
            self.registry.register_agent(agent)
        self.store = AlertStore(root / "logs" / "alerts.jsonl")
        self.tickets = TicketBook(self.store.get)
        self.notifier = WebhookNotifier(
            config.ticket_webhook_url,
            threshold=config.ticket_threshold,
            transport=webhook_transport,
            clock=self.clock,
            synchronous=notifier_synchronous,
        )
        self.reputation = (
            reputation_backend
            if reputation_backend is not None
            else backend_from_config(config.reputation_backend, config.reputation_api_key)
        )
        self.ar_runner = ActiveResponseRunner(config.ar_interpreter, config.ar_timeout)
        self.scans: list[dict] = []
        self.ingest_journal: deque = deque(maxlen=100_000)
        self.counters = {
            "lines": 0,
            "unparsed": 0,
            "nodecode": 0,
            "nomatch": 0,
            "suppressed": 0,
            "alerts": 0,
            "reputation_failures": 0,
        }
        self.on_event = None
        self._mutex = threading.RLock()
        self._counter_lock = threading.Lock()
        self._last_seen: dict[str, float] = {}

    # -- time ---------------------------------------------------------------

    def _now_dt(self) -> datetime:
        return datetime.fromtimestamp(self.clock.now(), tz=timezone.utc).replace(
            tzinfo=None
        )

    def _now_iso(self) -> str:
        return self._now_dt().isoformat()

    def _count(self, name: str, amount: int = 1) -> None:
        with self._counter_lock:
            self.counters[name] = self.counters.get(name, 0) + amount

    def _emit(self, kind: str, **data) -> None:
        if self.on_event is not None:
            self.on_event({"event": kind, "at": self.clock.now(), **data})

    # -- plugin API ----------------------------------------------------------

    def api_list_plugins(self) -> list[PluginMetadata]:
        with self._mutex:
            return self.registry.list_metadata()

    def api_import_plugin(self, archive: bytes) -> PluginMetadata:
        package = validate_package(archive)
        with self._mutex:
            meta = self.registry.import_package(package)
        self._emit("plugin_imported", plugin=meta.norm_id, enabled=meta.enabled)
        return meta

    def api_delete_plugin(self, plugin_id: str) -> None:
        with self._mutex:
            self.registry.delete(plugin_id)
        self._emit("plugin_deleted", plugin=plugin_id)

    def api_export_plugin(self, plugin_id: str, size: str = "full") -> bytes:
        with self._mutex:
            package = self.registry.get(plugin_id)
            return pack(package, size)

    def api_get_metadata(self, plugin_id: str) -> PluginMetadata:
        with self._mutex:
            return self.registry.get(plugin_id).metadata

    def api_update_metadata(self, plugin_id: str, new_meta: PluginMetadata) -> PluginMetadata:
        with self._mutex:
            before = self.registry.get(plugin_id).metadata.enabled
            meta = self.registry.update_metadata(plugin_id, new_meta)
        if meta.enabled and not before:
            self._emit("plugin_enabled", plugin=meta.norm_id)
        elif before and not meta.enabled:
            self._emit("plugin_disabled", plugin=meta.norm_id)
        self._emit("metadata_updated", plugin=meta.norm_id)
        return meta

    def enable_plugin(self, plugin_id: str) -> None:
        with self._mutex:
            self.registry.enable(plugin_id)
        self._emit("plugin_enabled", plugin=plugin_id)

    def disable_plugin(self, plugin_id: str) -> None:
        with self._mutex:
            self.registry.disable(plugin_id)
        self._emit("plugin_disabled", plugin=plugin_id)

    # -- agents / flag files ---------------------------------------------------

    def api_get_flag_file(self, agent_id: str) -> dict:
        entries = self.registry.flag_entries(agent_id)
        self.touch_agent(agent_id)
        return {"agent_id": agent_id, "entries": entries}

    def touch_agent(self, agent_id: str) -> None:
        if agent_id and agent_id != "000":
            self._last_seen[agent_id] = self.clock.now()

    def register_agent(self, agent_id: str) -> None:
        with self._mutex:
            self.registry.register_agent(agent_id)

    def active_agents(self) -> list[str]:
        horizon = self.clock.now() - self.config.activity_window
        return sorted(
            agent
            for agent in self.registry.registered_agents()
            if self._last_seen.get(agent, -1) >= horizon
        )

    # -- ingest pipeline -------------------------------------------------------

    def _classify(self, message: str) -> str:
        if message.startswith("SOC_NES: syscheck: "):
            return SOURCE_FIM
        if message.startswith("SOC_NES: logtail: "):
            return SOURCE_TAIL
        if message.startswith("SOC_NES: "):
            return SOURCE_PLUGIN
        return SOURCE_EXTERNAL

    def ingest_log(self, line: str, agent_id: str = "000", source: str | None = None):
        line = line.rstrip("\r\n")
        if not line.strip():
            return None
        self._count("lines")
        self.touch_agent(agent_id)
        now = self._now_dt()
        try:
            event = parse_syslog_line(line, agent_id, now=now)
        except UnparsableLine:
            self._count("unparsed")
            event = unparsed_event(line, agent_id, now=now)
        event.source = source or self._classify(event.message)

        snapshot = self.registry.snapshot
        self.ingest_journal.append(
            {
                "line": line,
                "agent_id": agent_id,
                "snapshot_version": snapshot.version,
                "at": self.clock.now(),
            }
        )
        evaluation = snapshot.evaluate(event)
        if evaluation.decoded is None:
            self._count("nodecode")
            return None
        if evaluation.rule is None:
            self._count("nomatch")
            return None
        if evaluation.rule.level == 0:
            self._count("suppressed")
            return None

        alert = evaluation.alert
        self.store.append(alert)
        self._count("alerts")
        self._emit(
            "alert",
            alert_id=alert.id,
            level=alert.level,
            description=alert.description,
            agent=alert.agent_id,
            rule=alert.rule_id,
        )
        self.notifier.submit(alert)
        if alert.level >= self.config.auto_ticket_level:
            ticket = self.tickets.create(alert.id, assignee="auto", now=self._now_iso())
            self._emit("ticket_opened", ticket_id=ticket.id, alert_id=alert.id)
        self._maybe_scan_reputation(alert)
        return alert

    def _maybe_scan_reputation(self, alert: Alert) -> None:
        groups = alert.group.split(",")
        if "syscheck" not in groups or self.reputation is None:
            return
        sha256 = alert.fields.get("sha256")
        if not sha256 or alert.fields.get("action") not in ("added", "modified"):
            return
        try:
            self.scan_file_reputation(
                alert.fields.get("filePath", ""), sha256, agent_id=alert.agent_id
            )
        except BackendUnavailable:
            pass  # already recorded; ingestion is fire-and-forget

    def scan_file_reputation(self, path: str, sha256: str, agent_id: str = "000"):
        if self.reputation is None:
            raise BackendUnavailable("no reputation backend configured")
        try:
            verdict = self.reputation.scan(sha256)
        except BackendUnavailable as exc:
            self._count("reputation_failures")
            self.scans.append(
                {"path": path, "sha256": sha256, "status": "unavailable", "error": str(exc)}
            )
            raise
        self.scans.append(
            {"path": path, "sha256": sha256, "status": "ok", **verdict.to_record()}
        )
        self._emit("reputation_scan", path=path, positives=verdict.positives)
        if verdict.positives > 0:
            line = format_syslog_line(
                self._now_dt(),
                "manager",
                "soc",
                f"SOC_NES: reputation: {verdict.positives} {verdict.total} {path}",
            )
            self.ingest_log(line, agent_id=agent_id, source=SOURCE_EXTERNAL)
        return verdict

    # -- active response ---------------------------------------------------------

    def api_active_response(self, plugin_id: str, args: list[str], agent_id: str = "000"):
        with self._mutex:
            package = self.registry.get(plugin_id)
            if not package.metadata.enabled:
                raise PluginDisabled(f"plugin {plugin_id} is not enabled")
            script = self.registry.ar_script_path(plugin_id)
        self.ar_runner.validate_args(args)
        record = self.ar_runner.execute(
            script, package.metadata.norm_id, args, agent_id, self._now_iso()
        )
        self._emit("ar_executed", plugin=package.metadata.norm_id, args=list(args))
        return record

    # -- alerts and tickets ---------------------------------------------------------

    def api_list_alerts(self, **filters) -> dict:
        return self.store.query(**filters)

    def api_create_ticket(self, alert_id: int, assignee: str = ""):
        ticket = self.tickets.create(alert_id, assignee, now=self._now_iso())
        self._emit("ticket_opened", ticket_id=ticket.id, alert_id=alert_id)
        return ticket

    def api_close_ticket(self, ticket_id: int):
        return self.tickets.close(ticket_id, now=self._now_iso())

    def api_list_tickets(self, status: str | None = None):
        return self.tickets.list(status)

    # -- health -----------------------------------------------------------------

    def health(self) -> dict:
        metas = self.api_list_plugins()
        active = self.active_agents()
        registered = self.registry.registered_agents()
        return {
            "status": "ok",
            "agents": {
                "total": len(registered),
                "active": len(active),
                "active_ids": active,
                "registered": sorted(registered),
            },
            "plugins": {
                "total": len(metas),
                "enabled": sum(1 for m in metas if m.enabled),
            },
            "counters": dict(self.counters),
            "snapshot_version": self.registry.snapshot.version,
        }

    def close(self) -> None:
        self.notifier.stop()
        self.store.close()
