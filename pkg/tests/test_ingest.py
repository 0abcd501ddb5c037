"""Ingest pipeline integrations: ticket webhook, reputation scans, counters."""

import pytest

from soccore.clock import VirtualClock
from soccore.manager.config import ManagerConfig
from soccore.manager.notify import WebhookNotifier
from soccore.manager.reputation import (
    BackendUnavailable,
    MockReputationBackend,
    backend_from_config,
)
from soccore.manager.service import ManagerService

from builders import build_archive, decoders_doc, make_service

SSH = "Jan 26 13:04:09 web01 sshd[4411]: Failed password for invalid user test from 1.2.3.4 port 42044 ssh2"
FIM_HASH = "ab" * 32


def fim_line(path="/watch/bad.exe", digest=FIM_HASH):
    return f"Feb 3 09:00:01 host agentd: SOC_NES: syscheck: File '{path}' added sha256={digest}"


def make_notifying_service(tmp_path, sink, threshold=5, failing=0):
    attempts = {"left": failing}

    def transport(url, payload):
        if attempts["left"] > 0:
            attempts["left"] -= 1
            return False
        sink.append(payload)
        return True

    config = ManagerConfig(
        data_root=str(tmp_path / "m"),
        agents=["001"],
        ticket_webhook_url="test://hook",
        ticket_threshold=threshold,
    )
    return ManagerService(
        config,
        clock=VirtualClock(1705276800.0),
        notifier_synchronous=True,
        webhook_transport=transport,
    )


class TestNotifyThreshold:
    def test_level_5_delivers(self, tmp_path):
        sink = []
        service = make_notifying_service(tmp_path, sink)
        service.ingest_log(SSH, agent_id="001")
        assert len(sink) == 1
        assert sink[0]["rule.level"] == 5
        assert "authentication failed" in sink[0]["text"]

    def test_level_below_threshold_silent(self, tmp_path):
        sink = []
        service = make_notifying_service(tmp_path, sink, threshold=6)
        service.ingest_log(SSH, agent_id="001")
        assert sink == []
        assert service.api_list_alerts()["total"] == 1  # persisted regardless

    def test_dead_letter_after_retries(self, tmp_path):
        sink = []
        service = make_notifying_service(tmp_path, sink, failing=99)
        service.ingest_log(SSH, agent_id="001")
        assert sink == []
        assert len(service.notifier.dead_letters) == 1
        assert service.api_list_alerts()["total"] == 1

    def test_transient_failure_retried(self, tmp_path):
        sink = []
        service = make_notifying_service(tmp_path, sink, failing=2)
        service.ingest_log(SSH, agent_id="001")
        assert len(sink) == 1
        assert service.notifier.dead_letters == []

    def test_async_worker_delivers(self, tmp_path):
        sink = []
        notifier = WebhookNotifier(
            "test://hook",
            threshold=5,
            transport=lambda url, payload: sink.append(payload) or True,
        )
        notifier.start()
        service = make_service(tmp_path)
        service.ingest_log(SSH, agent_id="001")
        alert = service.store.query()["alerts"][0]

        from soccore.engine.alerts import Alert
        from datetime import datetime

        notifier.submit(
            Alert(
                rule_id=alert["rule.id"],
                level=alert["rule.level"],
                description=alert["rule.description"],
                fields={},
                agent_id="001",
                timestamp=datetime(2024, 1, 1),
                group="",
                decoder_name="sshd-auth-failure",
                full_log="x",
                id=alert["id"],
            )
        )
        notifier.stop()  # drains the queue before joining
        assert len(sink) == 1


class TestSuppression:
    def test_level_zero_rule_suppresses(self, tmp_path):
        service = make_service(tmp_path)
        archive = build_archive(plugin_id="e" * 32, name="Quiet", rule_id=100009, level=0, enabled=True)
        service.api_import_plugin(archive)
        line = "Feb 3 09:00:00 h u: SOC_NES: Quiet: a b c"
        result = service.ingest_log(line, agent_id="001")
        assert result is None
        assert service.counters["suppressed"] == 1
        assert service.api_list_alerts()["total"] == 0


class TestReputation:
    def test_mock_hit_emits_derived_alert(self, tmp_path):
        service = make_service(tmp_path)
        service.reputation = MockReputationBackend({FIM_HASH: {"positives": 45, "total": 70}})
        service.ingest_log(fim_line(), agent_id="002")
        alerts = service.api_list_alerts()["alerts"]
        assert [a["rule.level"] for a in alerts] == [12, 7]  # newest first
        derived = alerts[0]
        assert derived["rule.description"] == "Malicious file detected by reputation scan."
        assert derived["data.positives"] == "45"
        assert len(service.scans) == 1 and service.scans[0]["positives"] == 45

    def test_unknown_hash_scans_clean(self, tmp_path):
        service = make_service(tmp_path)
        service.reputation = MockReputationBackend({})
        verdict = service.scan_file_reputation("/tmp/x", "cd" * 32)
        assert verdict.positives == 0 and verdict.total == 70
        assert verdict.permalink
        assert service.api_list_alerts()["total"] == 0  # no derived alert

    def test_backend_down_recorded(self, tmp_path):
        class DownBackend:
            def scan(self, sha256):
                raise BackendUnavailable("nope")

        service = make_service(tmp_path)
        service.reputation = DownBackend()
        service.ingest_log(fim_line(), agent_id="002")
        # FIM alert persisted, scan failure recorded, no derived alert
        assert service.api_list_alerts()["total"] == 1
        assert service.scans[0]["status"] == "unavailable"
        assert service.counters["reputation_failures"] == 1

    def test_deleted_event_not_scanned(self, tmp_path):
        service = make_service(tmp_path)
        service.reputation = MockReputationBackend({FIM_HASH: {"positives": 3}})
        service.ingest_log(
            "Feb 3 09:00:02 host agentd: SOC_NES: syscheck: File '/watch/bad.exe' deleted",
            agent_id="002",
        )
        assert service.scans == []

    def test_backend_from_config_mock_file(self, tmp_path):
        fixture = tmp_path / "verdicts.json"
        fixture.write_text('{"%s": {"positives": 9, "total": 60}}' % FIM_HASH)
        backend = backend_from_config(f"mock:{fixture}")
        assert backend.scan(FIM_HASH).positives == 9
        assert backend_from_config("") is None


class TestAutoTicket:
    def test_level_15_opens_ticket(self, tmp_path):
        service = make_service(tmp_path)
        archive = build_archive(plugin_id="f" * 32, name="Critical", rule_id=100010, level=15, enabled=True)
        service.api_import_plugin(archive)
        service.ingest_log("Feb 3 09:00:00 h u: SOC_NES: Critical: a b c", agent_id="001")
        tickets = service.api_list_tickets()
        assert len(tickets) == 1
        assert tickets[0].status == "open"
        assert tickets[0].assignee == "auto"

    def test_level_below_no_auto_ticket(self, tmp_path):
        service = make_service(tmp_path)
        service.ingest_log(SSH, agent_id="001")
        assert service.api_list_tickets() == []


class TestCounters:
    def test_unparsed_and_nodecode(self, tmp_path):
        service = make_service(tmp_path)
        assert service.ingest_log("complete garbage", agent_id="001") is None
        assert service.counters["unparsed"] == 1
        assert service.counters["nodecode"] == 1
        assert service.ingest_log("Feb 3 09:00:00 h u: quiet message", agent_id="001") is None
        assert service.counters["nodecode"] == 2
        assert service.counters["unparsed"] == 1
