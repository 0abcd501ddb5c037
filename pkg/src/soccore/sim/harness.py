"""The simulation harness: an in-process manager plus N agents on one
virtual clock, replaying a scenario timeline deterministically.

The harness owns time. Every virtual second it applies due timeline actions,
then steps each agent to quiescence (poll, plugin runs, tailers, FIM); all
queues are synchronous in this mode, so two runs of the same scenario produce
identical transcripts. Observed outcomes are checked both against the
scenario's expectations and against an independent brute-force re-evaluation
of every journaled line.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from soccore.clock import VirtualClock
from soccore.errors import SocError
from soccore.agent.client import LocalManagerClient
from soccore.agent.config import AgentConfig
from soccore.agent.daemon import AgentDaemon
from soccore.agent.shipper import LocalShipTransport, LogShipper
from soccore.autoconfig.formatter import FormatterAnswers, HostAnswer, formatter
from soccore.autoconfig.topology import parse_topology
from soccore.autoconfig.vault import vault_decrypt, vault_encrypt
from soccore.manager.config import ManagerConfig
from soccore.manager.reputation import MockReputationBackend
from soccore.manager.service import ManagerService
from soccore.pluginpkg import make_template, pack, package_from_dir, validate_package
from soccore.sim.oracle import predict_alert
from soccore.sim.scenario import Scenario, TimelineEvent

TEST_KDF = (2**8, 8, 1)  # light vault parameters: scenario runs exercise the
                         # envelope format, not KDF hardness


class HarnessBootFailure(SocError):
    pass


@dataclass
class SimReport:
    scenario: str
    passed: bool
    checks: list[dict]
    transcript: list[dict]
    alerts: list[dict]
    counters: dict
    observed: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "checks": self.checks,
            "transcript": self.transcript,
            "alerts": self.alerts,
            "counters": self.counters,
            "observed": self.observed,
        }

    def summary_lines(self) -> list[str]:
        lines = [f"scenario {self.scenario}: {'PASS' if self.passed else 'FAIL'}"]
        for check in self.checks:
            mark = "ok " if check["ok"] else "FAIL"
            lines.append(f"  [{mark}] {check['name']}: {check['detail']}")
        return lines


class SimulationHarness:
    def __init__(self, scenario: Scenario, workspace: str | Path):
        self.scenario = scenario
        self.workspace = Path(workspace)
        self.workspace.mkdir(parents=True, exist_ok=True)
        self.clock = VirtualClock(scenario.base_time)
        self.transcript: list[dict] = []
        self._snapshots: dict[int, object] = {}

        fixture = {}
        for verdict in scenario.reputation_verdicts:
            digest = hashlib.sha256(verdict["content"].encode("utf-8")).hexdigest()
            fixture[digest] = {
                "positives": int(verdict.get("positives", 0)),
                "total": int(verdict.get("total", 70)),
            }
        self.webhook_sink: list[dict] = []

        agent_ids = sorted(
            set(scenario.manager_agents) | {spec.id for spec in scenario.agents}
        )
        config = ManagerConfig(
            data_root=str(self.workspace / "manager-data"),
            agents=agent_ids,
            ticket_webhook_url="sim://webhook" if scenario.webhook else "",
            ticket_threshold=scenario.ticket_threshold,
            auto_ticket_level=scenario.auto_ticket_level,
        )
        try:
            self.service = ManagerService(
                config,
                clock=self.clock,
                notifier_synchronous=True,
                webhook_transport=self._webhook_transport if scenario.webhook else None,
                reputation_backend=MockReputationBackend(fixture) if fixture else None,
            )
        except SocError as exc:
            raise HarnessBootFailure(f"manager boot failed: {exc}") from exc
        self.service.on_event = self.transcript.append

        self.agents: dict[str, AgentDaemon] = {}
        for spec in sorted(scenario.agents, key=lambda s: s.id):
            agent_root = self.workspace / "agents" / spec.id
            agent_config = AgentConfig(
                agent_id=spec.id,
                ossec_dir=str(agent_root / "ossec"),
                hostname=f"agent{spec.id}",
                username="soc",
                tailed_files=[
                    {"path": str(self.workspace / p)} for p in spec.tail
                ],
                fim_watches=[str(self.workspace / p) for p in spec.fim],
            )
            for watch in agent_config.fim_watches:
                Path(watch).mkdir(parents=True, exist_ok=True)
            shipper = LogShipper(
                LocalShipTransport(self.service, spec.id),
                mirror_path=agent_root / "ossec" / "plugin_syslog.log",
            )
            daemon = AgentDaemon(
                agent_config,
                LocalManagerClient(self.service),
                shipper,
                clock=self.clock,
                synchronous_runs=True,
            )
            daemon.on_event = lambda event, aid=spec.id: self.transcript.append(
                {**event, "agent": event.get("agent", aid)}
            )
            self.agents[spec.id] = daemon

        self._import_scenario_plugins()
        self._capture_snapshot()

    # -- webhook sink -------------------------------------------------------

    def _webhook_transport(self, url: str, payload: dict) -> bool:
        self.webhook_sink.append(payload)
        return True

    def _capture_snapshot(self) -> None:
        snapshot = self.service.registry.snapshot
        self._snapshots[snapshot.version] = snapshot

    def _import_scenario_plugins(self) -> None:
        base = self.scenario.path.parent
        for spec in self.scenario.plugins:
            if spec.template:
                archive = make_template()
                if spec.enabled is not None:
                    package = validate_package(archive)
                    package = package.with_metadata(
                        package.metadata.replace(enabled=spec.enabled)
                    )
                    archive = pack(package, "full")
            else:
                package = package_from_dir(base / spec.directory)
                if spec.enabled is not None:
                    package = package.with_metadata(
                        package.metadata.replace(enabled=spec.enabled)
                    )
                archive = pack(package, "full")
            try:
                self.service.api_import_plugin(archive)
            except SocError as exc:
                raise HarnessBootFailure(f"plugin import failed: {exc}") from exc
            self._capture_snapshot()

    # -- timeline ---------------------------------------------------------------

    def run(self) -> SimReport:
        pending = list(self.scenario.timeline)
        end_at = max(self.scenario.end_at, pending[-1].at if pending else 0.0)
        tick = 0
        while True:
            now = tick * 1.0
            if tick > 0:
                self.clock.advance(1.0)
            while pending and pending[0].at <= now:
                self._apply(pending.pop(0))
                self._capture_snapshot()
            for agent_id in sorted(self.agents):
                self.agents[agent_id].step()
            if now >= end_at:
                break
            tick += 1
        return self._report()

    def _resolve_path(self, params: dict) -> Path:
        raw = params["path"]
        if params.get("agent") and params.get("plugin"):
            agent = self.agents[params["agent"]]
            return agent.download_dir / params["plugin"] / raw
        return self.workspace / raw

    def _apply(self, event: TimelineEvent) -> None:
        params = event.params
        self.transcript.append(
            {"event": f"action:{event.action}", "at": self.clock.now(), **{
                k: v for k, v in params.items() if k != "content"
            }}
        )
        if event.action == "inject_log":
            line = params["line"]
            agent = params.get("agent", "000")
            for _ in range(int(params.get("repeat", 1))):
                self.service.ingest_log(line, agent_id=agent)
        elif event.action == "file_op":
            path = self._resolve_path(params)
            op = params["op"]
            if op == "delete":
                path.unlink(missing_ok=True)
            else:
                path.parent.mkdir(parents=True, exist_ok=True)
                mode = "a" if op == "append" else "w"
                with path.open(mode, encoding="utf-8") as fh:
                    fh.write(params.get("content", ""))
        elif event.action == "enable_plugin":
            self.service.enable_plugin(params["plugin"])
        elif event.action == "disable_plugin":
            self.service.disable_plugin(params["plugin"])
        elif event.action == "bump_version":
            meta = self.service.api_get_metadata(params["plugin"])
            self.service.api_update_metadata(
                params["plugin"], meta.replace(version=params["version"])
            )
        elif event.action == "run_formatter_answers":
            self._run_formatter(params)

    def _run_formatter(self, params: dict) -> None:
        def host(raw) -> HostAnswer | None:
            if not raw:
                return None
            return HostAnswer(raw["ip"], raw["key_path"], raw["ssh_user"])

        answers = FormatterAnswers(
            elastic=host(params.get("elastic")),
            kibana=host(params.get("kibana")),
            wazuh=host(params.get("wazuh")),
            devices=[(d["type"], host(d)) for d in params.get("devices", [])],
            agents_only=bool(params.get("agents_only", False)),
        )
        passphrase = params.get("passphrase", "sim-passphrase")
        text = formatter(answers)
        envelope = vault_encrypt(text.encode("utf-8"), passphrase, TEST_KDF)
        recovered = vault_decrypt(envelope, passphrase).decode("utf-8")
        entries = parse_topology(recovered)
        self.transcript.append(
            {"event": "formatter_roundtrip", "at": self.clock.now(), "entries": len(entries)}
        )

    # -- verification -----------------------------------------------------------

    def _oracle_check(self) -> dict:
        predicted = []
        for row in self.service.ingest_journal:
            snapshot = self._snapshots.get(row["snapshot_version"])
            if snapshot is None:
                return {
                    "name": "oracle_agreement",
                    "ok": False,
                    "detail": f"snapshot {row['snapshot_version']} not captured",
                }
            hit = predict_alert(row["line"], row["agent_id"], snapshot)
            if hit is not None:
                predicted.append((hit.level, hit.description, hit.agent_id))
        observed = [
            (r["rule.level"], r["rule.description"], r["agent.id"])
            for r in self.service.store.query(limit=0)["alerts"][::-1]
        ]
        ok = predicted == observed
        return {
            "name": "oracle_agreement",
            "ok": ok,
            "detail": f"{len(observed)} alerts match the brute-force prediction"
            if ok
            else f"predicted {len(predicted)} alerts, observed {len(observed)}",
        }

    def _report(self) -> SimReport:
        expect = self.scenario.expect
        store = self.service.store
        alerts = store.query(limit=0)["alerts"][::-1]  # chronological
        checks: list[dict] = []

        def check(name: str, ok: bool, detail: str) -> None:
            checks.append({"name": name, "ok": bool(ok), "detail": detail})

        if expect.alerts is not None:
            ok = len(alerts) == len(expect.alerts)
            problems = []
            for index, want in enumerate(expect.alerts):
                if index >= len(alerts):
                    break
                got = alerts[index]
                if got["rule.level"] != want["level"]:
                    ok = False
                    problems.append(f"#{index}: level {got['rule.level']} != {want['level']}")
                if want.get("description", "") not in got["rule.description"]:
                    ok = False
                    problems.append(f"#{index}: description {got['rule.description']!r}")
                if "agent" in want and got["agent.id"] != want["agent"]:
                    ok = False
                    problems.append(f"#{index}: agent {got['agent.id']} != {want['agent']}")
            check(
                "alerts",
                ok,
                f"{len(alerts)}/{len(expect.alerts)} alerts as expected"
                + ("; " + "; ".join(problems) if problems else ""),
            )
        if expect.alert_total is not None:
            check(
                "alert_total",
                len(alerts) == expect.alert_total,
                f"{len(alerts)} alerts (want {expect.alert_total})",
            )
        for level, count in expect.alerts_at_level.items():
            got = sum(1 for a in alerts if a["rule.level"] == level)
            check(
                f"alerts_at_level_{level}",
                got == count,
                f"{got} level-{level} alerts (want {count})",
            )
        if expect.tickets is not None:
            tickets = self.service.api_list_tickets()
            check(
                "tickets",
                len(tickets) == expect.tickets,
                f"{len(tickets)} tickets (want {expect.tickets})",
            )
        if expect.ar_invocations is not None:
            observed_args = [list(r.args) for r in self.service.ar_runner.records]
            check(
                "ar_invocations",
                observed_args == [list(a) for a in expect.ar_invocations],
                f"{observed_args} (want {expect.ar_invocations})",
            )
        if expect.webhook_deliveries is not None:
            check(
                "webhook_deliveries",
                len(self.webhook_sink) == expect.webhook_deliveries,
                f"{len(self.webhook_sink)} deliveries (want {expect.webhook_deliveries})",
            )
        if expect.reputation_scans is not None:
            ok_scans = [s for s in self.service.scans if s["status"] == "ok"]
            check(
                "reputation_scans",
                len(ok_scans) == expect.reputation_scans,
                f"{len(ok_scans)} scans (want {expect.reputation_scans})",
            )
        if expect.no_drops:
            counters = self.service.counters
            drops = sum(agent.shipper.drops for agent in self.agents.values())
            lost = (
                counters["unparsed"]
                + counters["nodecode"]
                + counters["nomatch"]
                + counters["suppressed"]
                + drops
            )
            check("no_drops", lost == 0, f"{lost} lines failed to alert")

        checks.append(self._oracle_check())
        passed = all(c["ok"] for c in checks)
        return SimReport(
            scenario=self.scenario.name,
            passed=passed,
            checks=checks,
            transcript=self.transcript,
            alerts=alerts,
            counters=dict(self.service.counters),
            observed={
                "tickets": [t.to_record() for t in self.service.api_list_tickets()],
                "ar_invocations": [list(r.args) for r in self.service.ar_runner.records],
                "webhook_deliveries": len(self.webhook_sink),
                "scans": list(self.service.scans),
            },
        )


def simulate(scenario: Scenario, workspace: str | Path | None = None) -> SimReport:
    """Boot the harness, replay the scenario, and verify expectations."""
    import tempfile

    own_workspace = workspace is None
    workdir = Path(tempfile.mkdtemp(prefix="soc-sim-")) if own_workspace else Path(workspace)
    try:
        harness = SimulationHarness(scenario, workdir)
        return harness.run()
    finally:
        if own_workspace:
            shutil.rmtree(workdir, ignore_errors=True)
