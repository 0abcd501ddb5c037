"""Plan execution.

Local transport stands the stack up on this host: stub state dirs for the
index/dashboard roles, a real manager process, real agent daemons (distinct
ports and state roots), and rendered network-device configs. ssh-stub records
the exact remote command sequence it would run, with zero network activity.

Execution is fail-fast: the first failing step aborts the run; the report
lists every step completed before it.
"""

from __future__ import annotations

import json
import os
import signal
import socket
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from soccore.errors import SocError
from soccore.autoconfig.planner import DeploymentPlan, PlanStep


class StepFailure(SocError):
    def __init__(self, step: str, cause: str, report: "DeploymentReport | None" = None):
        super().__init__(f"step {step!r} failed: {cause}")
        self.step = step
        self.cause = cause
        self.report = report


@dataclass
class StepOutcome:
    action: str
    target: str
    outcome: str  # done | already | failed
    detail: str = ""

    def to_record(self) -> dict:
        return {
            "action": self.action,
            "target": self.target,
            "outcome": self.outcome,
            "detail": self.detail,
        }


@dataclass
class DeploymentReport:
    transport: str
    steps: list[StepOutcome] = field(default_factory=list)
    transcript: list[str] = field(default_factory=list)
    endpoints: dict = field(default_factory=dict)
    total_seconds: float = 0.0

    def to_record(self) -> dict:
        return {
            "transport": self.transport,
            "steps": [s.to_record() for s in self.steps],
            "transcript": self.transcript,
            "endpoints": self.endpoints,
            "total_seconds": self.total_seconds,
        }


CISCO_TEMPLATE = """\
! forward syslog to the SOC manager
logging host {manager_host} transport tcp port {ingest_port}
logging trap informational
logging origin-id hostname
"""

JUNOS_TEMPLATE = """\
set system syslog host {manager_host} any info
set system syslog host {manager_host} port {ingest_port}
set system syslog host {manager_host} transport tcp
"""


def render_network_config(device: str, manager_host: str, ingest_port: int) -> str:
    template = CISCO_TEMPLATE if device == "cisco" else JUNOS_TEMPLATE
    return template.format(manager_host=manager_host, ingest_port=ingest_port)


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except (OSError, ProcessLookupError):
        return False
    return True


def _health(api_port: int, timeout: float = 0.8) -> dict | None:
    import requests

    try:
        response = requests.get(f"http://127.0.0.1:{api_port}/health", timeout=timeout)
        if response.status_code == 200:
            return response.json()
    except requests.RequestException:
        return None
    return None


def execute_plan(
    plan: DeploymentPlan,
    transport: str = "local",
    base_dir: str | Path = "deployment",
    wait_timeout: float = 10.0,
) -> DeploymentReport:
    if transport not in ("local", "ssh-stub"):
        raise SocError(f"unknown transport {transport!r}")
    started = time.monotonic()
    report = DeploymentReport(transport=transport)
    base = Path(base_dir)
    base.mkdir(parents=True, exist_ok=True)
    runner = _LocalRunner(base, plan) if transport == "local" else _SshStubRunner(base, plan)

    for step in plan.steps:
        target = step.entry.ip if step.entry else "-"
        try:
            outcome = runner.run_step(step, report)
        except StepFailure:
            raise
        except Exception as exc:
            report.steps.append(StepOutcome(step.action, target, "failed", str(exc)))
            report.total_seconds = time.monotonic() - started
            raise StepFailure(step.describe(), str(exc), report) from exc
        report.steps.append(outcome)

    try:
        runner.finalize(report, wait_timeout)
    except StepFailure as exc:
        report.total_seconds = time.monotonic() - started
        exc.report = report
        raise
    report.total_seconds = time.monotonic() - started
    return report


class _LocalRunner:
    def __init__(self, base: Path, plan: DeploymentPlan):
        self.base = base
        self.plan = plan
        self.state_file = base / "state.json"
        self.state = {}
        if self.state_file.exists():
            self.state = json.loads(self.state_file.read_text(encoding="utf-8"))
        self.logs_dir = base / "logs"
        self.logs_dir.mkdir(exist_ok=True)

    def _save(self) -> None:
        self.state_file.write_text(json.dumps(self.state, indent=2), encoding="utf-8")

    def _spawn(self, name: str, argv: list[str]) -> int:
        log_path = self.logs_dir / f"{name}.log"
        with log_path.open("ab") as log_fh:
            proc = subprocess.Popen(
                argv,
                stdout=log_fh,
                stderr=subprocess.STDOUT,
                start_new_session=True,
            )
        return proc.pid

    # -- steps ---------------------------------------------------------------

    def run_step(self, step: PlanStep, report: DeploymentReport) -> StepOutcome:
        target = step.entry.ip if step.entry else "-"
        if step.action in ("install_elastic_stub", "install_kibana_stub"):
            role = "elastic" if "elastic" in step.action else "kibana"
            marker = self.base / f"{role}-{target}" / "service.json"
            if marker.exists():
                return StepOutcome(step.action, target, "already", "stub present")
            marker.parent.mkdir(parents=True, exist_ok=True)
            marker.write_text(
                json.dumps({"role": role, "status": "running", "host": target}) + "\n",
                encoding="utf-8",
            )
            return StepOutcome(step.action, target, "done", str(marker))

        if step.action == "install_manager":
            return self._install_manager(step, target, report)

        if step.action == "configure_integrations":
            config_path = self.state.get("manager", {}).get("config", "")
            text = Path(config_path).read_text(encoding="utf-8") if config_path else ""
            wanted = [v for v in step.parameters.values() if v]
            missing = [v for v in wanted if v not in text]
            if missing:
                raise RuntimeError(f"manager config lacks integration values {missing}")
            return StepOutcome(step.action, target, "done", "integrations in manager config")

        if step.action == "install_agent":
            return self._install_agent(step, target, report)

        if step.action == "render_network_config":
            manager = self.state.get("manager", {})
            config_dir = self.base / "network-configs"
            config_dir.mkdir(exist_ok=True)
            path = config_dir / f"{target}.cfg"
            path.write_text(
                render_network_config(
                    step.parameters["device"],
                    "127.0.0.1",
                    manager.get("ingest_port", 1514),
                ),
                encoding="utf-8",
            )
            return StepOutcome(step.action, target, "done", str(path))

        raise RuntimeError(f"unknown action {step.action}")

    def _install_manager(self, step: PlanStep, target: str, report: DeploymentReport) -> StepOutcome:
        manager = self.state.get("manager", {})
        if manager:
            health = _health(manager.get("api_port", 0))
            if health and health.get("status") == "ok":
                report.endpoints["manager_api"] = f"http://127.0.0.1:{manager['api_port']}"
                report.endpoints["manager_ingest"] = f"127.0.0.1:{manager['ingest_port']}"
                return StepOutcome(step.action, target, "already", "manager healthy")

        api_port, ingest_port = _free_port(), _free_port()
        data_root = self.base / "manager-data"
        config = {
            "api_host": "127.0.0.1",
            "api_port": api_port,
            "ingest_host": "127.0.0.1",
            "ingest_port": ingest_port,
            "data_root": str(data_root),
            "agents": self.plan.agent_ids(),
        }
        integrations = self.plan.integrations or {}
        if integrations.get("ticket_webhook"):
            config["ticket_webhook_url"] = integrations["ticket_webhook"]
        if integrations.get("reputation_key"):
            config["reputation_api_key"] = integrations["reputation_key"]
        config_path = self.base / "manager.yml"
        config_path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")

        pid = self._spawn(
            "manager",
            [sys.executable, "-m", "soccore.cli", "manager", "serve", "--config", str(config_path)],
        )
        deadline = time.monotonic() + 8.0
        while time.monotonic() < deadline:
            if _health(api_port):
                break
            time.sleep(0.15)
        else:
            raise RuntimeError("manager did not become healthy in time")
        self.state["manager"] = {
            "pid": pid,
            "api_port": api_port,
            "ingest_port": ingest_port,
            "config": str(config_path),
        }
        self._save()
        report.endpoints["manager_api"] = f"http://127.0.0.1:{api_port}"
        report.endpoints["manager_ingest"] = f"127.0.0.1:{ingest_port}"
        return StepOutcome(step.action, target, "done", f"api:{api_port} ingest:{ingest_port}")

    def _install_agent(self, step: PlanStep, target: str, report: DeploymentReport) -> StepOutcome:
        from soccore.agent.config import AgentConfig
        from soccore.agent.install import install_daemon

        agent_id = step.parameters["agent_id"]
        manager = self.state.get("manager")
        if not manager:
            raise RuntimeError("no manager deployed before the agents")
        existing = self.state.get("agents", {}).get(agent_id)
        if existing and _pid_alive(existing["pid"]):
            return StepOutcome(step.action, target, "already", f"agent {agent_id} running")

        agent_dir = self.base / f"agent-{agent_id}"
        config = {
            "agent_id": agent_id,
            "manager_api": f"http://127.0.0.1:{manager['api_port']}",
            "manager_ingest": f"127.0.0.1:{manager['ingest_port']}",
            "ossec_dir": str(agent_dir / "ossec"),
            "descriptor_dir": str(agent_dir / "daemons"),
            "hostname": f"agent{agent_id}",
        }
        agent_dir.mkdir(parents=True, exist_ok=True)
        config_path = agent_dir / "agent.yml"
        config_path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
        install_daemon(
            AgentConfig(
                agent_id=agent_id,
                ossec_dir=config["ossec_dir"],
                descriptor_dir=config["descriptor_dir"],
            ),
            "startup",
            str(config_path),
        )
        pid = self._spawn(
            f"agent-{agent_id}",
            [sys.executable, "-m", "soccore.cli", "agent", "run", "--config", str(config_path)],
        )
        self.state.setdefault("agents", {})[agent_id] = {
            "pid": pid,
            "dir": str(agent_dir),
        }
        self._save()
        return StepOutcome(step.action, target, "done", f"agent {agent_id} pid {pid}")

    def finalize(self, report: DeploymentReport, wait_timeout: float) -> None:
        manager = self.state.get("manager")
        expected = set(self.plan.agent_ids())
        if not manager or not expected:
            return
        deadline = time.monotonic() + wait_timeout
        active: set[str] = set()
        while time.monotonic() < deadline:
            health = _health(manager["api_port"])
            if health:
                active = set(health["agents"]["active_ids"])
                if expected <= active:
                    report.steps.append(
                        StepOutcome(
                            "verify_agents",
                            "-",
                            "done",
                            f"active agents: {sorted(active)}",
                        )
                    )
                    return
            time.sleep(0.2)
        raise StepFailure(
            "verify_agents", f"agents never became active: wanted {sorted(expected)}, saw {sorted(active)}"
        )


class _SshStubRunner:
    """Records the remote command sequence; never touches the network."""

    def __init__(self, base: Path, plan: DeploymentPlan):
        self.base = base
        self.plan = plan

    def _ssh(self, step: PlanStep, command: str) -> str:
        entry = step.entry
        return f"ssh -i {entry.key_path} {entry.ssh_user}@{entry.ip} {command!r}"

    def run_step(self, step: PlanStep, report: DeploymentReport) -> StepOutcome:
        target = step.entry.ip if step.entry else "-"
        lines: list[str] = []
        if step.action == "install_elastic_stub":
            lines = [self._ssh(step, "soc-stack install elastic")]
        elif step.action == "install_kibana_stub":
            lines = [self._ssh(step, "soc-stack install kibana")]
        elif step.action == "install_manager":
            lines = [
                self._ssh(step, "pip install soccore"),
                self._ssh(step, "soc manager serve --config /etc/soc/manager.yml"),
            ]
        elif step.action == "configure_integrations":
            lines = [self._ssh(step, "soc-stack configure integrations /etc/soc/manager.yml")]
        elif step.action == "install_agent":
            agent_id = step.parameters["agent_id"]
            lines = [
                self._ssh(step, "pip install soccore"),
                self._ssh(step, f"soc agent startup --config /etc/soc/agent-{agent_id}.yml"),
                self._ssh(step, f"soc agent run --config /etc/soc/agent-{agent_id}.yml"),
            ]
        elif step.action == "render_network_config":
            manager = self.plan.manager_entry
            config_dir = self.base / "network-configs"
            config_dir.mkdir(exist_ok=True)
            path = config_dir / f"{target}.cfg"
            path.write_text(
                render_network_config(
                    step.parameters["device"], manager.ip if manager else "0.0.0.0", 1514
                ),
                encoding="utf-8",
            )
            lines = [f"# push {path} to {target} over the device management channel"]
        report.transcript.extend(lines)
        return StepOutcome(step.action, target, "done", f"{len(lines)} commands recorded")

    def finalize(self, report: DeploymentReport, wait_timeout: float) -> None:
        return


def teardown(base_dir: str | Path) -> list[int]:
    """Stop every process a local deployment started. Returns the pids signalled."""
    state_file = Path(base_dir) / "state.json"
    if not state_file.exists():
        return []
    state = json.loads(state_file.read_text(encoding="utf-8"))
    pids: list[int] = []
    for agent in state.get("agents", {}).values():
        pids.append(agent["pid"])
    if "manager" in state:
        pids.append(state["manager"]["pid"])
    for pid in pids:
        try:
            os.kill(pid, signal.SIGTERM)
        except (OSError, ProcessLookupError):
            pass
    return pids
