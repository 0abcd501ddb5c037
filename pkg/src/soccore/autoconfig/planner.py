"""Deployment planning: topology entries to an ordered step list.

Step order follows role precedence: elastic, then kibana, then the manager,
then integrations, then agents, then network-device config rendering. Agent
ids are assigned sequentially from 001 in topology order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from soccore.errors import SocError
from soccore.autoconfig.topology import AGENT_TYPES, NETWORK_TYPES, TopologyEntry

ROLE_RANK = {
    "elastic": 0,
    "kibana": 1,
    "wazuh": 2,
    "integrations": 3,
    "linux": 4,
    "windows": 4,
    "cisco": 5,
    "juniper": 5,
}


class NoManager(SocError):
    pass


class DuplicateIp(SocError):
    def __init__(self, ip: str):
        super().__init__(f"ip {ip!r} appears more than once in the topology")


class TooManyManagers(SocError):
    pass


@dataclass
class PlanStep:
    action: str
    rank: int
    entry: TopologyEntry | None = None
    parameters: dict = field(default_factory=dict)

    def describe(self) -> str:
        target = self.entry.ip if self.entry else "-"
        return f"{self.action} @ {target}"


@dataclass
class DeploymentPlan:
    steps: list[PlanStep]
    integrations: dict | None = None

    @property
    def manager_entry(self) -> TopologyEntry | None:
        for step in self.steps:
            if step.action == "install_manager":
                return step.entry
        return None

    def agent_ids(self) -> list[str]:
        return [
            step.parameters["agent_id"]
            for step in self.steps
            if step.action == "install_agent"
        ]


_ACTION_BY_ROLE = {
    "elastic": "install_elastic_stub",
    "kibana": "install_kibana_stub",
    "wazuh": "install_manager",
}


def plan_deployment(
    entries: list[TopologyEntry], integrations: dict | None = None
) -> DeploymentPlan:
    seen_ips: set[str] = set()
    for entry in entries:
        if entry.ip in seen_ips:
            raise DuplicateIp(entry.ip)
        seen_ips.add(entry.ip)

    managers = [e for e in entries if e.device_type == "wazuh"]
    if len(managers) > 1:
        raise TooManyManagers("desk scale supports a single manager per topology")
    agents = [e for e in entries if e.device_type in AGENT_TYPES]
    network = [e for e in entries if e.device_type in NETWORK_TYPES]
    if (agents or network) and not managers:
        raise NoManager("agents and network devices need a manager to report to")

    steps: list[PlanStep] = []
    for role in ("elastic", "kibana", "wazuh"):
        for entry in entries:
            if entry.device_type == role:
                steps.append(PlanStep(_ACTION_BY_ROLE[role], ROLE_RANK[role], entry))
    if integrations and managers:
        steps.append(
            PlanStep(
                "configure_integrations",
                ROLE_RANK["integrations"],
                managers[0],
                dict(integrations),
            )
        )
    next_id = 1
    for entry in entries:
        if entry.device_type in AGENT_TYPES:
            steps.append(
                PlanStep(
                    "install_agent",
                    ROLE_RANK[entry.device_type],
                    entry,
                    {"agent_id": f"{next_id:03d}", "os": entry.device_type},
                )
            )
            next_id += 1
    for entry in entries:
        if entry.device_type in NETWORK_TYPES:
            steps.append(
                PlanStep(
                    "render_network_config",
                    ROLE_RANK[entry.device_type],
                    entry,
                    {"device": entry.device_type},
                )
            )
    return DeploymentPlan(steps=steps, integrations=dict(integrations) if integrations else None)
