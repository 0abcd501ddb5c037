"""Deployment tooling: topology format, credentials vault, planner, executor."""

from soccore.autoconfig.vault import (
    VaultError,
    WrongPassphraseOrTampered,
    vault_decrypt,
    vault_encrypt,
)
from soccore.autoconfig.topology import (
    BadLine,
    DEVICE_TYPES,
    TopologyEntry,
    UnknownDeviceType,
    format_topology,
    parse_topology,
)
from soccore.autoconfig.formatter import EmptyTopology, InvalidAnswer, FormatterAnswers, formatter
from soccore.autoconfig.planner import (
    DeploymentPlan,
    DuplicateIp,
    NoManager,
    PlanStep,
    plan_deployment,
)
from soccore.autoconfig.executor import StepFailure, execute_plan

__all__ = [
    "BadLine",
    "DEVICE_TYPES",
    "DeploymentPlan",
    "DuplicateIp",
    "EmptyTopology",
    "FormatterAnswers",
    "InvalidAnswer",
    "NoManager",
    "PlanStep",
    "StepFailure",
    "TopologyEntry",
    "UnknownDeviceType",
    "VaultError",
    "WrongPassphraseOrTampered",
    "execute_plan",
    "format_topology",
    "formatter",
    "parse_topology",
    "plan_deployment",
    "vault_decrypt",
    "vault_encrypt",
]
