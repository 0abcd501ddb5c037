"""Scenario files: TOML scripts replayed by the simulation harness.

A scenario declares the manager setup, the agents to boot, plugins to import
at boot, a strictly increasing timeline of actions, and the outcomes expected
once the timeline has played out.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from soccore.errors import SocError

ACTIONS = (
    "inject_log",
    "file_op",
    "enable_plugin",
    "disable_plugin",
    "bump_version",
    "run_formatter_answers",
)

FILE_OPS = ("write", "append", "delete")


class ScenarioParseError(SocError):
    pass


@dataclass
class TimelineEvent:
    at: float
    action: str
    params: dict = field(default_factory=dict)


@dataclass
class AgentSpec:
    id: str
    tail: list[str] = field(default_factory=list)
    fim: list[str] = field(default_factory=list)


@dataclass
class PluginSpec:
    directory: str = ""
    template: bool = False
    enabled: bool | None = None


@dataclass
class Expectations:
    alerts: list[dict] | None = None
    alert_total: int | None = None
    alerts_at_level: dict[int, int] = field(default_factory=dict)
    tickets: int | None = None
    ar_invocations: list[list[str]] | None = None
    webhook_deliveries: int | None = None
    reputation_scans: int | None = None
    no_drops: bool = False


@dataclass
class Scenario:
    name: str
    path: Path
    manager_agents: list[str]
    agents: list[AgentSpec]
    plugins: list[PluginSpec]
    timeline: list[TimelineEvent]
    expect: Expectations
    end_at: float
    ticket_threshold: int = 5
    auto_ticket_level: int = 15
    webhook: bool = False
    reputation_verdicts: list[dict] = field(default_factory=list)
    base_time: float = 1705276800.0  # 2024-01-15T00:00:00Z


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ScenarioParseError(f"{where}: missing {key!r}")
    value = table[key]
    if not isinstance(value, kind):
        raise ScenarioParseError(f"{where}: {key!r} must be {kind.__name__}")
    return value


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ScenarioParseError(f"cannot load scenario {path}: {exc}") from exc

    name = data.get("name", path.stem)
    manager = data.get("manager", {})
    manager_agents = list(manager.get("agents", []))

    agents = []
    for raw in data.get("agents", []):
        agents.append(
            AgentSpec(
                id=_require(raw, "id", str, "agents"),
                tail=list(raw.get("tail", [])),
                fim=list(raw.get("fim", [])),
            )
        )

    plugins = []
    for raw in data.get("plugins", []):
        spec = PluginSpec(
            directory=raw.get("dir", ""),
            template=bool(raw.get("template", False)),
            enabled=raw.get("enabled"),
        )
        if not spec.directory and not spec.template:
            raise ScenarioParseError("plugins: need dir or template=true")
        plugins.append(spec)

    timeline: list[TimelineEvent] = []
    last_at = float("-inf")
    for raw in data.get("timeline", []):
        at = float(_require(raw, "at", (int, float), "timeline"))
        action = _require(raw, "action", str, "timeline")
        if action not in ACTIONS:
            raise ScenarioParseError(f"timeline: unknown action {action!r}")
        if at <= last_at:
            raise ScenarioParseError("timeline must be strictly increasing in time")
        last_at = at
        params = {k: v for k, v in raw.items() if k not in ("at", "action")}
        if action == "file_op" and params.get("op") not in FILE_OPS:
            raise ScenarioParseError(f"timeline: file_op op must be one of {FILE_OPS}")
        timeline.append(TimelineEvent(at=at, action=action, params=params))

    raw_expect = data.get("expect", {})
    alerts = raw_expect.get("alerts")
    if alerts is not None:
        alerts = [dict(a) for a in alerts]
    expect = Expectations(
        alerts=alerts,
        alert_total=raw_expect.get("alert_total"),
        alerts_at_level={
            int(k): int(v) for k, v in raw_expect.get("alerts_at_level", {}).items()
        },
        tickets=raw_expect.get("tickets"),
        ar_invocations=raw_expect.get("ar_invocations"),
        webhook_deliveries=raw_expect.get("webhook_deliveries"),
        reputation_scans=raw_expect.get("reputation_scans"),
        no_drops=bool(raw_expect.get("no_drops", False)),
    )

    default_end = (timeline[-1].at if timeline else 0.0) + 8.0
    return Scenario(
        name=name,
        path=path,
        manager_agents=manager_agents,
        agents=agents,
        plugins=plugins,
        timeline=timeline,
        expect=expect,
        end_at=float(data.get("end_at", default_end)),
        ticket_threshold=int(manager.get("ticket_threshold", 5)),
        auto_ticket_level=int(manager.get("auto_ticket_level", 15)),
        webhook=bool(manager.get("webhook", False)),
        reputation_verdicts=list(manager.get("reputation", [])),
        base_time=float(data.get("base_time", 1705276800.0)),
    )
