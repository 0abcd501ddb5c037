"""Agent daemon: plugin sync/execution, log shipping, tailing, FIM."""

from soccore.agent.config import AgentConfig, load_agent_config
from soccore.agent.daemon import AgentDaemon
from soccore.agent.output import PluginOutput, parse_plugin_output

__all__ = [
    "AgentConfig",
    "AgentDaemon",
    "PluginOutput",
    "load_agent_config",
    "parse_plugin_output",
]
