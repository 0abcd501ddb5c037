"""soccore: a plug-and-play SOC core.

A manager/agent system for distributing and supervising programmable
intrusion-detection plugins, with a log decoder/rule analysis engine,
active response, ticketing and reputation integrations, and a
topology-driven deployment tool.
"""

__version__ = "0.1.0"
