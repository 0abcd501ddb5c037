"""Plugin stdout protocol.

Scripts talk to the daemon through prefixed stdout lines:

    LOG: <message>        ship to the manager
    ARY: <arg> <arg> ...  request the manager-side response script
    ARN: ...              reserved, ignored

Anything else is counted as ignored and surfaced as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class PluginOutput:
    logs: list[str] = field(default_factory=list)
    ar_requests: list[list[str]] = field(default_factory=list)
    ignored: int = 0
    diagnostics: list[str] = field(default_factory=list)


def parse_plugin_output(text: str) -> PluginOutput:
    """Total function: every nonempty line lands in exactly one bucket."""
    out = PluginOutput()
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("LOG: "):
            out.logs.append(line[len("LOG: "):])
        elif line.startswith("ARY: "):
            args = [token for token in line[len("ARY: "):].split(" ") if token]
            out.ar_requests.append(args)
        elif line.startswith("ARN: "):
            out.ignored += 1  # reserved for future use
        else:
            out.ignored += 1
            out.diagnostics.append(f"unrecognized plugin output line: {line!r}")
    return out
