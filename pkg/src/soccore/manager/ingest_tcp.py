"""TCP log ingest listener.

Newline-delimited syslog-format lines. The first line of a connection may be
an agent hello (``AGENT <id>``) attributing the rest of the connection;
connections without a hello are attributed to "000" (external devices such
as routers forwarding syslog).
"""

from __future__ import annotations

import logging
import socketserver
import threading

from soccore.errors import SocError
from soccore.manager.service import ManagerService

log = logging.getLogger(__name__)


class _IngestHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        service: ManagerService = self.server.service  # type: ignore[attr-defined]
        agent_id = "000"
        first = True
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").rstrip("\r\n")
            if first:
                first = False
                if line.startswith("AGENT "):
                    candidate = line.split(None, 1)[1].strip()
                    try:
                        service.register_agent(candidate)
                        agent_id = candidate
                        service.touch_agent(agent_id)
                    except SocError:
                        log.warning("ignoring malformed agent hello %r", line)
                    continue
            try:
                service.ingest_log(line, agent_id=agent_id)
            except Exception:  # fire-and-forget: never break the connection
                log.exception("ingest failed for line %r", line[:200])


class IngestServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str, port: int, service: ManagerService):
        super().__init__((host, port), _IngestHandler)
        self.service = service

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True, name="ingest")
        thread.start()
        return thread
