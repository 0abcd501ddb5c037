"""Log shipping with a bounded replay buffer.

Lines are queued locally and flushed in order over the transport. While the
manager is down the buffer holds up to ship_buffer lines; overflow drops the
oldest (availability over completeness) and counts the loss so the daemon can
report it once the link is back.
"""

from __future__ import annotations

import logging
import socket
from collections import deque
from pathlib import Path

log = logging.getLogger(__name__)


class TcpShipTransport:
    """Persistent TCP connection; reconnects lazily and re-sends the hello."""

    def __init__(self, host: str, port: int, agent_id: str, timeout: float = 3.0):
        self.host = host
        self.port = port
        self.agent_id = agent_id
        self.timeout = timeout
        self._sock: socket.socket | None = None

    def send_line(self, line: str) -> None:
        if self._sock is None:
            sock = socket.create_connection((self.host, self.port), timeout=self.timeout)
            sock.sendall(f"AGENT {self.agent_id}\n".encode("utf-8"))
            self._sock = sock
        try:
            self._sock.sendall(line.encode("utf-8") + b"\n")
        except OSError:
            self.close()
            raise

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.close()
            finally:
                self._sock = None


class LocalShipTransport:
    """Feed lines straight into an in-process manager (simulation mode)."""

    def __init__(self, service, agent_id: str):
        self.service = service
        self.agent_id = agent_id

    def send_line(self, line: str) -> None:
        self.service.ingest_log(line, agent_id=self.agent_id)

    def close(self) -> None:
        pass


class LogShipper:
    def __init__(self, transport, buffer_size: int = 10000, mirror_path: str | Path | None = None):
        self.transport = transport
        self.buffer: deque[str] = deque()
        self.buffer_size = buffer_size
        self.drops = 0
        self.shipped = 0
        self.mirror_path = Path(mirror_path) if mirror_path else None

    def ship(self, line: str) -> None:
        """Queue one line for delivery (and mirror it locally)."""
        if self.mirror_path is not None:
            try:
                with self.mirror_path.open("a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
            except OSError as exc:
                log.warning("cannot mirror log line: %s", exc)
        if len(self.buffer) >= self.buffer_size:
            self.buffer.popleft()
            self.drops += 1
        self.buffer.append(line)
        self.flush()

    def flush(self) -> None:
        """Deliver buffered lines in order; stop at the first failure."""
        while self.buffer:
            line = self.buffer[0]
            try:
                self.transport.send_line(line)
            except Exception as exc:
                log.debug("ship failed, %d lines buffered: %s", len(self.buffer), exc)
                return
            self.buffer.popleft()
            self.shipped += 1

    def close(self) -> None:
        self.flush()
        self.transport.close()
