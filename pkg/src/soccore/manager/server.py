"""Manager process wiring: HTTP API + TCP ingest + delivery worker."""

from __future__ import annotations

import logging

import uvicorn

from soccore.manager.api import create_app
from soccore.manager.config import ManagerConfig
from soccore.manager.ingest_tcp import IngestServer
from soccore.manager.service import ManagerService

log = logging.getLogger(__name__)


def serve(config: ManagerConfig) -> None:
    """Run the manager until interrupted. Blocking."""
    service = ManagerService(config)
    service.notifier.start()
    ingest = IngestServer(config.ingest_host, config.ingest_port, service)
    ingest.start_background()
    log.info(
        "manager up: api=%s:%s ingest=%s:%s data=%s",
        config.api_host,
        config.api_port,
        config.ingest_host,
        config.ingest_port,
        config.data_root,
    )
    app = create_app(service)
    kwargs = {}
    if config.tls_certfile:
        kwargs["ssl_certfile"] = config.tls_certfile
        kwargs["ssl_keyfile"] = config.tls_keyfile or None
    try:
        uvicorn.run(
            app,
            host=config.api_host,
            port=config.api_port,
            log_level="warning",
            **kwargs,
        )
    finally:
        ingest.shutdown()
        service.close()
