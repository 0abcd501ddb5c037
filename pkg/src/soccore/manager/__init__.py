"""Manager: plugin registry, REST API, log ingest, analysis, integrations."""

from soccore.manager.config import ManagerConfig
from soccore.manager.service import ManagerService

__all__ = ["ManagerConfig", "ManagerService"]
