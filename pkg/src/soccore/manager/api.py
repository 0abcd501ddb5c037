"""HTTP API over the manager service.

Plugin endpoints follow the fixed path scheme (including the .zip/.json
suffixes); plumbing endpoints add flag files, alerts, tickets and health.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from soccore.errors import SocError
from soccore.manager.registry import (
    AlreadyEnabled,
    DuplicatePlugin,
    NotEnabled,
    UnknownAgent,
    UnknownPlugin,
)
from soccore.manager.response import ExecutionFailure, ExecutionTimeout, PluginDisabled
from soccore.manager.service import ManagerService
from soccore.manager.tickets import AlreadyClosed, UnknownAlert, UnknownTicket
from soccore.pluginpkg import make_template, parse_metadata

_STATUS_BY_ERROR = (
    ((UnknownPlugin, UnknownAgent, UnknownAlert, UnknownTicket), 404),
    ((DuplicatePlugin, AlreadyEnabled, NotEnabled, AlreadyClosed, PluginDisabled), 409),
    ((ExecutionFailure, ExecutionTimeout), 500),
)


def _status_for(exc: SocError) -> int:
    for classes, status in _STATUS_BY_ERROR:
        if isinstance(exc, classes):
            return status
    return 400


def _meta_doc(meta) -> dict:
    return json.loads(meta.to_json_text())


def create_app(service: ManagerService) -> FastAPI:
    app = FastAPI(title="soc-manager", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(SocError)
    async def soc_error_handler(_request: Request, exc: SocError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": exc.tag, "detail": str(exc)},
        )

    @app.get("/plugins/")
    def list_plugins():
        return [_meta_doc(meta) for meta in service.api_list_plugins()]

    @app.post("/plugins/", status_code=201)
    async def import_plugin(request: Request):
        archive = await request.body()
        meta = service.api_import_plugin(archive)
        return _meta_doc(meta)

    @app.get("/plugins/template-plugin.zip")
    def template_plugin():
        return Response(content=make_template(), media_type="application/zip")

    @app.get("/plugins/{plugin_id}.zip")
    def export_plugin(plugin_id: str, size: str = "full"):
        if size not in ("full", "minimal"):
            return JSONResponse(
                status_code=400,
                content={"error": "BadSize", "detail": f"size must be full or minimal, got {size!r}"},
            )
        archive = service.api_export_plugin(plugin_id, size)
        return Response(content=archive, media_type="application/zip")

    @app.get("/plugins/{plugin_id}.json")
    def get_metadata(plugin_id: str):
        return _meta_doc(service.api_get_metadata(plugin_id))

    @app.post("/plugins/{plugin_id}.json")
    async def update_metadata(plugin_id: str, request: Request):
        body = await request.body()
        meta = parse_metadata(body.decode("utf-8"))
        return _meta_doc(service.api_update_metadata(plugin_id, meta))

    @app.delete("/plugins/{plugin_id}")
    def delete_plugin(plugin_id: str):
        service.api_delete_plugin(plugin_id)
        return {"status": "ok"}

    @app.post("/plugins/{plugin_id}/ar")
    async def active_response(plugin_id: str, request: Request):
        body = json.loads((await request.body()) or b"{}")
        args = body.get("args", [])
        agent_id = body.get("agent_id", "000")
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            return JSONResponse(
                status_code=400,
                content={"error": "BadArgs", "detail": "args must be a list of strings"},
            )
        record = service.api_active_response(plugin_id, args, agent_id)
        return record.to_record()

    @app.get("/shared/{agent_id}.json")
    def flag_file(agent_id: str):
        return service.api_get_flag_file(agent_id)["entries"]

    @app.get("/alerts")
    def list_alerts(
        min_level: int | None = None,
        max_level: int | None = None,
        agent: str | None = None,
        since: str | None = None,
        until: str | None = None,
        limit: int = 50,
        offset: int = 0,
    ):
        return service.api_list_alerts(
            min_level=min_level,
            max_level=max_level,
            agent=agent,
            since=since,
            until=until,
            limit=limit,
            offset=offset,
        )

    @app.post("/tickets", status_code=201)
    async def create_ticket(request: Request):
        body = json.loads((await request.body()) or b"{}")
        ticket = service.api_create_ticket(
            alert_id=body.get("alert_id"), assignee=body.get("assignee", "")
        )
        return ticket.to_record()

    @app.get("/tickets")
    def list_tickets(status: str | None = None):
        return [t.to_record() for t in service.api_list_tickets(status)]

    @app.post("/tickets/{ticket_id}/close")
    def close_ticket(ticket_id: int):
        return service.api_close_ticket(ticket_id).to_record()

    @app.get("/health")
    def health():
        return service.health()

    return app
