"""Manager API clients used by the agent.

Two interchangeable implementations: HTTP (real deployments) and direct
in-process calls (the simulation harness). Both classify failures into
retryable ManagerUnreachable and terminal RequestRejected.
"""

from __future__ import annotations

from soccore.errors import SocError


class ManagerUnreachable(SocError):
    """Transient failure: retry on the next tick."""


class RequestRejected(SocError):
    """The manager answered with a definitive refusal; do not retry."""

    def __init__(self, error: str, detail: str = ""):
        super().__init__(f"{error}: {detail}" if detail else error)
        self.error = error


class HttpManagerClient:
    def __init__(self, base_url: str, timeout: float = 5.0):
        import requests

        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _request(self, method: str, path: str, **kwargs):
        import requests

        try:
            response = self._session.request(
                method, self.base_url + path, timeout=self.timeout, **kwargs
            )
        except requests.RequestException as exc:
            raise ManagerUnreachable(str(exc)) from exc
        if response.status_code >= 500:
            raise ManagerUnreachable(f"manager error {response.status_code}")
        if response.status_code >= 400:
            try:
                body = response.json()
                raise RequestRejected(body.get("error", "rejected"), body.get("detail", ""))
            except ValueError:
                raise RequestRejected(f"http {response.status_code}")
        return response

    def fetch_flag_entries(self, agent_id: str) -> list[dict]:
        response = self._request("GET", f"/shared/{agent_id}.json")
        entries = response.json()
        if not isinstance(entries, list):
            raise RequestRejected("BadFlagFile", "flag file is not a JSON list")
        return entries

    def download_plugin(self, plugin_id: str, size: str = "minimal") -> bytes:
        response = self._request("GET", f"/plugins/{plugin_id}.zip", params={"size": size})
        return response.content

    def post_active_response(self, plugin_id: str, args: list[str], agent_id: str) -> None:
        self._request(
            "POST",
            f"/plugins/{plugin_id}/ar",
            json={"args": args, "agent_id": agent_id},
        )


class LocalManagerClient:
    """Direct calls into an in-process ManagerService (simulation mode)."""

    def __init__(self, service):
        self.service = service

    def _call(self, fn, *args, **kwargs):
        from soccore.manager.api import _status_for

        try:
            return fn(*args, **kwargs)
        except SocError as exc:
            if _status_for(exc) >= 500:
                raise ManagerUnreachable(str(exc)) from exc
            raise RequestRejected(exc.tag, str(exc)) from exc

    def fetch_flag_entries(self, agent_id: str) -> list[dict]:
        return self._call(self.service.api_get_flag_file, agent_id)["entries"]

    def download_plugin(self, plugin_id: str, size: str = "minimal") -> bytes:
        return self._call(self.service.api_export_plugin, plugin_id, size)

    def post_active_response(self, plugin_id: str, args: list[str], agent_id: str) -> None:
        self._call(self.service.api_active_response, plugin_id, args, agent_id)
