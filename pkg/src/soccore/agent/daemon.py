"""The per-host agent daemon.

One logical control loop owns the plugin runtime table. Each step() it
converges the running set onto the manager-published flag file, launches due
plugin executions, drains completed ones, and pumps the tailers and the FIM
watcher. In real deployments step() runs on wall time and plugin scripts
execute in worker threads; under the simulation harness step() is driven by
a virtual clock and executions complete synchronously.
"""

from __future__ import annotations

import json
import logging
import queue
import shutil
import threading
import zipfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from io import BytesIO
from pathlib import Path

from soccore.clock import SystemClock
from soccore.errors import SocError
from soccore.agent.client import ManagerUnreachable, RequestRejected
from soccore.agent.config import AgentConfig
from soccore.agent.fim import FimWatcher
from soccore.agent.output import parse_plugin_output
from soccore.agent.runner import CompletedExecution, SpawnFailure, SubprocessScriptRunner
from soccore.agent.shipper import LogShipper
from soccore.agent.tailer import LogTailer
from soccore.engine.syslog import (
    UnparsableLine,
    format_syslog_line,
    parse_syslog_line,
    sanitize_token,
)
from soccore.pluginpkg import validate_package

log = logging.getLogger(__name__)

WIRE_TAG = "SOC_NES"
TAIL_PLUGIN_NAME = "logtail"
FIM_PLUGIN_NAME = "syscheck"
DAEMON_PLUGIN_NAME = "agentd"


@dataclass
class PluginRuntime:
    plugin_id: str
    version: str
    interval: float
    name: str
    directory: Path
    next_run: float
    failures: int = 0
    running: bool = False
    quarantined: bool = False
    runs: int = field(default=0)


class AgentDaemon:
    def __init__(
        self,
        config: AgentConfig,
        client,
        shipper: LogShipper,
        clock=None,
        runner=None,
        synchronous_runs: bool = False,
    ):
        config.validate()
        self.config = config
        self.client = client
        self.shipper = shipper
        self.clock = clock or SystemClock()
        self.runner = runner or SubprocessScriptRunner(config.interpreter)
        self.synchronous_runs = synchronous_runs

        root = config.ossec_path()
        self.shared_dir = root / "shared" / "plugins"
        self.download_dir = root / "plugin_download"
        self.shared_dir.mkdir(parents=True, exist_ok=True)
        self.download_dir.mkdir(parents=True, exist_ok=True)

        self.hostname = sanitize_token(config.hostname or _default_hostname())
        self.username = sanitize_token(config.username or _default_username())

        self.runtimes: dict[str, PluginRuntime] = {}
        self.tailers = [LogTailer(entry["path"]) for entry in config.tailed_files]
        self.fim = FimWatcher(config.fim_watches)
        self.on_event = None

        self._last_poll: float | None = None
        self._completions: queue.Queue = queue.Queue()
        self._reported_drops = 0
        self.ar_dead_letters: list[dict] = []

    # -- events / envelope -------------------------------------------------

    def _emit(self, kind: str, **data) -> None:
        if self.on_event is not None:
            self.on_event({"event": kind, "at": self.clock.now(), **data})

    def _now_dt(self) -> datetime:
        return datetime.fromtimestamp(self.clock.now(), tz=timezone.utc).replace(
            tzinfo=None
        )

    def format_and_ship_log(self, plugin_name: str, message: str) -> None:
        line = format_syslog_line(
            self._now_dt(),
            self.hostname,
            self.username,
            f"{WIRE_TAG}: {plugin_name}: {message}",
        )
        self.shipper.ship(line)
        self._emit("line_shipped", plugin=plugin_name, message=message)

    def _ship_diagnostic(self, message: str) -> None:
        log.warning("%s", message)
        self.format_and_ship_log(DAEMON_PLUGIN_NAME, message)

    # -- main loop -----------------------------------------------------------

    def step(self) -> None:
        now = self.clock.now()
        if self._last_poll is None or now - self._last_poll >= self.config.poll_interval:
            self._last_poll = now
            self.sync_once()
        self._drain_completions()
        self._run_due_plugins(now)
        self._drain_completions()
        self._pump_tailers()
        self._pump_fim()
        if self.shipper.drops > self._reported_drops:
            dropped = self.shipper.drops - self._reported_drops
            self._reported_drops = self.shipper.drops
            self._ship_diagnostic(f"dropped {dropped} buffered log lines")
        self.shipper.flush()

    def run_forever(self, stop_event: threading.Event | None = None) -> None:
        stop = stop_event or threading.Event()
        tick = min(1.0, self.config.poll_interval)
        while not stop.is_set():
            try:
                self.step()
            except Exception:
                log.exception("agent step failed")
            self.clock.sleep(tick)

    # -- flag-file sync --------------------------------------------------------

    def sync_once(self) -> None:
        try:
            entries = self.client.fetch_flag_entries(self.config.agent_id)
        except ManagerUnreachable as exc:
            log.debug("manager unreachable, keeping current state: %s", exc)
            return
        except RequestRejected as exc:
            log.warning("flag fetch rejected: %s", exc)
            return

        clone = self.shared_dir / f"{self.config.agent_id}.json"
        clone.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")

        desired = {entry["id"]: str(entry["version"]) for entry in entries}
        for plugin_id in list(self.runtimes):
            if plugin_id not in desired:
                self._terminate_runtime(plugin_id)
                shutil.rmtree(self.download_dir / plugin_id, ignore_errors=True)
                self._emit("plugin_removed", plugin=plugin_id)
        for plugin_id, version in desired.items():
            runtime = self.runtimes.get(plugin_id)
            if runtime is None:
                self._install_plugin(plugin_id, version)
            elif runtime.version != version:
                # any inequality triggers terminate-and-replace
                self._terminate_runtime(plugin_id)
                self._install_plugin(plugin_id, version)

    def _terminate_runtime(self, plugin_id: str) -> None:
        runtime = self.runtimes.pop(plugin_id, None)
        if runtime is not None:
            runtime.running = False
            self._emit("runtime_terminated", plugin=plugin_id, version=runtime.version)

    def _install_plugin(self, plugin_id: str, flag_version: str) -> None:
        try:
            archive = self.client.download_plugin(plugin_id, "minimal")
        except (ManagerUnreachable, RequestRejected) as exc:
            log.warning("download of %s failed, will retry: %s", plugin_id, exc)
            return

        try:
            package = validate_package(archive)
            if package.is_full:
                raise SocError("expected a MINIMAL archive")
            if package.metadata.norm_id != plugin_id:
                raise SocError(
                    f"archive is for {package.metadata.norm_id}, expected {plugin_id}"
                )
        except SocError as exc:
            # quarantined: never executed, but remembered so we do not redownload
            self.runtimes[plugin_id] = PluginRuntime(
                plugin_id=plugin_id,
                version=flag_version,
                interval=0,
                name=plugin_id,
                directory=self.download_dir / plugin_id,
                next_run=float("inf"),
                quarantined=True,
            )
            self._ship_diagnostic(f"plugin {plugin_id} quarantined: {exc}")
            self._emit("plugin_quarantined", plugin=plugin_id, reason=str(exc))
            return

        with zipfile.ZipFile(BytesIO(archive)) as zf:
            members = sorted(n for n in zf.namelist() if not n.endswith("/"))
            target = self.download_dir / plugin_id
            staging = self.download_dir / f".staging-{plugin_id}"
            shutil.rmtree(staging, ignore_errors=True)
            zf.extractall(staging)
        shutil.rmtree(target, ignore_errors=True)
        staging.rename(target)

        meta = package.metadata
        self.runtimes[plugin_id] = PluginRuntime(
            plugin_id=plugin_id,
            version=meta.version,
            interval=float(meta.script_interval),
            name=meta.name,
            directory=target,
            next_run=self.clock.now(),  # first run happens immediately
        )
        self._emit(
            "plugin_fetched", plugin=plugin_id, version=meta.version, members=members
        )

    # -- plugin execution --------------------------------------------------------

    def _run_due_plugins(self, now: float) -> None:
        for runtime in list(self.runtimes.values()):
            if runtime.quarantined or runtime.running or now < runtime.next_run:
                continue
            self._start_execution(runtime)

    def _start_execution(self, runtime: PluginRuntime) -> None:
        runtime.running = True
        script = runtime.directory / "script.py"
        timeout = max(1.0, self.config.run_timeout_factor * runtime.interval)
        if self.synchronous_runs:
            result = self._run_script(script, runtime.directory, timeout)
            self._finish_execution(runtime, result)
        else:
            def work():
                result = self._run_script(script, runtime.directory, timeout)
                self._completions.put((runtime.plugin_id, result))

            threading.Thread(target=work, daemon=True, name=f"plugin-{runtime.plugin_id[:8]}").start()

    def _run_script(self, script, workdir, timeout: float) -> CompletedExecution:
        try:
            return self.runner.run(script, workdir, timeout)
        except SpawnFailure as exc:
            return CompletedExecution(exit_code=-1, stdout="", stderr=str(exc))

    def _drain_completions(self) -> None:
        while True:
            try:
                plugin_id, result = self._completions.get_nowait()
            except queue.Empty:
                return
            runtime = self.runtimes.get(plugin_id)
            if runtime is not None:
                self._finish_execution(runtime, result)

    def _finish_execution(self, runtime: PluginRuntime, result: CompletedExecution) -> None:
        runtime.running = False
        runtime.runs += 1
        runtime.next_run = self.clock.now() + runtime.interval
        if not result.ok:
            runtime.failures += 1
            reason = "timed out" if result.timed_out else f"exited {result.exit_code}"
            self._ship_diagnostic(f"plugin {runtime.plugin_id} run {reason}")
            return
        output = parse_plugin_output(result.stdout)
        self._emit(
            "plugin_run",
            plugin=runtime.plugin_id,
            logs=len(output.logs),
            ar_requests=len(output.ar_requests),
            ignored=output.ignored,
        )
        for message in output.logs:
            self.format_and_ship_log(runtime.name, message)
        for args in output.ar_requests:
            self.send_active_response(runtime.plugin_id, args)
        for diagnostic in output.diagnostics:
            log.info("plugin %s: %s", runtime.plugin_id, diagnostic)

    def send_active_response(self, plugin_id: str, args: list[str], attempts: int = 3) -> None:
        for attempt in range(1, attempts + 1):
            try:
                self.client.post_active_response(plugin_id, args, self.config.agent_id)
                self._emit("ar_sent", plugin=plugin_id, args=list(args))
                return
            except RequestRejected as exc:
                log.warning("active response rejected (%s), not retrying", exc)
                self._emit("ar_rejected", plugin=plugin_id, error=str(exc))
                return
            except ManagerUnreachable as exc:
                if attempt == attempts:
                    self.ar_dead_letters.append({"plugin": plugin_id, "args": list(args)})
                    log.error("active response dead-lettered after %d attempts: %s", attempts, exc)
                    return
                self.clock.sleep(0.5 * attempt)

    # -- tailers and FIM -------------------------------------------------------------

    def _pump_tailers(self) -> None:
        for tailer in self.tailers:
            for line in tailer.poll():
                try:
                    parse_syslog_line(line, self.config.agent_id)
                except UnparsableLine:
                    self.format_and_ship_log(TAIL_PLUGIN_NAME, line)
                else:
                    self.shipper.ship(line)  # already wire format: ship verbatim
                    self._emit("line_shipped", plugin=TAIL_PLUGIN_NAME, message=line)

    def _pump_fim(self) -> None:
        for event in self.fim.poll():
            self.format_and_ship_log(FIM_PLUGIN_NAME, event.message())
            self._emit("fim_event", action=event.action, path=event.path)


def _default_hostname() -> str:
    import socket

    return socket.gethostname()


def _default_username() -> str:
    import getpass

    try:
        return getpass.getuser()
    except Exception:
        return "soc"
