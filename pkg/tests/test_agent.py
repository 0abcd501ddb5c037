"""Agent daemon: sync convergence, execution, shipping, tailers, FIM."""

import threading
import time
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from soccore.clock import SystemClock, VirtualClock
from soccore.agent.client import (
    LocalManagerClient,
    ManagerUnreachable,
    RequestRejected,
)
from soccore.agent.config import AgentConfig
from soccore.agent.daemon import AgentDaemon
from soccore.agent.fim import FimWatcher
from soccore.agent.install import DESCRIPTOR_NAME, install_daemon
from soccore.agent.output import parse_plugin_output
from soccore.agent.runner import CompletedExecution, SubprocessScriptRunner
from soccore.agent.shipper import LocalShipTransport, LogShipper
from soccore.agent.tailer import LogTailer
from soccore.engine.syslog import parse_syslog_line

from builders import build_archive, make_service

BASE = 1705276800.0
PID = "1" * 32


class ListTransport:
    def __init__(self):
        self.lines = []
        self.down = False

    def send_line(self, line):
        if self.down:
            raise ConnectionError("transport down")
        self.lines.append(line)

    def close(self):
        pass


class FakeRunner:
    """Instant executions with scripted stdout; tracks concurrency per script."""

    def __init__(self, stdout=""):
        self.stdout = stdout
        self.calls = []
        self._active = {}
        self.max_concurrent = 0
        self._lock = threading.Lock()

    def run(self, script_path, workdir, timeout):
        key = str(workdir)
        with self._lock:
            self._active[key] = self._active.get(key, 0) + 1
            self.max_concurrent = max(self.max_concurrent, self._active[key])
        self.calls.append(key)
        with self._lock:
            self._active[key] -= 1
        return CompletedExecution(exit_code=0, stdout=self.stdout, stderr="")


def make_agent(tmp_path, service, agent_id="001", runner=None, clock=None, **config_kwargs):
    clock = clock or VirtualClock(BASE)
    config = AgentConfig(
        agent_id=agent_id,
        ossec_dir=str(tmp_path / f"agent-{agent_id}"),
        hostname=f"agent{agent_id}",
        username="soc",
        **config_kwargs,
    )
    shipper = LogShipper(LocalShipTransport(service, agent_id))
    daemon = AgentDaemon(
        config,
        LocalManagerClient(service),
        shipper,
        clock=clock,
        runner=runner or FakeRunner(),
        synchronous_runs=True,
    )
    return daemon, clock


class TestParsePluginOutput:
    def test_mixed_output(self):
        out = parse_plugin_output("LOG: /etc/passwd read\nARY: block 10.0.3.10\n")
        assert out.logs == ["/etc/passwd read"]
        assert out.ar_requests == [["block", "10.0.3.10"]]
        assert out.ignored == 0

    def test_arn_reserved(self):
        out = parse_plugin_output("ARN: x")
        assert out.logs == [] and out.ar_requests == []
        assert out.ignored == 1
        assert out.diagnostics == []

    def test_empty(self):
        out = parse_plugin_output("")
        assert out.logs == [] and out.ar_requests == [] and out.ignored == 0

    def test_ary_collapses_empty_tokens(self):
        out = parse_plugin_output("ARY: a  b   c")
        assert out.ar_requests == [["a", "b", "c"]]

    def test_unknown_line_diagnosed(self):
        out = parse_plugin_output("hello world")
        assert out.ignored == 1
        assert len(out.diagnostics) == 1

    @given(st.lists(st.text(st.characters(exclude_characters="\x00"), max_size=40), max_size=30))
    def test_totality_accounting(self, lines):
        text = "\n".join(lines)
        out = parse_plugin_output(text)
        nonempty = sum(1 for line in text.splitlines() if line.strip())
        assert len(out.logs) + len(out.ar_requests) + out.ignored == nonempty


class TestSyncLoop:
    def test_case1_new_plugin_installed_and_run(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True, interval=60))
        runner = FakeRunner(stdout="LOG: TestPlugin alpha beta\n")
        daemon, clock = make_agent(tmp_path, service, runner=runner)
        daemon.step()
        assert PID in daemon.runtimes
        assert daemon.runtimes[PID].version == "0.0.1"
        assert (daemon.download_dir / PID / "script.py").exists()
        assert runner.calls  # first run happens within the first tick
        # the shipped line produced a manager-side alert
        assert service.api_list_alerts()["total"] == 1

    def test_case2_version_change_both_directions(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        daemon, clock = make_agent(tmp_path, service)
        daemon.step()
        assert daemon.runtimes[PID].version == "0.0.1"

        meta = service.api_get_metadata(PID)
        service.api_update_metadata(PID, meta.replace(version="0.1.0"))
        clock.advance(3)
        daemon.step()
        assert daemon.runtimes[PID].version == "0.1.0"

        # downgrade is also "not equal": terminate and replace
        meta = service.api_get_metadata(PID)
        service.api_update_metadata(PID, meta.replace(version="0.0.9"))
        clock.advance(3)
        daemon.step()
        assert daemon.runtimes[PID].version == "0.0.9"

    def test_case3_removal_terminates_and_deletes(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        daemon, clock = make_agent(tmp_path, service)
        daemon.step()
        assert PID in daemon.runtimes

        service.disable_plugin(PID)
        clock.advance(3)
        daemon.step()
        assert daemon.runtimes == {}
        assert not (daemon.download_dir / PID).exists()

    def test_manager_unreachable_keeps_state(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        daemon, clock = make_agent(tmp_path, service)
        daemon.step()

        broken = ManagerUnreachable("down")

        class DownClient:
            def fetch_flag_entries(self, agent_id):
                raise broken

        daemon.client = DownClient()
        clock.advance(3)
        daemon.step()
        assert PID in daemon.runtimes  # unchanged, retried next tick

    def test_local_clone_written(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        daemon, _ = make_agent(tmp_path, service)
        daemon.step()
        clone = daemon.shared_dir / "001.json"
        assert clone.exists()
        assert PID in clone.read_text()

    def test_corrupt_download_quarantined(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        runner = FakeRunner()

        class CorruptClient(LocalManagerClient):
            def download_plugin(self, plugin_id, size="minimal"):
                return b"garbage bytes"

        daemon, clock = make_agent(tmp_path, service, runner=runner)
        daemon.client = CorruptClient(service)
        daemon.step()
        assert daemon.runtimes[PID].quarantined is True
        clock.advance(10)
        daemon.step()
        assert runner.calls == []  # never executed


class TestExecution:
    def test_interval_spacing_exact_in_virtual_time(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True, interval=60))
        runner = FakeRunner()
        daemon, clock = make_agent(tmp_path, service, runner=runner)
        run_times = []
        for _ in range(130):
            daemon.step()
            if len(runner.calls) > len(run_times):
                run_times.append(clock.now() - BASE)
            clock.advance(1)
        assert run_times[0] == 0.0  # enabled before boot: first poll installs and runs
        assert [b - a for a, b in zip(run_times, run_times[1:])] == [60.0, 60.0]

    def test_two_logs_ship_in_emission_order(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))
        runner = FakeRunner(stdout="LOG: TestPlugin first 1\nLOG: TestPlugin second 2\n")
        daemon, _ = make_agent(tmp_path, service, runner=runner)
        daemon.step()
        shipped = [row["line"] for row in service.ingest_journal]
        assert len(shipped) == 2
        assert "first 1" in shipped[0] and "second 2" in shipped[1]

    def test_failed_run_ships_diagnostic_only(self, tmp_path):
        service = make_service(tmp_path)
        service.api_import_plugin(build_archive(plugin_id=PID, enabled=True))

        class FailingRunner:
            def run(self, script_path, workdir, timeout):
                return CompletedExecution(exit_code=1, stdout="LOG: should not ship\n", stderr="")

        daemon, _ = make_agent(tmp_path, service, runner=FailingRunner())
        daemon.step()
        assert daemon.runtimes[PID].failures == 1
        assert service.api_list_alerts()["total"] == 0
        journal = [row["line"] for row in service.ingest_journal]
        assert any("agentd" in line and "exited 1" in line for line in journal)
        assert not any("should not ship" in line for line in journal)

    def test_single_flight_with_slow_real_script(self, tmp_path):
        service = make_service(tmp_path)
        slow_script = "import time\ntime.sleep(0.4)\nprint('LOG: TestPlugin a b')\n"
        service.api_import_plugin(
            build_archive(plugin_id=PID, enabled=True, interval=60, script=slow_script)
        )
        config = AgentConfig(
            agent_id="001", ossec_dir=str(tmp_path / "rt"), hostname="h", username="u",
        )
        shipper = LogShipper(LocalShipTransport(service, "001"))
        daemon = AgentDaemon(
            config,
            LocalManagerClient(service),
            shipper,
            clock=SystemClock(),
            synchronous_runs=False,
        )
        daemon.step()  # installs and starts the threaded run
        started = time.time()
        launches = 0
        while time.time() - started < 0.8:
            before = daemon.runtimes[PID].runs
            daemon.step()
            launches = max(launches, daemon.runtimes[PID].runs - before)
            time.sleep(0.02)
        runtime = daemon.runtimes[PID]
        assert runtime.runs == 1  # one completion despite many steps
        assert service.api_list_alerts()["total"] == 1

    def test_timeout_kills_script(self, tmp_path):
        runner = SubprocessScriptRunner("python3")
        script = tmp_path / "script.py"
        script.write_text("import time\ntime.sleep(5)\n")
        result = runner.run(script, tmp_path, timeout=0.4)
        assert result.timed_out is True
        assert not result.ok


class TestActiveResponseSend:
    def test_rejected_not_retried(self, tmp_path):
        service = make_service(tmp_path)
        daemon, _ = make_agent(tmp_path, service)
        calls = []

        class Rejecting:
            def post_active_response(self, plugin_id, args, agent_id):
                calls.append(args)
                raise RequestRejected("PluginDisabled", "off")

        daemon.client = Rejecting()
        daemon.send_active_response(PID, ["a"])
        assert len(calls) == 1

    def test_unreachable_retried_then_dead_lettered(self, tmp_path):
        service = make_service(tmp_path)
        daemon, _ = make_agent(tmp_path, service)
        calls = []

        class Flaky:
            def post_active_response(self, plugin_id, args, agent_id):
                calls.append(args)
                raise ManagerUnreachable("down")

        daemon.client = Flaky()
        daemon.send_active_response(PID, ["a"], attempts=3)
        assert len(calls) == 3
        assert daemon.ar_dead_letters == [{"plugin": PID, "args": ["a"]}]


class TestShipper:
    def test_buffering_and_ordered_replay(self):
        transport = ListTransport()
        shipper = LogShipper(transport, buffer_size=100)
        transport.down = True
        for index in range(5):
            shipper.ship(f"line {index}")
        assert transport.lines == []
        transport.down = False
        shipper.flush()
        assert transport.lines == [f"line {i}" for i in range(5)]

    def test_overflow_drops_oldest(self):
        transport = ListTransport()
        transport.down = True
        shipper = LogShipper(transport, buffer_size=3)
        for index in range(5):
            shipper.ship(f"line {index}")
        assert shipper.drops == 2
        transport.down = False
        shipper.flush()
        assert transport.lines == ["line 2", "line 3", "line 4"]

    def test_mirror_file(self, tmp_path):
        mirror = tmp_path / "plugin_syslog.log"
        shipper = LogShipper(ListTransport(), mirror_path=mirror)
        shipper.ship("hello")
        assert mirror.read_text() == "hello\n"


class TestWireRoundTrip:
    @given(
        st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,15}", fullmatch=True),
        st.text(st.characters(codec="utf-8", exclude_characters="\r\n\x00"), max_size=60),
    )
    def test_plugin_log_round_trip(self, plugin_name, message):
        from datetime import datetime
        from soccore.engine.syslog import format_syslog_line

        line = format_syslog_line(
            datetime(2024, 1, 15, 0, 0, 3), "host1", "soc",
            f"SOC_NES: {plugin_name}: {message}",
        )
        event = parse_syslog_line(line, "001")
        prefix = f"SOC_NES: {plugin_name}: "
        assert event.message.startswith(prefix)
        assert event.message[len(prefix):] == message


class TestTailer:
    def test_preexisting_content_skipped(self, tmp_path):
        path = tmp_path / "log"
        path.write_text("old line\n")
        tailer = LogTailer(path)
        assert tailer.poll() == []
        with path.open("a") as fh:
            fh.write("new line\n")
        assert tailer.poll() == ["new line"]

    def test_late_created_file_read_from_start(self, tmp_path):
        path = tmp_path / "log"
        tailer = LogTailer(path)
        assert tailer.poll() == []
        path.write_text("first\n")
        assert tailer.poll() == ["first"]

    def test_rotation(self, tmp_path):
        path = tmp_path / "log"
        path.write_text("")
        tailer = LogTailer(path)
        tailer.poll()
        with path.open("a") as fh:
            fh.write("a\n")
        assert tailer.poll() == ["a"]
        path.unlink()
        path.write_text("b\n")  # rotated: new inode or shorter file
        assert tailer.poll() == ["b"]

    def test_partial_lines_buffered(self, tmp_path):
        path = tmp_path / "log"
        path.write_text("")
        tailer = LogTailer(path)
        tailer.poll()
        with path.open("a") as fh:
            fh.write("par")
        assert tailer.poll() == []
        with path.open("a") as fh:
            fh.write("tial\n")
        assert tailer.poll() == ["partial"]


class TestFim:
    def test_add_modify_delete_sequence(self, tmp_path):
        watch = tmp_path / "watch"
        watch.mkdir()
        watcher = FimWatcher([str(watch)])
        assert watcher.poll() == []  # baseline primes silently

        target = watch / "f.txt"
        target.write_text("one")
        events = watcher.poll()
        assert [(e.action, Path(e.path).name) for e in events] == [("added", "f.txt")]
        assert events[0].sha256 and "sha256=" in events[0].message()

        target.write_text("two")
        assert [e.action for e in watcher.poll()] == ["modified"]

        target.write_text("two")  # identical content: no event
        assert watcher.poll() == []

        target.unlink()
        events = watcher.poll()
        assert [e.action for e in events] == ["deleted"]
        assert events[0].message().endswith("deleted")

    def test_preexisting_files_are_baseline(self, tmp_path):
        watch = tmp_path / "watch"
        watch.mkdir()
        (watch / "old.txt").write_text("x")
        watcher = FimWatcher([str(watch)])
        assert watcher.poll() == []


class TestInstallDaemon:
    def test_startup_and_delstartup(self, tmp_path):
        config = AgentConfig(
            agent_id="001",
            ossec_dir=str(tmp_path / "ossec"),
            descriptor_dir=str(tmp_path / "descriptors"),
        )
        path = install_daemon(config, "startup", "agent.yml")
        assert path.name == DESCRIPTOR_NAME
        assert path.exists()
        assert "soc agent run --config agent.yml" in path.read_text()
        assert (tmp_path / "ossec" / "shared" / "plugins").is_dir()
        assert (tmp_path / "ossec" / "plugin_download").is_dir()

        install_daemon(config, "startup", "agent.yml")  # idempotent
        assert path.exists()

        install_daemon(config, "delstartup")
        assert not path.exists()
        install_daemon(config, "delstartup")  # also idempotent
