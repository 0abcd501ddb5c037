"""Active response execution: supervised runs of installed response scripts."""

from __future__ import annotations

import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

from soccore.errors import SocError


class PluginDisabled(SocError):
    pass


class ExecutionTimeout(SocError):
    pass


class ExecutionFailure(SocError):
    def __init__(self, exit_code: int, output: str = ""):
        super().__init__(f"active response exited with status {exit_code}")
        self.exit_code = exit_code
        self.output = output


class SpaceInArgument(SocError):
    """Active response arguments are single tokens and must not contain spaces."""


@dataclass
class ActiveResponseRecord:
    plugin_id: str
    args: list[str]
    agent_id: str
    timestamp: str
    status: str = "ok"
    exit_code: int | None = None
    output: str = ""

    def to_record(self) -> dict:
        return {
            "plugin_id": self.plugin_id,
            "args": list(self.args),
            "agent_id": self.agent_id,
            "timestamp": self.timestamp,
            "status": self.status,
            "exit_code": self.exit_code,
            "output": self.output,
        }


class ActiveResponseRunner:
    """Runs <ar_dir>/<plugin id>.py under the configured interpreter."""

    def __init__(self, interpreter: str = "python3", timeout: float = 30.0):
        self.interpreter_argv = shlex.split(interpreter)
        self.timeout = timeout
        self.records: list[ActiveResponseRecord] = []
        self._lock = threading.Lock()

    def validate_args(self, args: list[str]) -> None:
        for token in args:
            if " " in token:
                raise SpaceInArgument(f"argument {token!r} contains a space")

    def execute(
        self, script_path: Path, plugin_id: str, args: list[str], agent_id: str, now: str
    ) -> ActiveResponseRecord:
        self.validate_args(args)
        record = ActiveResponseRecord(
            plugin_id=plugin_id, args=list(args), agent_id=agent_id, timestamp=now
        )
        argv = [*self.interpreter_argv, str(script_path), *args]
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                timeout=self.timeout,
                cwd=script_path.parent,
            )
        except subprocess.TimeoutExpired:
            record.status = "timeout"
            self._store(record)
            raise ExecutionTimeout(
                f"active response {plugin_id} exceeded {self.timeout}s"
            )
        except OSError as exc:
            record.status = "spawn_failure"
            record.output = str(exc)
            self._store(record)
            raise ExecutionFailure(-1, str(exc)) from exc

        record.exit_code = proc.returncode
        record.output = proc.stdout + proc.stderr
        if proc.returncode != 0:
            record.status = "failed"
            self._store(record)
            raise ExecutionFailure(proc.returncode, record.output)
        self._store(record)
        return record

    def _store(self, record: ActiveResponseRecord) -> None:
        with self._lock:
            self.records.append(record)
