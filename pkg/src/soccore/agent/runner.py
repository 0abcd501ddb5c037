"""Plugin script execution: one short-lived child process per run."""

from __future__ import annotations

import shlex
import subprocess
import time
from dataclasses import dataclass

from soccore.errors import SocError


class SpawnFailure(SocError):
    pass


@dataclass
class CompletedExecution:
    exit_code: int
    stdout: str
    stderr: str
    timed_out: bool = False
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return self.exit_code == 0 and not self.timed_out


class SubprocessScriptRunner:
    def __init__(self, interpreter: str = "python3"):
        self.interpreter_argv = shlex.split(interpreter)

    def run(self, script_path, workdir, timeout: float) -> CompletedExecution:
        argv = [*self.interpreter_argv, str(script_path)]
        started = time.monotonic()
        try:
            proc = subprocess.run(
                argv, cwd=str(workdir), capture_output=True, text=True, timeout=timeout
            )
        except subprocess.TimeoutExpired as exc:
            return CompletedExecution(
                exit_code=-1,
                stdout=(exc.stdout or b"").decode("utf-8", "replace")
                if isinstance(exc.stdout, bytes)
                else (exc.stdout or ""),
                stderr="",
                timed_out=True,
                duration=time.monotonic() - started,
            )
        except OSError as exc:
            raise SpawnFailure(f"cannot spawn {argv}: {exc}") from exc
        return CompletedExecution(
            exit_code=proc.returncode,
            stdout=proc.stdout,
            stderr=proc.stderr,
            duration=time.monotonic() - started,
        )
