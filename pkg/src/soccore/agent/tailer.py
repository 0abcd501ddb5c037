"""File tailer: follows appended lines, survives rotation and late creation."""

from __future__ import annotations

from pathlib import Path

_HEAD_LIMIT = 64


class LogTailer:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._position: int | None = None
        self._inode: int | None = None
        self._remainder = ""
        self._head = b""  # consumed prefix, re-checked to spot inode-reusing rotation
        self._primed = False  # first poll decides where to attach

    def _read_head(self, limit: int) -> bytes:
        if limit <= 0:
            return b""
        try:
            with self.path.open("rb") as fh:
                return fh.read(limit)
        except OSError:
            return b""

    def poll(self) -> list[str]:
        """Complete lines appended since the last poll."""
        try:
            stat = self.path.stat()
        except FileNotFoundError:
            # wait for the file; when it appears we read it from the start
            self._primed = True
            self._position = None
            self._inode = None
            self._remainder = ""
            self._head = b""
            return []

        if self._position is None:
            self._inode = stat.st_ino
            # attach at the end of a file that predates us, at the start of
            # one created while we were already watching
            self._position = 0 if self._primed else stat.st_size
            self._primed = True
            self._head = self._read_head(min(_HEAD_LIMIT, self._position))
        else:
            rotated = stat.st_ino != self._inode or stat.st_size < self._position
            if not rotated and self._head:
                rotated = self._read_head(len(self._head)) != self._head
            if rotated:
                self._position = 0
                self._inode = stat.st_ino
                self._remainder = ""
                self._head = b""

        if stat.st_size == self._position:
            return []
        with self.path.open("r", encoding="utf-8", errors="replace") as fh:
            fh.seek(self._position)
            chunk = fh.read()
            self._position = fh.tell()
        self._head = self._read_head(min(_HEAD_LIMIT, self._position))
        text = self._remainder + chunk
        lines = text.split("\n")
        self._remainder = lines.pop()  # trailing partial line, if any
        return [line for line in lines if line]
