#!/usr/bin/env python3
"""Sensitive-file read detector.

Follows the local file-access feed (watch_feed.txt, one "<path> <process>
<pid>" record per line; on a hardened host a kernel hook would populate it).
Reads of /etc/passwd are reported; reads of /etc/shadow also request the
manager-side response.
"""

import os

FEED = "watch_feed.txt"
OFFSET_FILE = ".feed_offset"
WATCHED = ("/etc/passwd", "/etc/shadow")


def read_new_lines() -> list:
    if not os.path.exists(FEED):
        return []
    position = 0
    if os.path.exists(OFFSET_FILE):
        try:
            with open(OFFSET_FILE) as fh:
                position = int(fh.read().strip() or 0)
        except ValueError:
            position = 0
    with open(FEED) as fh:
        fh.seek(position)
        chunk = fh.read()
        position = fh.tell()
    with open(OFFSET_FILE, "w") as fh:
        fh.write(str(position))
    return [line for line in chunk.splitlines() if line.strip()]


def main() -> None:
    for line in read_new_lines():
        parts = line.split()
        if len(parts) != 3:
            continue
        path, process, pid = parts
        if path not in WATCHED:
            continue
        print(f"LOG: {path} {process} {pid}")
        if path == "/etc/shadow":
            print(f"ARY: notify {path} {process} {pid}")


if __name__ == "__main__":
    main()
