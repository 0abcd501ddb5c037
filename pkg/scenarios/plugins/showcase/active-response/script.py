#!/usr/bin/env python3
"""Records the audit request the probe raised."""

import sys


def main(args: list) -> None:
    print("audit response:", " ".join(args))


if __name__ == "__main__":
    main(sys.argv[1:])
