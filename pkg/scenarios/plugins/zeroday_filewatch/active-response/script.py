#!/usr/bin/env python3
"""Notify the SOC team about a critical file read."""

import sys


def main(args: list) -> None:
    # a production deployment would page or email here
    print("notify soc-team:", " ".join(args))


if __name__ == "__main__":
    main(sys.argv[1:])
