#!/usr/bin/env python3
"""Health probe: reports one finding and asks for one manager-side response."""


def main() -> None:
    print("LOG: probe ok 0")
    print("ARY: audit probe")


if __name__ == "__main__":
    main()
