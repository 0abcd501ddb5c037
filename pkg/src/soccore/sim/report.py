"""Simulation report rendering: delimited output plus matplotlib figures.

Given a report directory, writes:

    report.json        full structured report
    alerts.csv         one row per alert (delimited output)
    checks.csv         one row per expectation check
    transcript.txt     the ordered event transcript
    alerts_by_level.png, timeline.png   rendered figures
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from pathlib import Path

from soccore.sim.harness import SimReport


def write_report(report: SimReport, directory: str | Path) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    report_json = out / "report.json"
    report_json.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    written.append(report_json)

    alerts_csv = out / "alerts.csv"
    with alerts_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "timestamp", "agent", "level", "rule_id", "description"])
        for alert in report.alerts:
            writer.writerow(
                [
                    alert.get("id"),
                    alert.get("timestamp"),
                    alert.get("agent.id"),
                    alert.get("rule.level"),
                    alert.get("rule.id"),
                    alert.get("rule.description"),
                ]
            )
    written.append(alerts_csv)

    checks_csv = out / "checks.csv"
    with checks_csv.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "ok", "detail"])
        for check in report.checks:
            writer.writerow([check["name"], check["ok"], check["detail"]])
    written.append(checks_csv)

    transcript = out / "transcript.txt"
    with transcript.open("w", encoding="utf-8") as fh:
        for event in report.transcript:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
    written.append(transcript)

    written.extend(_figures(report, out))
    return written


def _figures(report: SimReport, out: Path) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written: list[Path] = []

    by_level = Counter(alert.get("rule.level", 0) for alert in report.alerts)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    levels = list(range(0, 16))
    ax.bar(levels, [by_level.get(level, 0) for level in levels], color="#b33")
    ax.set_xlabel("alert level")
    ax.set_ylabel("count")
    ax.set_title(f"alerts by level: {report.scenario}")
    ax.set_xticks(levels)
    fig.tight_layout()
    level_png = out / "alerts_by_level.png"
    fig.savefig(level_png, dpi=110)
    plt.close(fig)
    written.append(level_png)

    kinds: dict[str, list[float]] = {}
    for event in report.transcript:
        kinds.setdefault(event.get("event", "?"), []).append(event.get("at", 0.0))
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.35 * len(kinds))))
    base = min((min(ts) for ts in kinds.values()), default=0.0)
    for row, (kind, stamps) in enumerate(sorted(kinds.items())):
        ax.scatter([t - base for t in stamps], [row] * len(stamps), s=14)
    ax.set_yticks(range(len(kinds)))
    ax.set_yticklabels(sorted(kinds))
    ax.set_xlabel("virtual seconds")
    ax.set_title("event timeline")
    fig.tight_layout()
    timeline_png = out / "timeline.png"
    fig.savefig(timeline_png, dpi=110)
    plt.close(fig)
    written.append(timeline_png)
    return written
