"""Parsing of the CLI's result files into in-memory tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingResult


@dataclass
class ResultSet:
    label: str
    hosts: dict = field(default_factory=dict)      # host -> [(time_s, bps)]
    aggregate: list = field(default_factory=list)  # [(time_s, bps)]
    modes: list = field(default_factory=list)      # [(time_s, mode)]
    report: dict = field(default_factory=dict)     # key -> string value

    def report_float(self, key: str) -> float:
        return float(self.report[key])

    def mean_aggregate(self, from_time: float = 0.0) -> float:
        vals = [bps for t, bps in self.aggregate if t >= from_time]
        return sum(vals) / len(vals) if vals else 0.0


def _read(path: Path) -> str:
    if not path.exists():
        raise MissingResult(f"missing result file: {path}")
    return path.read_text()


def load_results(out_dir, label: str) -> ResultSet:
    out_dir = Path(out_dir)
    rs = ResultSet(label=label)

    for row in csv.DictReader(_read(out_dir / "rates.csv").splitlines()):
        t = float(row["time_s"])
        bps = float(row["arrival_bps"])
        if row["host_id"] == "aggregate":
            rs.aggregate.append((t, bps))
        else:
            rs.hosts.setdefault(row["host_id"], []).append((t, bps))

    for row in csv.DictReader(_read(out_dir / "modes.csv").splitlines()):
        rs.modes.append((float(row["time_s"]), row["mode"]))

    for line in _read(out_dir / "report.txt").splitlines():
        if ": " in line:
            key, _, value = line.partition(": ")
            rs.report[key.strip()] = value.strip()
    return rs
