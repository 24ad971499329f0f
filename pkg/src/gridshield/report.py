"""Artifact serialization: JSON reports, CSV series, sweep aggregates.

Every CSV carries a header row; column order is part of the contract.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .engine import MetricsReport

SWEEP_COLUMNS = (
    "defender_count",
    "seed",
    "mean_utilization",
    "benign_delay_ms",
    "cancellation_rate",
    "attacker_expense",
)


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n")
    return path


def write_report_json(path, report: MetricsReport) -> Path:
    return write_json(path, report.to_dict())


def _plain_decimal(cell) -> str:
    text = str(cell)
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def write_expense_table_csv(path, rows, max_peers: int) -> Path:
    """Column 1 is the individual base expense, columns 2..n the peer counts."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["base"] + [f"peers_{p}" for p in range(1, max_peers + 1)])
        for row in rows:
            writer.writerow([_plain_decimal(cell) for cell in row])
    return path


def write_series_csv(path, report: MetricsReport) -> Path:
    """Per-tick link and population series for one run."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "utilization", "active_bots",
                        "engaged_defenders", "alarm_level"])
        rows = zip(
            report.utilization_series,
            report.active_bot_series,
            report.engaged_units_series,
            report.alarm_series,
        )
        for (t, util), (_, active), (_, engaged), (_, alarm) in rows:
            writer.writerow([f"{t:.3f}", f"{util:.6f}", active, engaged, alarm])
    return path


def write_delays_csv(path, report: MetricsReport) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "delay_s"])
        for t, delay in report.delay_series:
            writer.writerow([f"{t:.3f}", f"{delay:.6f}"])
    return path


def sweep_summary_rows(reports) -> list[dict]:
    rows = []
    for r in reports:
        rows.append(
            {
                "defender_count": r.defender_count,
                "seed": r.seed,
                "mean_utilization": f"{r.mean_utilization:.6f}",
                "benign_delay_ms": f"{r.benign_delay_mean * 1000.0:.3f}",
                "cancellation_rate": f"{r.cancellation_rate:.6f}",
                "attacker_expense": f"{r.attacker_expense:.2f}",
            }
        )
    return rows


def write_sweep_csv(path, reports) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        writer.writerows(sweep_summary_rows(reports))
    return path


def write_trajectory_csv(path, trajectory) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "num_unit", "num_actv"])
        for state in trajectory:
            writer.writerow(
                [f"{state.t:.6f}", f"{state.num_unit:.9f}", f"{state.num_actv:.9f}"]
            )
    return path
