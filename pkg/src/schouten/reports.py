"""Deterministic CSV/JSON report serialisation and merging.

CSV files start with a single comment header line carrying the timestamp so
that report bodies are byte-identical across reruns with the same seed; the
summary JSON carries a schema version checked by ``merge_reports``.
"""

from __future__ import annotations

import datetime
import json
from pathlib import Path

SCHEMA_VERSION = 1


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    lines = [f"# schouten-report v{SCHEMA_VERSION} generated={stamp}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def csv_body(path):
    """File content without the timestamped comment line (determinism checks)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return "\n".join(line for line in lines if not line.startswith("#"))


def write_summary(path, summary):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(summary)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def load_summary(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def merge_reports(paths):
    """Aggregate campaign summaries into one roll-up summary.

    All inputs must share the schema version; aggregates pass/fail counts,
    campaign ids of failures, worst margins and total runtime.
    """
    merged = {
        "schema_version": SCHEMA_VERSION,
        "campaigns": 0,
        "passed": 0,
        "failed": 0,
        "failed_ids": [],
        "worst_margins": {},
        "runtime_s": 0.0,
    }
    for p in paths:
        summary = load_summary(p)
        version = summary.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(
                f"schema mismatch in {p}: {version} != {SCHEMA_VERSION}")
        items = summary.get("results", [summary])
        for item in items:
            merged["campaigns"] += 1
            if item.get("passed"):
                merged["passed"] += 1
            else:
                merged["failed"] += 1
                merged["failed_ids"].append(item.get("id", "?"))
            if "worst_margin" in item and item["worst_margin"] is not None:
                merged["worst_margins"][item.get("id", "?")] = item["worst_margin"]
            merged["runtime_s"] += float(item.get("runtime_s", 0.0))
    merged["passed_all"] = merged["failed"] == 0
    return merged
