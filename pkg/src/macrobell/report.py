"""Run manifests and CSV/JSON report files.

Floats are written with ``repr``, the shortest decimal string that reads back
to the same double.  Every file carries the manifest of the run that made it:
JSON reports under the ``manifest`` key, CSV files as a leading
``# manifest: {...}`` comment line.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from macrobell import __version__

SCHEMA_VERSION = 1
MANIFEST_PREFIX = "# manifest: "

SIMULATE_COLUMNS = ("angle_deg", "a_dot_b", "E_empirical", "E_linear_eq3", "E_cosine_eq5", "std_error", "trials")


def utc_timestamp() -> str:
    """Current UTC time, or ``SOURCE_DATE_EPOCH`` when set (reproducible outputs)."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    seconds = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(seconds))


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seeds: dict = field(default_factory=dict)
    version: str = __version__
    created_utc: str = field(default_factory=utc_timestamp)
    schema: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        return cls(**d)


@dataclass
class Report:
    columns: tuple[str, ...]
    rows: list[dict]
    summary: dict = field(default_factory=dict)


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def _compact(obj: Any) -> str:
    return json.dumps(_finite(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def render_json(report: Report, manifest: RunManifest) -> str:
    doc = {
        "manifest": manifest.to_dict(),
        "columns": list(report.columns),
        "rows": [[row[c] for c in report.columns] for row in report.rows],
        "summary": report.summary,
    }
    return json.dumps(_finite(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def render_csv(report: Report, manifest: RunManifest) -> str:
    buf = io.StringIO()
    buf.write(MANIFEST_PREFIX + _compact(manifest.to_dict()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_cell(row[c]) for c in report.columns])
    return buf.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


RENDERERS = {"csv": render_csv, "json": render_json}


def output_targets(output: Optional[str], fmt: Optional[str]) -> list[tuple[Optional[Path], str]]:
    """Resolve ``--output``/``--format`` into (path, format) pairs; a None path is stdout.

    Without ``--format`` the suffix decides; a path with neither suffix gets
    both ``.csv`` and ``.json`` siblings.
    """
    if output is None:
        return [(None, fmt or "csv")]
    path = Path(output)
    if fmt:
        return [(path, fmt)]
    suffix = path.suffix.lower().lstrip(".")
    if suffix in RENDERERS:
        return [(path, suffix)]
    return [(path.with_name(path.name + ".csv"), "csv"), (path.with_name(path.name + ".json"), "json")]


def read_manifest(path: str | os.PathLike) -> RunManifest:
    text = Path(path).read_text()
    if text.startswith(MANIFEST_PREFIX):
        first = text.splitlines()[0]
        return RunManifest.from_dict(json.loads(first[len(MANIFEST_PREFIX):]))
    doc = json.loads(text)
    return RunManifest.from_dict(doc["manifest"] if "manifest" in doc else doc)


def read_csv_rows(path: str | os.PathLike) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
