"""CSV / JSON export of result tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

COLUMNS = (
    "axis_value",
    "method",
    "n_points",
    "P",
    "mean_delta_nu",
    "std_delta_nu",
    "normalized_error",
    "n_trials",
    "seed",
)
FORMATS = ("csv", "json")


class ExportError(OSError):
    """Writing or reading a result file failed."""


def row_dict(row) -> dict:
    s = row.summary
    return {
        "axis_value": row.axis_value,
        "method": row.method,
        "n_points": int(row.n_points),
        "P": None if s is None else s.success_probability,
        "mean_delta_nu": None if s is None else s.mean_delta_nu,
        "std_delta_nu": None if s is None else s.std_delta_nu,
        "normalized_error": None if s is None else s.normalized_error,
        "n_trials": 0 if s is None else s.n_trials,
        "seed": int(row.seed),
    }


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)  # shortest string that round-trips exactly
    return str(v)


def _parse_cell(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render(table, fmt: str = "csv", config: dict | None = None, errors=()) -> str:
    """Serialize rows to CSV or JSON text."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    rows = [row_dict(r) for r in table]
    if not rows:
        raise ValueError("refusing to export an empty table")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_cell(r[c]) for c in COLUMNS])
        return buf.getvalue()
    doc = {"config": config or {}, "rows": rows, "errors": list(errors)}
    return json.dumps(doc, indent=2) + "\n"


def export_results(table, path, fmt: str = "csv", config: dict | None = None, errors=()) -> Path:
    """Write `table` to `path`; JSON output also carries the resolved config."""
    text = render(table, fmt, config, errors)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ExportError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_results(path, fmt: str | None = None) -> list:
    """Row dicts back from an exported file."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    try:
        text = path.read_text()
    except OSError as exc:
        raise ExportError(f"cannot read results from {path}: {exc}") from exc
    if fmt == "json":
        return json.loads(text)["rows"]
    if fmt != "csv":
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        d = {k: _parse_cell(v) for k, v in rec.items()}
        d["method"] = rec["method"]
        out.append(d)
    return out
