"""CSV and JSON artifacts.

CSV files start with ``# key=value`` comment lines carrying the parameter
record, then a header row, then rows formatted with 17 significant digits so
that every float survives a round trip exactly.
"""

import io
import json
import math
import os
import tempfile

import numpy as np

from .experiments import TimeSeries

__all__ = [
    "fmt",
    "csv_text",
    "series_csv",
    "parse_csv",
    "read_series_csv",
    "json_text",
    "write_atomic",
    "to_jsonable",
]


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def csv_text(columns, rows, meta=None):
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={fmt(value)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def series_csv(series):
    return csv_text(("t", "value"), zip(series.times, series.values), series.meta)


def _scalar(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def parse_csv(text):
    """Return ``(meta, columns, rows)``; numeric cells become floats."""
    meta, columns, rows = {}, None, []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = _scalar(value.strip())
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append([float(x) for x in line.split(",")])
    return meta, columns, rows


def read_series_csv(path):
    with open(path, encoding="utf-8") as fh:
        meta, columns, rows = parse_csv(fh.read())
    if columns != ["t", "value"]:
        raise ValueError(f"{path}: expected header t,value, got {columns}")
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return TimeSeries(arr[:, 0], arr[:, 1], meta)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def json_text(config, results, provenance):
    doc = {"config": config, "results": results, "provenance": provenance}
    return json.dumps(to_jsonable(doc), indent=2, ensure_ascii=False) + "\n"


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
