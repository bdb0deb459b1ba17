"""Row sinks for experiment tables.

Every row carries the master seed and the config digest.  Rows are flushed as
they are produced, so an interrupted run leaves a parseable prefix.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

SCHEMA_VERSION = 1


def _fmt(v):
    if isinstance(v, (np.integer, np.bool_)):
        v = v.item()
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def _json_value(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return _fmt(v)
    return v


class TableWriter:
    def __init__(self, stream, fmt: str, columns: list[str], experiment: str, digest: str):
        self.stream = stream
        self.fmt = fmt
        self.columns = ["seed", "config_hash", *columns]
        self._csv = None
        if fmt == "csv":
            stream.write(f"# sepcutoff-table schema={SCHEMA_VERSION} experiment={experiment} config_hash={digest}\n")
            self._csv = csv.writer(stream, lineterminator="\n")
            self._csv.writerow(self.columns)
            stream.flush()

    def write(self, row: dict) -> None:
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row lacks columns {sorted(missing)}")
        if self._csv is not None:
            self._csv.writerow([_fmt(row[c]) for c in self.columns])
        else:
            obj = {c: _json_value(row[c]) for c in self.columns}
            self.stream.write(json.dumps(obj, allow_nan=False) + "\n")
        self.stream.flush()


@contextmanager
def open_table(path: str | None, fmt: str, columns: list[str], experiment: str, digest: str):
    if path is None or path == "-":
        yield TableWriter(sys.stdout, fmt, columns, experiment, digest)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield TableWriter(fh, fmt, columns, experiment, digest)


def read_table(path: str) -> list[dict]:
    """Parse a table written by :class:`TableWriter` (either format) into string/number dicts."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln]
    if lines and lines[0].startswith("#"):
        return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return [json.loads(ln) for ln in lines]
