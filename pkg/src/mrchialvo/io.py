"""CSV data tables and plain-text run manifests.

Tables start with one ``#``-prefixed schema line, then a header row, then
data. Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.

Manifests hold one ``key = value`` pair per line; nested keys are joined with
dots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass
class DataTable:
    columns: list
    rows: list
    schema: dict

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def parse_value(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], schema: dict | None = None) -> Path:
    """Write a table; ``schema`` maps column names to a short description."""
    path = Path(path)
    schema = schema or {}
    desc = "; ".join(f"{c}: {schema.get(c, '')}".rstrip(": ").rstrip() for c in columns)
    with path.open("w", newline="") as fh:
        fh.write(f"# {desc}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        n = len(columns)
        for row in rows:
            row = list(row)
            if len(row) != n:
                raise ValueError(f"row has {len(row)} fields, expected {n}")
            w.writerow([format_value(v) for v in row])
    return path


def read_table(path) -> DataTable:
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise ValueError(f"{path}: missing schema line")
        schema = {}
        for part in first[1:].strip().split("; "):
            name, _, desc = part.partition(": ")
            schema[name.strip()] = desc.strip()
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for row in reader:
            if len(row) != len(columns):
                raise ValueError(f"{path}: ragged row")
            rows.append([parse_value(v) for v in row])
    return DataTable(columns, rows, schema)


def flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ",".join(format_value(x) for x in v)
        elif isinstance(v, (float, np.floating)):
            out[key] = repr(float(v))     # shortest text that round-trips
        else:
            out[key] = format_value(v)
    return out


def write_manifest(path, data: dict) -> Path:
    path = Path(path)
    lines = [f"{k} = {v}" for k, v in flatten(data).items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(path) -> dict:
    """Flat ``{dotted.key: string}`` view of a manifest."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise ValueError(f"bad manifest line: {line!r}")
        out[key] = value
    return out
