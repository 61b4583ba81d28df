"""Schema-checked CSV access for the experiment log formats.

The simulator writes every CSV with a `#schema=v1` first line.  Readers here
fail loudly on version mismatches or missing columns; the figure scripts are
strictly read-only consumers of that contract.
"""

from __future__ import annotations

import numpy as np

SCHEMA_LINE = "#schema=v1"


class SchemaError(ValueError):
    pass


def read_columns(path) -> dict:
    """CSV as {column: array}; numeric columns become float arrays."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise SchemaError(f"{path}: expected '{SCHEMA_LINE}', found {first!r}")
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for k, name in enumerate(header):
        col = [row[k] for row in rows]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def require(columns: dict, names, path="input") -> None:
    missing = [n for n in names if n not in columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
