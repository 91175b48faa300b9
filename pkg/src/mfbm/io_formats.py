"""Tabular text output shared by every CLI command.

Two formats, both line-based and round-trip exact:

* csv: one ``# key=value ...`` metadata comment, a header row, then
  comma-separated rows with '.' decimals and full-precision floats.
* jsonl: a ``{"meta": {...}}`` record, then one JSON object per row.

Floats are written with repr (shortest round-trip form), so re-parsing a
file reproduces the exact values written.
"""

from __future__ import annotations

import io
import json
import sys
from typing import Iterable

__all__ = ["write_table", "read_table", "format_cell"]


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _meta_tokens(meta: dict) -> str:
    return " ".join(f"{k}={format_cell(v)}" for k, v in meta.items())


def write_table(
    destination,
    meta: dict,
    columns: list[str],
    rows: Iterable[tuple],
    fmt: str = "csv",
) -> None:
    """Write a table to a path, a text handle, or stdout (destination None)."""
    if destination is None:
        _emit(sys.stdout, meta, columns, rows, fmt)
    elif isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", encoding="utf-8", newline="\n") as fh:
            _emit(fh, meta, columns, rows, fmt)
    else:
        _emit(destination, meta, columns, rows, fmt)


def _emit(fh, meta, columns, rows, fmt) -> None:
    if fmt == "csv":
        if meta:
            fh.write("# " + _meta_tokens(meta) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(v) for v in row) + "\n")
    elif fmt == "jsonl":
        fh.write(json.dumps({"meta": meta}) + "\n")
        for row in rows:
            fh.write(json.dumps(dict(zip(columns, row))) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_table(source) -> tuple[dict, list[str], list[dict]]:
    """Parse a file written by write_table; format is sniffed from line 1."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        text = str(source)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty table")
    if lines[0].startswith("{"):
        head = json.loads(lines[0])
        meta = head.get("meta", {})
        rows = [json.loads(ln) for ln in lines[1:]]
        columns = list(rows[0]) if rows else []
        return meta, columns, rows
    meta = {}
    at = 0
    if lines[0].startswith("#"):
        for token in lines[0][1:].strip().split():
            key, _, raw = token.partition("=")
            meta[key] = _parse_cell(raw)
        at = 1
    columns = lines[at].split(",")
    out = []
    for ln in lines[at + 1 :]:
        cells = [_parse_cell(c) for c in ln.split(",")]
        out.append(dict(zip(columns, cells)))
    return meta, columns, out
