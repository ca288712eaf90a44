"""CSV writing and reading with round-trip-exact floats."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

__all__ = ["format_value", "write_csv", "to_csv_text", "read_csv", "parse_value"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        text = "%.17g" % v
        # keep floats distinguishable from ints on re-read
        return text if any(ch in text for ch in ".einI") else text + ".0"
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def write_csv(stream, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write ``header`` and ``rows``; returns the number of data rows."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    count = 0
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([format_value(v) for v in row])
        count += 1
    return count


def to_csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def parse_value(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(source) -> tuple[list[str], list[list]]:
    """Read a file written by :func:`write_csv` (path or text stream)."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV: missing header") from None
    rows = [[parse_value(x) for x in row] for row in reader]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("ragged CSV row")
    return header, rows
