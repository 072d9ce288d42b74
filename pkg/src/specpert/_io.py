"""Small CSV helpers shared by the Monte Carlo harness and the CLI."""

from __future__ import annotations

import csv
import math
from typing import Iterable, Sequence, TextIO


def fmt(value) -> str:
    """Render a value for CSV output; floats use 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    try:
        x = float(value)
    except (TypeError, ValueError):
        return str(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def write_rows(handle: TextIO, header: Sequence[str] | None, rows: Iterable[Sequence]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
