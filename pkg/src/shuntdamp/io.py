"""CSV emission with a fixed, documented number format."""

import csv
import math
import numbers
from pathlib import Path

import numpy as np

SIGNIFICANT_DIGITS = 9


def format_value(value):
    """Render one cell: booleans as 0/1, integers verbatim, reals at 9 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def emit_csv(rows, schema, path):
    """Write ``rows`` under the header ``schema`` to ``path`` with LF line endings.

    Raises
    ------
    ValueError
        If a row's length differs from the schema.
    OSError
        On I/O failure; the message names the path.
    """
    schema = tuple(schema)
    rendered = []
    for i, row in enumerate(rows):
        row = tuple(row)
        if len(row) != len(schema):
            raise ValueError(f"row {i} has {len(row)} fields, schema has {len(schema)}")
        rendered.append([format_value(v) for v in row])
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(schema)
            writer.writerows(rendered)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path):
    """Header and rows of an emitted file, numeric cells parsed as floats."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            parsed = []
            for cell in row:
                try:
                    parsed.append(float(cell))
                except ValueError:
                    parsed.append(cell)
            rows.append(parsed)
    return header, rows
