"""CSV ingestion with line-numbered errors."""

from __future__ import annotations

import csv
import math
from typing import Iterator, Sequence, Union

import numpy as np

from .core import InputTuple
from .exceptions import NonFiniteValue, NonMonotonicTime, ParseError

Column = Union[int, str]


def _resolve(columns: Sequence[Column], header: list[str] | None) -> list[int]:
    out = []
    for col in columns:
        if isinstance(col, int):
            out.append(col)
            continue
        if header is None:
            raise ParseError(f"column {col!r} given by name but the file has no header", 1)
        try:
            out.append(header.index(col))
        except ValueError:
            raise ParseError(f"no column named {col!r} in header", 1) from None
    return out


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _column_arg(value: Column) -> Column:
    # "2" on the command line means column index 2
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value)
    return value


def iter_rows(path, t_column: Column = 0, y_columns: Sequence[Column] = (1,)) -> Iterator[tuple]:
    """Yield ``(line, t, (y1, y2, ...))`` for each data row.

    Columns are 0-based indices or header names. Naming any column makes the
    first line a header. Blank lines are skipped; line numbers count them.
    """
    t_column = _column_arg(t_column)
    y_columns = [_column_arg(c) for c in y_columns]
    has_header = isinstance(t_column, str) or any(isinstance(c, str) for c in y_columns)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        if has_header:
            header = [h.strip() for h in next(reader, [])]
        idx = _resolve([t_column, *y_columns], header)
        last_t = None
        first = True
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if first:
                first = False
                # a leading row whose timestamp is not a number is a header
                if header is None and idx[0] < len(row) and not _is_number(row[idx[0]]):
                    continue
            values = []
            for k in idx:
                try:
                    cell = row[k]
                except IndexError:
                    raise ParseError(f"row has {len(row)} fields, column {k} missing", line) from None
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{cell.strip()!r} is not a number", line) from None
                if not math.isfinite(v):
                    raise NonFiniteValue(f"{cell.strip()!r} is not finite", line)
                values.append(v)
            t = values[0]
            if last_t is not None and not t > last_t:
                raise NonMonotonicTime(f"timestamp {t!r} does not follow {last_t!r}", line)
            last_t = t
            yield line, t, tuple(values[1:])


def ingest_csv(path, t_column: Column = 0, y_column: Column = 1) -> Iterator[InputTuple]:
    """Stream ``(t, y)`` tuples from a CSV file in file order."""
    for _, t, (y,) in iter_rows(path, t_column, (y_column,)):
        yield InputTuple(t, y)


def read_channels(path, t_column: Column = 0, y_columns: Sequence[Column] = (1,)):
    """Timestamps and one value array per requested column."""
    ts = []
    cols = [[] for _ in y_columns]
    for _, t, ys in iter_rows(path, t_column, y_columns):
        ts.append(t)
        for acc, v in zip(cols, ys):
            acc.append(v)
    return np.asarray(ts, dtype=float), [np.asarray(c, dtype=float) for c in cols]


def write_csv(fh, t, columns, names=("t", "y")):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(names)
    for row in zip(t, *columns):
        writer.writerow([repr(float(v)) for v in row])
