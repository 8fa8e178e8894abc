"""Small file helpers: atomic writes and the two-column CSV formats."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, MalformedRow


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory followed by a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write_text(path, format_csv(header, rows))


def read_column(path: str | Path, column: str) -> np.ndarray:
    """Read one numeric column from a headed CSV file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyInput(f"{path} is empty") from None
        if column not in header:
            raise MalformedRow(1, f"missing column {column!r}")
        k = header.index(column)
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(float(row[k]))
            except (IndexError, ValueError):
                raise MalformedRow(lineno, f"bad value in column {column!r}") from None
    if not out:
        raise EmptyInput(f"{path} has no data rows")
    return np.asarray(out)
