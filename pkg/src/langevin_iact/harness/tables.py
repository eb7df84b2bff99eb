"""CSV tables with a ``# key=value`` metadata preamble."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class Table:
    name: str
    header: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, key: str) -> list:
        j = self.header.index(key)
        return [r[j] for r in self.rows]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    if isinstance(v, (tuple, list)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    for k, v in table.meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, table: Table) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(table), newline="")
    return path


def read_csv(path) -> Table:
    """Inverse of :func:`write_csv`; values come back as strings."""
    meta = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            else:
                body.append(line)
    rows = list(csv.reader(body))
    return Table(Path(path).stem, tuple(rows[0]), [tuple(r) for r in rows[1:]], meta)
