"""Tabular experiment output with a small metadata header.

Files look like::

    # infodyn-result: 1
    # kind: decohere
    # seed: 7
    i,j,omega,...
    0,1,2.0,...

Floats are written with ``repr`` (shortest round-trip form) so identical
numbers always give identical bytes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

FORMAT_VERSION = 1


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(float(v))
    if hasattr(v, "item"):
        return format_value(v.item())
    return str(v)


def parse_value(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def dumps(self) -> str:
        buf = io.StringIO()
        buf.write(f"# infodyn-result: {FORMAT_VERSION}\n")
        for key, val in self.metadata.items():
            buf.write(f"# {key}: {val}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_value(v) for v in row])
        return buf.getvalue()

    @classmethod
    def loads(cls, text: str) -> ResultTable:
        lines = text.splitlines()
        meta: dict[str, str] = {}
        k = 0
        while k < len(lines) and lines[k].startswith("# "):
            key, _, val = lines[k][2:].partition(": ")
            if key != "infodyn-result":
                meta[key] = val
            k += 1
        reader = csv.reader(lines[k:])
        columns = next(reader)
        rows = [[parse_value(v) for v in r] for r in reader]
        return cls(columns, rows, meta)

    def write(self, path: Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def read(cls, path: Path) -> ResultTable:
        return cls.loads(Path(path).read_text(encoding="utf-8"))
