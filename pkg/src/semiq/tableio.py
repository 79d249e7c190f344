"""Deterministic tables: RFC-4180 CSV with 17-significant-digit floats.

Every run writes its table(s) plus a manifest (flat key = value text) that
echoes the fully resolved configuration, so a run can be reproduced from
its manifest alone.  Nothing here depends on wall-clock time: rerunning
with the same seed yields byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

__all__ = ["ResultTable", "fmt_value", "write_csv", "read_csv",
           "write_manifest", "read_manifest", "MANIFEST_FORMAT"]

MANIFEST_FORMAT = "1"


def fmt_value(v) -> str:
    """Floats at 17 significant digits (lossless round trip), ints plain."""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    return str(v)


@dataclass
class ResultTable:
    """Column names plus rows of scalars, with a provenance pointer."""

    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    provenance: str | None = None      # manifest filename once written

    def append(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row width {len(values)} != {len(self.columns)} columns")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        try:
            i = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; have {self.columns}") from None
        return [r[i] for r in self.rows]

    def float_column(self, name: str) -> list[float]:
        out = []
        for v in self.column(name):
            try:
                out.append(float(v))
            except (TypeError, ValueError):
                raise ValueError(f"column {name!r} is not numeric: {v!r}") from None
        return out


def write_csv(table: ResultTable, path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([fmt_value(v) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path) -> ResultTable:
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return ResultTable(columns=rows[0], rows=[tuple(r) for r in rows[1:]])


def write_manifest(path, entries: dict, outputs: list[str]) -> None:
    """Flat key = value manifest; keys in insertion order, outputs listed."""
    lines = [f"format = {MANIFEST_FORMAT}"]
    for k, v in entries.items():
        lines.append(f"{k} = {fmt_value(v)}")
    lines.append("outputs = " + ",".join(outputs))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: malformed manifest line {line!r}")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
