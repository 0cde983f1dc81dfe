"""Typed tables and their RFC 4180 CSV form.

Column types: ``integer``, ``rational`` (written ``num/den``), ``real``
(17 significant digits, so doubles round-trip exactly), ``complex``
(expanded into a real and an imaginary column) and ``text``.
"""

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ._validation import ValidationError

TYPES = ("integer", "rational", "real", "complex", "text")


@dataclass
class Table:
    names: list
    types: list
    rows: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.names) != len(self.types):
            raise ValidationError("names and types must have equal length")
        bad = [t for t in self.types if t not in TYPES]
        if bad:
            raise ValidationError(f"unknown column types {bad}")

    def header(self):
        n_complex = self.types.count("complex")
        out = []
        for name, typ in zip(self.names, self.types):
            if typ != "complex":
                out.append(name)
            elif n_complex == 1:
                out += ["Re", "Im"]
            else:
                out += [f"{name}_Re", f"{name}_Im"]
        return out

    def column(self, name):
        i = self.names.index(name)
        return [r[i] for r in self.rows]


def format_real(x):
    return format(float(x), ".17g")


def _cells(row, types):
    out = []
    for v, typ in zip(row, types):
        if typ == "integer":
            out.append(str(int(v)))
        elif typ == "rational":
            q = Fraction(v)
            out.append(f"{q.numerator}/{q.denominator}")
        elif typ == "real":
            out.append(format_real(v))
        elif typ == "complex":
            z = complex(v)
            out += [format_real(z.real), format_real(z.imag)]
        else:
            out.append(str(v))
    return out


def to_csv_text(table):
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.header())
    for row in table.rows:
        if len(row) != len(table.names):
            raise ValidationError(f"row has {len(row)} cells, expected {len(table.names)}")
        writer.writerow(_cells(row, table.types))
    return buf.getvalue()


def emit_csv(table, path):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(table))
    return path


def _parse(cells, types):
    out = []
    it = iter(cells)
    for typ in types:
        c = next(it)
        if typ == "integer":
            out.append(int(c))
        elif typ == "rational":
            out.append(Fraction(c))
        elif typ == "real":
            out.append(float(c))
        elif typ == "complex":
            out.append(complex(float(c), float(next(it))))
        else:
            out.append(c)
    return tuple(out)


def read_csv(path, names, types):
    """Read a CSV written by ``emit_csv`` back into a typed table."""
    table = Table(list(names), list(types))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != table.header():
            raise ValidationError(f"{path}: header {header} != {table.header()}")
        table.rows = [_parse(r, table.types) for r in reader]
    return table


def read_csv_untyped(path):
    """Header and rows with every cell as text."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path} is empty")
    return rows[0], rows[1:]
