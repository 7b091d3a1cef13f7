"""CSV and JSON file formats.

Parts file:    header ``id,length,width``            (mm, decimal point)
Modules file:  header ``id,length,width,capacity``
Solution file: header ``part_id,module_id`` plus a JSON sidecar
               ``{solver, feasible, total_waste, runtime_s}``

All files are UTF-8 with LF line endings.  Unassigned parts are written
with an empty ``module_id`` field.
"""

from __future__ import annotations

import csv
import io
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .core import (
    Assignment,
    ModuleSpec,
    Part,
    Solution,
    solution_sidecar,
    um_to_mm_str,
)

PARTS_HEADER = ["id", "length", "width"]
MODULES_HEADER = ["id", "length", "width", "capacity"]
SOLUTION_HEADER = ["part_id", "module_id"]


@contextmanager
def _open_read(source: str | Path | TextIO) -> Iterator[TextIO]:
    if isinstance(source, (str, Path)):
        fh = open(source, "r", encoding="utf-8", newline="")
        try:
            yield fh
        finally:
            fh.close()
    else:
        yield source


def _check_header(row: list[str], expected: list[str], what: str) -> None:
    if [c.strip() for c in row] != expected:
        raise ValueError(
            f"{what}: expected header {','.join(expected)!r}, got {','.join(row)!r}"
        )


def read_parts_csv(source: str | Path | TextIO) -> tuple[Part, ...]:
    with _open_read(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("parts file is empty")
        _check_header(header, PARTS_HEADER, "parts file")
        parts = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValueError(f"parts file: malformed row {row!r}")
            parts.append(Part.of(int(row[0]), row[1], row[2]))
    return tuple(parts)


def read_modules_csv(source: str | Path | TextIO) -> tuple[ModuleSpec, ...]:
    with _open_read(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("modules file is empty")
        _check_header(header, MODULES_HEADER, "modules file")
        modules = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ValueError(f"modules file: malformed row {row!r}")
            modules.append(ModuleSpec.of(int(row[0]), row[1], row[2], int(row[3])))
    return tuple(modules)


def parts_csv_text(parts: Iterable[Part]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PARTS_HEADER)
    for p in parts:
        writer.writerow([p.id, um_to_mm_str(p.length), um_to_mm_str(p.width)])
    return buf.getvalue()


def modules_csv_text(modules: Iterable[ModuleSpec]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MODULES_HEADER)
    for m in modules:
        writer.writerow(
            [m.id, um_to_mm_str(m.length), um_to_mm_str(m.width), m.capacity]
        )
    return buf.getvalue()


def write_parts_csv(parts: Iterable[Part], path: str | Path) -> None:
    Path(path).write_text(parts_csv_text(parts), encoding="utf-8", newline="")


def write_modules_csv(modules: Iterable[ModuleSpec], path: str | Path) -> None:
    Path(path).write_text(modules_csv_text(modules), encoding="utf-8", newline="")


def solution_csv_text(solution: Solution) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SOLUTION_HEADER)
    for a in solution.assignments:
        writer.writerow([a.part_id, "" if a.module_id is None else a.module_id])
    return buf.getvalue()


def write_solution(solution: Solution, path: str | Path) -> Path:
    """Write the assignment CSV and its JSON sidecar (``<path>.json``)."""
    path = Path(path)
    path.write_text(solution_csv_text(solution), encoding="utf-8", newline="")
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(solution_sidecar(solution) + "\n", encoding="utf-8")
    return sidecar


def read_solution_csv(source: str | Path | TextIO) -> tuple[Assignment, ...]:
    with _open_read(source) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("solution file is empty")
        _check_header(header, SOLUTION_HEADER, "solution file")
        assignments = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"solution file: malformed row {row!r}")
            module_id = int(row[1]) if row[1].strip() else None
            assignments.append(Assignment(int(row[0]), module_id))
    return tuple(assignments)


def read_sidecar(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
