"""Domain model for trolley packing.

Rectangular parts are assigned to trolley modules (groups of identically
sized slots).  A module is described by its slot dimensions and a capacity
counter; slot-level geometry is not modelled.  Dimensions are stored as
integer micrometers so that all wasted-space arithmetic is exact: inputs
are millimeters with up to three decimals, and comparisons between solvers
never depend on floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Sequence

UM_PER_MM = 1000
#: µm² in one mm²; handy for writing literals in tests (e.g. ``72 * MM2``).
MM2 = UM_PER_MM * UM_PER_MM


class StructuralError(ValueError):
    """A solution references ids that do not exist in the instance."""


class InfeasibleSolutionError(ValueError):
    """Raised when an operation defined only for feasible solutions is
    applied to an infeasible one (its wasted space is undefined)."""


def mm_to_um(value: int | float | str | Decimal) -> int:
    """Convert a millimeter quantity (≤3 decimals) to integer micrometers."""
    try:
        dec = Decimal(str(value))
    except InvalidOperation as exc:
        raise ValueError(f"not a millimeter quantity: {value!r}") from exc
    if not dec.is_finite():
        raise ValueError(f"not a finite millimeter quantity: {value!r}")
    um = dec * UM_PER_MM
    if um != um.to_integral_value():
        raise ValueError(
            f"{value!r} has more than 3 decimal places; millimeter inputs "
            "are fixed-point with micrometer resolution"
        )
    return int(um)


def um_to_mm_str(um: int) -> str:
    """Render integer micrometers as an exact decimal millimeter string."""
    whole, frac = divmod(um, UM_PER_MM)
    if frac == 0:
        return str(whole)
    return f"{whole}.{frac:03d}".rstrip("0")


def um2_to_mm2(um2: int) -> float:
    """Squared-micrometer area as mm² (float, exact for integer-mm inputs)."""
    return um2 / MM2


def um2_to_mm2_str(um2: int) -> str:
    """Render an exact µm² area as a decimal mm² string without float noise."""
    sign = "-" if um2 < 0 else ""
    whole, frac = divmod(abs(um2), MM2)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:06d}".rstrip("0")


@dataclass(frozen=True)
class Part:
    """Rectangular workpiece; ``length`` and ``width`` are micrometers.

    Constructors normalize so the longer side is ``length``.
    """

    id: int
    length: int
    width: int

    def __post_init__(self) -> None:
        if self.length <= 0 or self.width <= 0:
            raise ValueError(f"part {self.id}: dimensions must be positive")
        if self.width > self.length:
            object.__setattr__(self, "length", self.width)
            object.__setattr__(self, "width", self.length)

    @classmethod
    def of(cls, id: int, length_mm, width_mm) -> "Part":
        """Build a part from millimeter dimensions."""
        return cls(id, mm_to_um(length_mm), mm_to_um(width_mm))

    @property
    def area(self) -> int:
        return self.length * self.width


@dataclass(frozen=True)
class ModuleSpec:
    """A module type: slot dimensions (micrometers) and slot capacity."""

    id: int
    length: int
    width: int
    capacity: int

    def __post_init__(self) -> None:
        if self.length <= 0 or self.width <= 0:
            raise ValueError(f"module {self.id}: dimensions must be positive")
        if self.capacity < 0:
            raise ValueError(f"module {self.id}: capacity must be >= 0")
        if self.width > self.length:
            object.__setattr__(self, "length", self.width)
            object.__setattr__(self, "width", self.length)

    @classmethod
    def of(cls, id: int, length_mm, width_mm, capacity: int) -> "ModuleSpec":
        return cls(id, mm_to_um(length_mm), mm_to_um(width_mm), capacity)

    @property
    def area(self) -> int:
        return self.length * self.width

    def scaled(self, trolleys: int) -> "ModuleSpec":
        """The same module type with capacity for ``trolleys`` trolleys."""
        if trolleys < 1:
            raise ValueError("trolley count must be >= 1")
        return ModuleSpec(self.id, self.length, self.width, self.capacity * trolleys)


@dataclass(frozen=True)
class Instance:
    """Problem data: parts in presentation order plus the module set.

    Module capacities are taken as-is; scale them beforehand (see
    :meth:`with_trolleys`) when modelling several trolleys.
    """

    parts: tuple[Part, ...]
    modules: tuple[ModuleSpec, ...]

    def __init__(self, parts: Iterable[Part], modules: Iterable[ModuleSpec]):
        object.__setattr__(self, "parts", tuple(parts))
        object.__setattr__(self, "modules", tuple(modules))
        part_ids = [p.id for p in self.parts]
        if len(set(part_ids)) != len(part_ids):
            raise ValueError("part ids must be unique")
        module_ids = [m.id for m in self.modules]
        if len(set(module_ids)) != len(module_ids):
            raise ValueError("module ids must be unique")

    def with_trolleys(self, trolleys: int) -> "Instance":
        return Instance(self.parts, [m.scaled(trolleys) for m in self.modules])

    def part_by_id(self, part_id: int) -> Part:
        for p in self.parts:
            if p.id == part_id:
                return p
        raise StructuralError(f"unknown part id {part_id}")

    def module_by_id(self, module_id: int) -> ModuleSpec:
        for m in self.modules:
            if m.id == module_id:
                return m
        raise StructuralError(f"unknown module id {module_id}")


@dataclass(frozen=True)
class Assignment:
    """One part's destination; ``module_id`` is None when unassigned."""

    part_id: int
    module_id: int | None


@dataclass(frozen=True)
class Solution:
    """A complete per-part assignment with feasibility verdict.

    ``total_waste`` is exact µm² and is None exactly when infeasible
    (the wasted space of an infeasible solution is undefined).
    """

    assignments: tuple[Assignment, ...]
    total_waste: int | None
    feasible: bool
    solver_name: str
    runtime: float

    def assignment_map(self) -> dict[int, int | None]:
        return {a.part_id: a.module_id for a in self.assignments}


def waste(part: Part, module: ModuleSpec) -> int:
    """Wasted space (µm²) of putting ``part`` into ``module``.

    Defined even when the part does not fit; negative then.  Callers that
    care about placements gate on :func:`fits`.
    """
    return module.area - part.area


def fits(part: Part, module: ModuleSpec) -> bool:
    """Whether the part fits the module in either 90° orientation.

    The full disjunction is evaluated so the check is also correct for
    un-normalized dimension pairs.
    """
    return (part.length <= module.length and part.width <= module.width) or (
        part.length <= module.width and part.width <= module.length
    )


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-kind constraint violations of a solution.

    ``fit_violations`` holds (part_id, module_id) pairs where the assigned
    module cannot hold the part in any orientation, ``capacity_violations``
    holds (module_id, usage, capacity) triples, and ``unassigned`` lists
    part ids without a module.
    """

    fit_violations: tuple[tuple[int, int], ...]
    capacity_violations: tuple[tuple[int, int, int], ...]
    unassigned: tuple[int, ...]

    @property
    def feasible(self) -> bool:
        return not (self.fit_violations or self.capacity_violations or self.unassigned)

    def describe(self) -> str:
        if self.feasible:
            return "feasible"
        bits = []
        if self.fit_violations:
            bits.append(f"{len(self.fit_violations)} fit violation(s)")
        if self.capacity_violations:
            bits.append(f"{len(self.capacity_violations)} capacity violation(s)")
        if self.unassigned:
            bits.append(f"{len(self.unassigned)} unassigned part(s)")
        return ", ".join(bits)


def check_feasible(instance: Instance, solution: Solution) -> FeasibilityReport:
    """Check a solution against the fit, capacity and completeness rules.

    Dangling ids or a wrong assignment count raise :class:`StructuralError`;
    those are malformed solutions, not infeasible ones.
    """
    parts = {p.id: p for p in instance.parts}
    modules = {m.id: m for m in instance.modules}
    seen: set[int] = set()
    for a in solution.assignments:
        if a.part_id not in parts:
            raise StructuralError(f"assignment references unknown part id {a.part_id}")
        if a.module_id is not None and a.module_id not in modules:
            raise StructuralError(
                f"assignment references unknown module id {a.module_id}"
            )
        if a.part_id in seen:
            raise StructuralError(f"part id {a.part_id} assigned more than once")
        seen.add(a.part_id)
    if seen != set(parts):
        missing = sorted(set(parts) - seen)
        raise StructuralError(f"solution lacks assignments for parts {missing}")

    fit_violations = []
    unassigned = []
    usage: dict[int, int] = {m: 0 for m in modules}
    for a in solution.assignments:
        if a.module_id is None:
            unassigned.append(a.part_id)
            continue
        usage[a.module_id] += 1
        if not fits(parts[a.part_id], modules[a.module_id]):
            fit_violations.append((a.part_id, a.module_id))
    capacity_violations = [
        (m_id, used, modules[m_id].capacity)
        for m_id, used in usage.items()
        if used > modules[m_id].capacity
    ]
    return FeasibilityReport(
        fit_violations=tuple(fit_violations),
        capacity_violations=tuple(sorted(capacity_violations)),
        unassigned=tuple(unassigned),
    )


def _waste_sum(instance: Instance, assignments: Sequence[Assignment]) -> int:
    parts = {p.id: p for p in instance.parts}
    modules = {m.id: m for m in instance.modules}
    return sum(
        waste(parts[a.part_id], modules[a.module_id])
        for a in assignments
        if a.module_id is not None
    )


def total_waste(instance: Instance, solution: Solution) -> int:
    """Sum of per-assignment wasted space (µm²) of a feasible solution."""
    report = check_feasible(instance, solution)
    if not report.feasible:
        raise InfeasibleSolutionError(
            f"wasted space undefined for infeasible solution ({report.describe()})"
        )
    return _waste_sum(instance, solution.assignments)


def solution_sidecar(solution: Solution) -> str:
    """JSON sidecar document describing a solution (see the file formats)."""
    doc = {
        "solver": solution.solver_name,
        "feasible": solution.feasible,
        "total_waste": um2_to_mm2(solution.total_waste)
        if solution.total_waste is not None
        else None,
        "runtime_s": solution.runtime,
    }
    return json.dumps(doc)


def build_solution(
    instance: Instance,
    assignments: Sequence[Assignment],
    solver_name: str,
    runtime: float,
) -> Solution:
    """Assemble a Solution, deriving feasibility and waste from the rules."""
    probe = Solution(
        assignments=tuple(assignments),
        total_waste=None,
        feasible=False,
        solver_name=solver_name,
        runtime=runtime,
    )
    report = check_feasible(instance, probe)
    if not report.feasible:
        return probe
    return Solution(
        assignments=probe.assignments,
        total_waste=_waste_sum(instance, probe.assignments),
        feasible=True,
        solver_name=solver_name,
        runtime=runtime,
    )
