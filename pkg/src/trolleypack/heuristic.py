"""Best-fit greedy packing.

Each part is placed into the fitting module with free capacity that wastes
the least space; ties break toward the lower module id so runs are
reproducible.  The packing is strictly online: parts are processed in
presentation order and never re-ordered.

``best_fit_module`` is the plain linear scan.  ``ModuleIndex`` provides the
ordered-by-area variant: because every fitting module satisfies
``module.area >= part.area``, minimizing waste is the same as minimizing
module area, so the query can start at the first candidate area instead of
scanning all modules.
"""

from __future__ import annotations

import time
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Assignment, Instance, ModuleSpec, Part, Solution, fits, waste


@dataclass
class PackingState:
    """Module set plus per-module remaining capacity counters."""

    modules: tuple[ModuleSpec, ...]
    remaining: list[int]

    @classmethod
    def fresh(cls, modules: Iterable[ModuleSpec]) -> "PackingState":
        mods = tuple(modules)
        return cls(modules=mods, remaining=[m.capacity for m in mods])

    def index_of(self, module_id: int) -> int:
        for i, m in enumerate(self.modules):
            if m.id == module_id:
                return i
        raise KeyError(f"unknown module id {module_id}")

    def place(self, module_id: int) -> None:
        """Consume one slot; for each packed part the capacity drops by one."""
        i = self.index_of(module_id)
        if self.remaining[i] <= 0:
            raise ValueError(f"module {module_id} has no free capacity")
        self.remaining[i] -= 1


def best_fit_module(part: Part, state: PackingState) -> int | None:
    """Id of the fitting module with free capacity and least waste, or None.

    The state is not modified.
    """
    best_id: int | None = None
    best_waste = 0
    for module, left in zip(state.modules, state.remaining):
        if left <= 0 or not fits(part, module):
            continue
        w = waste(part, module)
        if best_id is None or w < best_waste or (w == best_waste and module.id < best_id):
            best_id = module.id
            best_waste = w
    return best_id


class ModuleIndex:
    """Ordered index over modules keyed by (area, id).

    The key set is fixed at construction (module types never change while
    packing; only capacities do), so the ordered map is kept as a sorted
    array with a mutable capacity column.  Queries locate the first
    candidate area with ``bisect`` and probe upward; equal-area modules of
    different shape are all probed, because area order does not imply fit
    order.
    """

    def __init__(self, modules: Iterable[ModuleSpec], remaining: Sequence[int] | None = None):
        mods = list(modules)
        if remaining is None:
            remaining = [m.capacity for m in mods]
        if len(remaining) != len(mods):
            raise ValueError("one capacity counter per module required")
        order = sorted(range(len(mods)), key=lambda i: (mods[i].area, mods[i].id))
        self._modules = [mods[i] for i in order]
        self._areas = [m.area for m in self._modules]
        self._remaining = [remaining[i] for i in order]
        self._slot_by_id = {m.id: s for s, m in enumerate(self._modules)}

    @classmethod
    def from_state(cls, state: PackingState) -> "ModuleIndex":
        return cls(state.modules, state.remaining)

    def query(self, part: Part) -> int | None:
        """Same result as :func:`best_fit_module` on the equivalent state."""
        # Modules below the part's area can never fit it.
        start = bisect_left(self._areas, part.area)
        for slot in range(start, len(self._modules)):
            module = self._modules[slot]
            if self._remaining[slot] > 0 and fits(part, module):
                return module.id
        return None

    def consume(self, module_id: int) -> None:
        slot = self._slot_by_id[module_id]
        if self._remaining[slot] <= 0:
            raise ValueError(f"module {module_id} has no free capacity")
        self._remaining[slot] -= 1


def best_fit_module_indexed(part: Part, index: ModuleIndex) -> int | None:
    return index.query(part)


def best_fit_pack(instance: Instance, *, solver_name: str = "bestfit") -> Solution:
    """Pack all parts in presentation order with the best-fit rule.

    A part that fits nowhere is left unassigned and packing continues, so
    the returned solution carries the full violation picture; the solution
    is then marked infeasible.
    """
    state = PackingState.fresh(instance.modules)
    assignments: list[Assignment] = []
    waste_sum = 0
    all_placed = True
    t0 = time.perf_counter()
    for part in instance.parts:
        chosen = best_fit_module(part, state)
        if chosen is None:
            all_placed = False
            assignments.append(Assignment(part.id, None))
            continue
        state.place(chosen)
        waste_sum += waste(part, instance.module_by_id(chosen))
        assignments.append(Assignment(part.id, chosen))
    runtime = time.perf_counter() - t0
    return Solution(
        assignments=tuple(assignments),
        total_waste=waste_sum if all_placed else None,
        feasible=all_placed,
        solver_name=solver_name,
        runtime=runtime,
    )
