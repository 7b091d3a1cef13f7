"""Exact solvers for the module-assignment problem.

Three independent routes to provably optimal assignments:

* :func:`solve_bruteforce` — guarded exhaustive enumeration, the test oracle;
* :func:`solve_bnb` — depth-first branch-and-bound searching the smallest
  variable domain first and trying the smallest-waste value first;
* :func:`solve_flow` — the objective is separable over (part, module) pairs,
  which makes the whole problem a transportation problem; successive
  shortest paths with node potentials solve it in polynomial time.

:func:`min_trolleys` reproduces the capacity-scaling rule of the benchmark
protocol: the smallest trolley count under which best-fit packing succeeds.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .core import Assignment, Instance, ModuleSpec, Part, Solution, fits, waste
from .heuristic import best_fit_pack

BRUTEFORCE_MAX_PARTS = 10
BRUTEFORCE_MAX_MODULES = 8


class UnpackableError(ValueError):
    """Some part fits no module type, so no trolley count can help."""

    def __init__(self, part_ids: Sequence[int]):
        self.part_ids = tuple(part_ids)
        super().__init__(f"parts {list(self.part_ids)} fit no available module type")


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class SearchNode:
    """Snapshot of a branch-and-bound node (exposed for instrumentation).

    ``partial`` maps the solver's first ``depth`` parts (in its search
    order) to module ids; ``lower_bound`` never exceeds the cost of any
    feasible completion of the node.
    """

    depth: int
    partial: tuple[int, ...]
    remaining: tuple[int, ...]
    partial_cost: int
    lower_bound: int


@dataclass
class BnbResult:
    """Outcome of :func:`solve_bnb`.

    ``solution`` is the proven optimum for OPTIMAL, the best incumbent (or
    None) for TIMEOUT, and None for INFEASIBLE.
    """

    status: SolveStatus
    solution: Solution | None
    nodes_expanded: int


def solve_bruteforce(instance: Instance) -> Solution | None:
    """Minimum-waste assignment by full enumeration, or None if infeasible.

    Deliberately naive so it can serve as the oracle for the other
    solvers; refuses instances beyond the guard sizes.
    """
    n, m = len(instance.parts), len(instance.modules)
    if n > BRUTEFORCE_MAX_PARTS or m > BRUTEFORCE_MAX_MODULES:
        raise ValueError(
            f"brute force limited to {BRUTEFORCE_MAX_PARTS} parts and "
            f"{BRUTEFORCE_MAX_MODULES} modules, got {n} and {m}"
        )
    t0 = time.perf_counter()
    modules = instance.modules
    remaining = [mod.capacity for mod in modules]
    chosen = [0] * n
    best_cost: int | None = None
    best: list[int] | None = None

    def recurse(depth: int, cost: int) -> None:
        nonlocal best_cost, best
        if depth == n:
            if best_cost is None or cost < best_cost:
                best_cost = cost
                best = chosen[:n]
            return
        part = instance.parts[depth]
        for j, mod in enumerate(modules):
            if remaining[j] <= 0 or not fits(part, mod):
                continue
            remaining[j] -= 1
            chosen[depth] = j
            recurse(depth + 1, cost + waste(part, mod))
            remaining[j] += 1

    recurse(0, 0)
    runtime = time.perf_counter() - t0
    if best_cost is None and n > 0:
        return None
    assignments = tuple(
        Assignment(p.id, modules[best[i]].id) for i, p in enumerate(instance.parts)
    ) if n else ()
    return Solution(
        assignments=assignments,
        total_waste=best_cost if n else 0,
        feasible=True,
        solver_name="bruteforce",
        runtime=runtime,
    )


def _search_order(instance: Instance) -> list[int]:
    """Part indices ordered smallest fit-domain first, larger area first."""
    counts = []
    for i, part in enumerate(instance.parts):
        domain = sum(1 for mod in instance.modules if fits(part, mod))
        counts.append((domain, -part.area, part.id, i))
    return [i for _, _, _, i in sorted(counts)]


def solve_bnb(
    instance: Instance,
    timeout: float = 60.0,
    on_node: Callable[[SearchNode], None] | None = None,
) -> BnbResult:
    """Branch-and-bound over module assignments.

    Variable order: parts ascending by number of fitting modules, ties by
    larger area then id.  Value order: fitting modules ascending by waste,
    ties by id.  Nodes are pruned when their admissible lower bound
    (partial cost plus each unassigned part's minimum fitting waste,
    capacities ignored) cannot beat the incumbent.  The incumbent is
    seeded from best-fit when that is feasible.

    ``on_node`` receives a :class:`SearchNode` snapshot for every expanded
    node; meant for tests, it slows the search down noticeably.
    """
    t0 = time.perf_counter()
    deadline = t0 + timeout
    order = _search_order(instance)
    parts = [instance.parts[i] for i in order]
    modules = instance.modules
    n = len(parts)
    if n == 0:
        empty = Solution((), 0, True, "exact-bnb", time.perf_counter() - t0)
        return BnbResult(SolveStatus.OPTIMAL, empty, 0)

    # Static per-part candidate lists (fit only; capacity checked live) and
    # suffix sums of each part's minimum waste, for O(1) bounds.
    candidates: list[list[tuple[int, int]]] = []  # (waste, module slot)
    min_waste: list[int | None] = []
    for part in parts:
        cand = sorted(
            (waste(part, mod), j)
            for j, mod in enumerate(modules)
            if fits(part, mod)
        )
        candidates.append(cand)
        min_waste.append(cand[0][0] if cand else None)
    if any(w is None for w in min_waste):
        # Some part fits nothing: provably infeasible, no search needed.
        return BnbResult(SolveStatus.INFEASIBLE, None, 0)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + min_waste[i]

    incumbent_cost: int | None = None
    incumbent: list[int] | None = None  # module slot per search position
    seed = best_fit_pack(instance)
    if seed.feasible:
        slot_by_id = {mod.id: j for j, mod in enumerate(modules)}
        seed_map = seed.assignment_map()
        incumbent = [slot_by_id[seed_map[p.id]] for p in parts]
        incumbent_cost = seed.total_waste

    remaining = [mod.capacity for mod in modules]
    chosen = [0] * n
    nodes_expanded = 0
    timed_out = False

    # Iterative DFS; each frame is the candidate cursor for one depth.
    cursors = [0]
    applied: list[int | None] = [None]
    cost_at = [0]
    while cursors:
        depth = len(cursors) - 1
        slot = applied[depth]
        if slot is not None:
            remaining[slot] += 1
            applied[depth] = None
        if time.perf_counter() > deadline:
            timed_out = True
            break
        part = parts[depth]
        cand = candidates[depth]
        advanced = False
        i = cursors[depth]
        while i < len(cand):
            w, slot = cand[i]
            i += 1
            if remaining[slot] <= 0:
                continue
            bound = cost_at[depth] + w + suffix[depth + 1]
            if incumbent_cost is not None and bound >= incumbent_cost:
                # Candidates are waste-sorted, so later ones bound no better.
                i = len(cand)
                break
            cursors[depth] = i
            remaining[slot] -= 1
            chosen[depth] = slot
            applied[depth] = slot
            nodes_expanded += 1
            if on_node is not None:
                on_node(
                    SearchNode(
                        depth=depth + 1,
                        partial=tuple(
                            modules[chosen[d]].id for d in range(depth + 1)
                        ),
                        remaining=tuple(remaining),
                        partial_cost=cost_at[depth] + w,
                        lower_bound=bound,
                    )
                )
            if depth + 1 == n:
                incumbent_cost = cost_at[depth] + w
                incumbent = chosen[:n]
                remaining[slot] += 1
                applied[depth] = None
                continue
            cursors.append(0)
            applied.append(None)
            cost_at.append(cost_at[depth] + w)
            advanced = True
            break
        if advanced:
            continue
        cursors.pop()
        applied.pop()
        cost_at.pop()

    runtime = time.perf_counter() - t0
    if timed_out:
        solution = (
            _solution_from_slots(instance, order, incumbent, "exact-bnb", runtime)
            if incumbent is not None
            else None
        )
        return BnbResult(SolveStatus.TIMEOUT, solution, nodes_expanded)
    if incumbent is None:
        return BnbResult(SolveStatus.INFEASIBLE, None, nodes_expanded)
    solution = _solution_from_slots(instance, order, incumbent, "exact-bnb", runtime)
    return BnbResult(SolveStatus.OPTIMAL, solution, nodes_expanded)


def _solution_from_slots(
    instance: Instance,
    order: Sequence[int],
    slots: Sequence[int],
    solver_name: str,
    runtime: float,
) -> Solution:
    modules = instance.modules
    module_of = {}
    cost = 0
    for pos, part_index in enumerate(order):
        part = instance.parts[part_index]
        mod = modules[slots[pos]]
        module_of[part.id] = mod.id
        cost += waste(part, mod)
    assignments = tuple(Assignment(p.id, module_of[p.id]) for p in instance.parts)
    return Solution(
        assignments=assignments,
        total_waste=cost,
        feasible=True,
        solver_name=solver_name,
        runtime=runtime,
    )


class _MinCostFlow:
    """Successive shortest paths with node potentials (Dijkstra)."""

    def __init__(self, n: int):
        self.n = n
        self.graph: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def add_edge(self, u: int, v: int, cap: int, cost: int) -> int:
        edge_id = len(self.to)
        self.graph[u].append(edge_id)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.graph[v].append(edge_id + 1)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return edge_id

    def run(self, source: int, sink: int) -> tuple[int, int]:
        """Send as much flow as possible; returns (flow, total cost).

        Requires all original arc costs to be non-negative, which lets the
        potentials start at zero and keeps every reduced cost non-negative
        throughout.
        """
        flow = 0
        total_cost = 0
        potential = [0] * self.n
        inf = float("inf")
        while True:
            dist = [inf] * self.n
            dist[source] = 0
            parent_edge = [-1] * self.n
            heap = [(0, source)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for edge_id in self.graph[u]:
                    if self.cap[edge_id] <= 0:
                        continue
                    v = self.to[edge_id]
                    nd = d + self.cost[edge_id] + potential[u] - potential[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent_edge[v] = edge_id
                        heapq.heappush(heap, (nd, v))
            if dist[sink] == inf:
                break
            for v in range(self.n):
                if dist[v] < inf:
                    potential[v] += dist[v]
            # Bottleneck along the augmenting path.
            push = None
            v = sink
            while v != source:
                e = parent_edge[v]
                push = self.cap[e] if push is None else min(push, self.cap[e])
                v = self.to[e ^ 1]
            v = sink
            while v != source:
                e = parent_edge[v]
                self.cap[e] -= push
                self.cap[e ^ 1] += push
                total_cost += push * self.cost[e]
                v = self.to[e ^ 1]
            flow += push
        return flow, total_cost


def solve_flow(instance: Instance) -> Solution | None:
    """Provably minimum-waste assignment via min-cost flow, or None.

    Network: source → part (capacity 1), part → module when the part fits
    (capacity 1, cost = wasted space, non-negative because fitting implies
    module area ≥ part area), module → sink (capacity = module capacity).
    A maximum flow below the part count proves infeasibility.
    """
    t0 = time.perf_counter()
    parts = instance.parts
    modules = instance.modules
    n, m = len(parts), len(modules)
    source = 0
    sink = n + m + 1
    net = _MinCostFlow(n + m + 2)
    part_edges: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i, part in enumerate(parts):
        net.add_edge(source, 1 + i, 1, 0)
        for j, mod in enumerate(modules):
            if fits(part, mod):
                w = waste(part, mod)
                assert w >= 0
                edge_id = net.add_edge(1 + i, 1 + n + j, 1, w)
                part_edges[i].append((edge_id, mod.id))
    for j, mod in enumerate(modules):
        net.add_edge(1 + n + j, sink, mod.capacity, 0)
    flow, cost = net.run(source, sink)
    runtime = time.perf_counter() - t0
    if flow < n:
        return None
    module_of: dict[int, int] = {}
    for i, part in enumerate(parts):
        for edge_id, module_id in part_edges[i]:
            if net.cap[edge_id] == 0:  # saturated forward arc carries the part
                module_of[part.id] = module_id
                break
    assignments = tuple(Assignment(p.id, module_of[p.id]) for p in parts)
    return Solution(
        assignments=assignments,
        total_waste=cost,
        feasible=True,
        solver_name="exact-flow",
        runtime=runtime,
    )


def min_trolleys(parts: Iterable[Part], module_set: Iterable[ModuleSpec]) -> int:
    """Smallest trolley count k for which best-fit packs all parts.

    Capacities are scaled to ``k * capacity``; k starts at 1 and grows.
    Parts fitting no module type with positive capacity can never be packed
    and raise :class:`UnpackableError`.
    """
    parts = tuple(parts)
    module_set = tuple(module_set)
    usable = [m for m in module_set if m.capacity > 0]
    misfits = [p.id for p in parts if not any(fits(p, m) for m in usable)]
    if misfits:
        raise UnpackableError(misfits)
    for k in itertools.count(1):
        instance = Instance(parts, [m.scaled(k) for m in module_set])
        if best_fit_pack(instance).feasible:
            return k
