"""Trolley packing: assign rectangular parts to capacitated trolley modules.

Solver families: best-fit greedy (`heuristic`), exact optimization
(`exact`: branch-and-bound and min-cost flow), and a from-scratch dueling
double-DQN agent (`drl`), plus the incremental benchmark harness
(`bench`) and a command-line front end (`cli`).

Dimensions are fixed-point: millimeter inputs with up to three decimals
are stored as integer micrometers, so wasted-space comparisons are exact.
"""

from .core import (
    MM2,
    Assignment,
    FeasibilityReport,
    InfeasibleSolutionError,
    Instance,
    ModuleSpec,
    Part,
    Solution,
    StructuralError,
    check_feasible,
    fits,
    total_waste,
    waste,
)
from .heuristic import (
    ModuleIndex,
    PackingState,
    best_fit_module,
    best_fit_module_indexed,
    best_fit_pack,
)
from .exact import (
    BnbResult,
    SolveStatus,
    UnpackableError,
    min_trolleys,
    solve_bnb,
    solve_bruteforce,
    solve_flow,
)

__version__ = "0.1.0"

__all__ = [
    "MM2",
    "Assignment",
    "FeasibilityReport",
    "InfeasibleSolutionError",
    "Instance",
    "ModuleSpec",
    "Part",
    "Solution",
    "StructuralError",
    "check_feasible",
    "fits",
    "total_waste",
    "waste",
    "ModuleIndex",
    "PackingState",
    "best_fit_module",
    "best_fit_module_indexed",
    "best_fit_pack",
    "BnbResult",
    "SolveStatus",
    "UnpackableError",
    "min_trolleys",
    "solve_bnb",
    "solve_bruteforce",
    "solve_flow",
    "__version__",
]
