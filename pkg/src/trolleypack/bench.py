"""Benchmark harness: incremental part streams, trolley scaling, CSV series.

The protocol grows a part list one part at a time.  At each size the
minimum trolley count is determined with best-fit, capacities are scaled
accordingly, and every selected algorithm solves the instance from
scratch.  Infeasible outputs are excluded from the series (leaving visible
gaps), never silently repaired.
"""

from __future__ import annotations

import csv
import io
import json
import random
import statistics
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .core import (
    Instance,
    ModuleSpec,
    Part,
    Solution,
    check_feasible,
    fits,
    um2_to_mm2,
    um2_to_mm2_str,
)
from .exact import min_trolleys, solve_bnb, solve_bruteforce, solve_flow
from .heuristic import best_fit_pack

ALGORITHMS = ("bestfit", "exact-bnb", "exact-flow", "dqn")

#: File-name labels for the series CSVs, e.g. Best_Fit_wasted_space_sum1.csv
ALGO_LABELS = {
    "bestfit": "Best_Fit",
    "exact-bnb": "Exact_BnB",
    "exact-flow": "Exact_Flow",
    "dqn": "DQN",
}

#: Points faster than this are re-measured (median of 3) to reduce jitter.
FAST_POINT_SECONDS = 0.010


@dataclass(frozen=True)
class ExperimentConfig:
    module_set: tuple[ModuleSpec, ...]
    max_parts: int = 200
    seeds: tuple[int, ...] = (1, 2, 3)
    algorithms: tuple[str, ...] = ("bestfit", "exact-flow")
    real_parts: tuple[Part, ...] | None = None  # None means random generation
    dqn_checkpoint: str | Path | None = None
    bnb_timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.max_parts < 1:
            raise ValueError("max_parts must be >= 1")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if "dqn" in self.algorithms:
            if len(self.module_set) != 6:
                raise ValueError("dqn requires a 6-module configuration")
            if self.dqn_checkpoint is None:
                raise ValueError("dqn requires a checkpoint")


@dataclass(frozen=True)
class SeriesPoint:
    """One (algorithm, part count) measurement; waste is None when excluded."""

    parts: int
    trolleys: int
    feasible: bool
    waste: int | None  # µm², None exactly when infeasible (excluded)
    runtime: float


@dataclass
class ResultSeries:
    algorithm: str
    seed: int
    points: list[SeriesPoint] = field(default_factory=list)

    @property
    def label(self) -> str:
        return ALGO_LABELS[self.algorithm]


def generate_part(rng: random.Random, modules: Sequence[ModuleSpec], part_id: int) -> Part:
    """Draw an integer-mm part that fits at least one module.

    Length is uniform between the smallest module width and the largest
    module length; width is uniform between the smallest module width and
    the drawn length.  Draws that fit no module are rejected and redrawn
    (the lower bounds always fit, so this terminates).
    """
    lo = min(m.width for m in modules)
    hi = max(m.length for m in modules)
    lo_mm = -(-lo // 1000)  # ceil to whole millimeters
    hi_mm = hi // 1000
    while True:
        length_mm = rng.randint(lo_mm, hi_mm)
        width_mm = rng.randint(lo_mm, length_mm)
        part = Part(part_id, length_mm * 1000, width_mm * 1000)
        if any(fits(part, m) for m in modules):
            return part


def _measured_run(solve: Callable[[], Solution | None]) -> tuple[Solution | None, float]:
    """Wall clock around the solve call; median of 3 for sub-10 ms points."""
    t0 = time.perf_counter()
    result = solve()
    elapsed = time.perf_counter() - t0
    if elapsed >= FAST_POINT_SECONDS:
        return result, elapsed
    times = [elapsed]
    for _ in range(2):
        t0 = time.perf_counter()
        solve()
        times.append(time.perf_counter() - t0)
    return result, statistics.median(times)


def _make_runner(algorithm: str, config: ExperimentConfig) -> Callable[[Instance], Solution | None]:
    if algorithm == "bestfit":
        return best_fit_pack
    if algorithm == "exact-flow":
        return solve_flow
    if algorithm == "exact-bnb":
        def run_bnb(instance: Instance) -> Solution | None:
            # TIMEOUT falls back to the incumbent so anytime quality shows up.
            return solve_bnb(instance, timeout=config.bnb_timeout).solution
        return run_bnb
    if algorithm == "dqn":
        # Imported lazily: the drl package pulls its part generator from here.
        from .drl import act_greedy, load_checkpoint

        net = load_checkpoint(config.dqn_checkpoint)

        def run_dqn(instance: Instance) -> Solution:
            return act_greedy(net, instance)

        return run_dqn
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_incremental(config: ExperimentConfig, seed: int) -> dict[str, ResultSeries]:
    """One incremental experiment for one seed.

    For n = 1..max_parts the part list grows by one, the minimum trolley
    count is recomputed, and each algorithm solves the scaled instance
    from scratch.  In real-parts mode the stream may end early; the run is
    then truncated with a warning point count.
    """
    rng = random.Random(seed)
    runners = {algo: _make_runner(algo, config) for algo in config.algorithms}
    series = {algo: ResultSeries(algo, seed) for algo in config.algorithms}
    parts: list[Part] = []
    for n in range(1, config.max_parts + 1):
        if config.real_parts is not None:
            if n > len(config.real_parts):
                warnings.warn(
                    f"real part stream exhausted after {len(config.real_parts)} "
                    f"parts; truncating run (max_parts={config.max_parts})"
                )
                break
            parts.append(config.real_parts[n - 1])
        else:
            parts.append(generate_part(rng, config.module_set, part_id=n))
        trolleys = min_trolleys(parts, config.module_set)
        instance = Instance(parts, [m.scaled(trolleys) for m in config.module_set])
        for algo, runner in runners.items():
            solution, runtime = _measured_run(lambda r=runner: r(instance))
            if solution is None:
                feasible = False
                waste = None
            else:
                report = check_feasible(instance, solution)
                feasible = report.feasible
                waste = solution.total_waste if feasible else None
            series[algo].points.append(
                SeriesPoint(
                    parts=n,
                    trolleys=trolleys,
                    feasible=feasible,
                    waste=waste,
                    runtime=runtime,
                )
            )
    return series


@dataclass(frozen=True)
class Divergence:
    """A probe instance on which best-fit loses to the exact optimum."""

    trial_seed: int
    kind: str  # "infeasible" or "suboptimal"
    parts: tuple[Part, ...]
    modules: tuple[ModuleSpec, ...]
    bestfit_waste: int | None
    exact_waste: int


def _probe_modules(rng: random.Random, nested: bool) -> tuple[ModuleSpec, ...]:
    count = rng.randint(2, 4)
    lengths = [rng.randint(8, 40) for _ in range(count)]
    widths = [rng.randint(5, 30) for _ in range(count)]
    if nested:
        # Pairwise-comparable chain: sort both dimension lists and pair them.
        lengths.sort()
        widths.sort()
    return tuple(
        ModuleSpec(i + 1, max(l, w) * 1000, min(l, w) * 1000, rng.randint(1, 2))
        for i, (l, w) in enumerate(zip(lengths, widths))
    )


def _probe_parts(rng: random.Random, modules: Sequence[ModuleSpec]) -> tuple[Part, ...]:
    count = rng.randint(2, 5)
    return tuple(generate_part(rng, modules, part_id=i + 1) for i in range(count))


def probe_instance(trial_seed: int, nested: bool) -> Instance:
    """Deterministically rebuild the instance of a probe trial."""
    rng = random.Random(trial_seed)
    modules = _probe_modules(rng, nested)
    parts = _probe_parts(rng, modules)
    return Instance(parts, modules)


def counterexample_probe(
    rng: random.Random, trials: int, *, nested: bool = False
) -> list[Divergence]:
    """Hunt for instances where best-fit is infeasible or suboptimal.

    Each trial draws a small random instance and compares best-fit with the
    brute-force optimum; every reported divergence replays exactly from its
    recorded trial seed via :func:`probe_instance`.
    """
    divergences: list[Divergence] = []
    for _ in range(trials):
        trial_seed = rng.getrandbits(32)
        instance = probe_instance(trial_seed, nested)
        exact = solve_bruteforce(instance)
        if exact is None:
            continue  # unsatisfiable either way; not a divergence
        bf = best_fit_pack(instance)
        if not bf.feasible:
            divergences.append(
                Divergence(
                    trial_seed=trial_seed,
                    kind="infeasible",
                    parts=instance.parts,
                    modules=instance.modules,
                    bestfit_waste=None,
                    exact_waste=exact.total_waste,
                )
            )
        elif bf.total_waste > exact.total_waste:
            divergences.append(
                Divergence(
                    trial_seed=trial_seed,
                    kind="suboptimal",
                    parts=instance.parts,
                    modules=instance.modules,
                    bestfit_waste=bf.total_waste,
                    exact_waste=exact.total_waste,
                )
            )
    return divergences


def series_csv_texts(series: ResultSeries) -> tuple[str, str]:
    """(wasted-space CSV, runtime CSV) for one series; excluded points omitted."""
    waste_buf = io.StringIO()
    time_buf = io.StringIO()
    waste_writer = csv.writer(waste_buf, lineterminator="\n")
    time_writer = csv.writer(time_buf, lineterminator="\n")
    waste_writer.writerow(["parts", "value"])
    time_writer.writerow(["parts", "value"])
    for point in series.points:
        if not point.feasible:
            continue
        waste_writer.writerow([point.parts, um2_to_mm2_str(point.waste)])
        time_writer.writerow([point.parts, f"{point.runtime:.6f}"])
    return waste_buf.getvalue(), time_buf.getvalue()


def write_series(series: Iterable[ResultSeries], outdir: str | Path) -> list[Path]:
    """Write ``<Label>_wasted_space_sum<seed>.csv`` and ``<Label>_run_time<seed>.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for s in series:
        waste_text, time_text = series_csv_texts(s)
        waste_path = outdir / f"{s.label}_wasted_space_sum{s.seed}.csv"
        time_path = outdir / f"{s.label}_run_time{s.seed}.csv"
        waste_path.write_text(waste_text, encoding="utf-8", newline="")
        time_path.write_text(time_text, encoding="utf-8", newline="")
        written.extend([waste_path, time_path])
    return written


def _percentile(sorted_values: list[float], fraction: float) -> float:
    if not sorted_values:
        return float("nan")
    index = min(len(sorted_values) - 1, max(0, round(fraction * (len(sorted_values) - 1))))
    return sorted_values[index]


def summarize(all_series: Iterable[ResultSeries]) -> dict:
    """Aggregate statistics per algorithm across seeds.

    The waste gap is measured against the exact series of the same seed
    (exact-flow preferred, else exact-bnb) on points where both are
    feasible.
    """
    by_algo: dict[str, list[ResultSeries]] = {}
    by_seed_exact: dict[int, ResultSeries] = {}
    all_series = list(all_series)
    for s in all_series:
        by_algo.setdefault(s.algorithm, []).append(s)
        if s.algorithm == "exact-flow" or (
            s.algorithm == "exact-bnb" and s.seed not in by_seed_exact
        ):
            by_seed_exact[s.seed] = s
    summary: dict = {"algorithms": {}}
    for algo, runs in sorted(by_algo.items()):
        points = [p for s in runs for p in s.points]
        feasible = [p for p in points if p.feasible]
        runtimes = sorted(p.runtime for p in points)
        gaps: list[float] = []
        for s in runs:
            exact = by_seed_exact.get(s.seed)
            if exact is None or exact is s:
                continue
            exact_by_n = {p.parts: p for p in exact.points}
            for p in s.points:
                ref = exact_by_n.get(p.parts)
                if p.feasible and ref is not None and ref.feasible:
                    gaps.append(um2_to_mm2(p.waste - ref.waste))
        entry = {
            "points": len(points),
            "feasibility_rate": len(feasible) / len(points) if points else None,
            "runtime_s": {
                "p50": _percentile(runtimes, 0.50),
                "p90": _percentile(runtimes, 0.90),
                "max": runtimes[-1] if runtimes else None,
            },
        }
        if gaps:
            entry["mean_waste_gap_vs_exact_mm2"] = sum(gaps) / len(gaps)
        summary["algorithms"][algo] = entry
    return summary


def write_summary(all_series: Iterable[ResultSeries], outdir: str | Path) -> Path:
    path = Path(outdir) / "summary.json"
    path.write_text(json.dumps(summarize(all_series), indent=2) + "\n", encoding="utf-8")
    return path
