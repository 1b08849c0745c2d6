"""Failure-probability scenarios and sweeps comparing the two optimizers.

CSV columns (stable): ``scenario, rho_or_mean, replicate, base_phi,
maxtree_phi, ratio, num_unprotected, solve_ms, status``. ``solve_ms`` is left
empty unless timing is requested, so identical runs give identical files.
Random replicate ``r`` draws from PCG64 seeded with ``seed + r``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import CrossLayerInstance, InfeasibleError, Link, PathPolicy
from .optimizer import (
    Budget,
    BudgetExceeded,
    WeightModel,
    build_weights,
    solve_base_mapping,
    solve_max_prct_tree,
)
from .survivability import survival_product, tree_links

log = logging.getLogger(__name__)

CSV_HEADER = ("scenario", "rho_or_mean", "replicate", "base_phi", "maxtree_phi",
              "ratio", "num_unprotected", "solve_ms", "status")
MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class FailureScenario:
    kind: str
    prob: Mapping[Link, float]
    level: float
    sd: float = 0.0
    replicate: int = 0
    seed: int | None = None


def uniform_scenario(inst: CrossLayerInstance, rho: float) -> FailureScenario:
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"uniform failure probability {rho} outside [0, 1)")
    return FailureScenario("uniform", {e: rho for e in inst.physical.sorted_links}, rho)


def gen_random_probs(
    inst: CrossLayerInstance, mean: float, sd: float, seed: int, replicate: int = 0
) -> FailureScenario:
    """Per-link probabilities from a normal law truncated to (0, 1) by rejection."""
    if not 0.0 <= mean < 1.0 or sd < 0.0:
        raise ValueError("need 0 <= mean < 1 and sd >= 0")
    if sd == 0.0:
        if mean == 0.0:
            raise ValueError("mean 0 with sd 0 has no positive value to draw")
        return FailureScenario("random", {e: mean for e in inst.physical.sorted_links},
                               mean, sd, replicate, seed)
    rng = np.random.Generator(np.random.PCG64(seed))
    prob = {}
    for e in inst.physical.sorted_links:
        for _ in range(MAX_REJECTIONS):
            x = float(rng.normal(mean, sd))
            if 0.0 < x < 1.0:
                prob[e] = x
                break
        else:
            raise ValueError(f"rejection sampling failed for mean={mean}, sd={sd}")
    return FailureScenario("random", prob, mean, sd, replicate, seed)


def rho_grid(start: float, end: float, step: float) -> list[float]:
    """Inclusive grid from ``start`` to ``end``; values rounded to 12 decimals."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor(abs(end - start) / step + 1e-9))
    sign = 1.0 if end >= start else -1.0
    return [round(start + sign * k * step, 12) for k in range(n + 1)]


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    rho_or_mean: float
    replicate: int | str
    base_phi: float | None
    maxtree_phi: float | None
    ratio: float | None
    num_unprotected: float | None
    solve_ms: float | None
    status: str

    def as_csv(self) -> list[str]:
        def f(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return f"{x:.12g}"
            return str(x)

        return [f(getattr(self, c)) for c in CSV_HEADER]


class _Solver:
    """Solves both objectives, reusing results for repeated weight vectors."""

    def __init__(self, policy, budget):
        self.policy = policy
        self.budget = budget
        self.cache: dict[tuple, tuple] = {}

    def __call__(self, inst: CrossLayerInstance, weights: WeightModel):
        key = (weights.kind, tuple(weights.costs[e] for e in inst.physical.sorted_links))
        if key not in self.cache:
            base = solve_base_mapping(inst, self.policy, weights, self.budget)
            tree = solve_max_prct_tree(inst, self.policy, weights, self.budget)
            self.cache[key] = (base.unprotected, tree_links(tree.tree))
        return self.cache[key]


def _solve_row(inst, scenario: FailureScenario, weight_kind, solver, timing, name, replicate):
    scen_inst = inst.with_failure_probs(scenario.prob)
    t0 = time.perf_counter()
    try:
        unprotected, support = solver(scen_inst, build_weights(scen_inst, weight_kind))
    except InfeasibleError as exc:
        log.warning("%s: infeasible (%s)", name, exc)
        return SweepRow(name, scenario.level, replicate, None, None, None, None, None, "infeasible")
    except BudgetExceeded as exc:
        log.warning("%s: budget exceeded (%s)", name, exc)
        return SweepRow(name, scenario.level, replicate, None, None, None, None, None, "budget")
    ms = (time.perf_counter() - t0) * 1000.0 if timing else None
    base_phi = survival_product(scen_inst, unprotected)
    tree_phi = survival_product(scen_inst, support)
    ratio = tree_phi / base_phi if base_phi > 0 else None
    return SweepRow(name, scenario.level, replicate, base_phi, tree_phi, ratio,
                    len(unprotected), ms, "ok")


def run_sweep(
    inst: CrossLayerInstance,
    grid: Sequence[float],
    mode: str = "uniform",
    sd: float = 0.02,
    replicates: int = 5,
    seed: int = 0,
    policy: PathPolicy | None = None,
    budget: Budget = Budget(),
    timing: bool = False,
) -> list[SweepRow]:
    """One row per grid value (uniform) or per (mean, replicate) plus a mean row (random).

    Uniform rows optimize link counts; random rows optimize ``-ln(1 - rho)``.
    A failing solve marks its row and the sweep continues.
    """
    solver = _Solver(policy, budget)
    rows: list[SweepRow] = []
    for g, level in enumerate(grid):
        if mode == "uniform":
            scen = uniform_scenario(inst, level)
            rows.append(_solve_row(inst, scen, "uniform", solver, timing, f"uniform:{g}", 0))
            continue
        if mode != "random":
            raise ValueError(f"unknown sweep mode {mode!r}")
        reps = []
        for r in range(replicates):
            name = f"random:{g}"
            try:
                scen = gen_random_probs(inst, level, sd, seed + r, r)
            except ValueError as exc:
                log.warning("%s replicate %d: %s", name, r, exc)
                reps.append(SweepRow(name, level, r, None, None, None, None, None, "error"))
                continue
            reps.append(_solve_row(inst, scen, "random", solver, timing, name, r))
        rows += reps
        rows.append(_mean_row(f"random:{g}", level, reps))
    return rows


def _mean_row(name, level, reps: list[SweepRow]) -> SweepRow:
    ok = [r for r in reps if r.status == "ok"]
    if not ok:
        return SweepRow(name, level, "mean", None, None, None, None, None, "error")
    base = float(np.mean([r.base_phi for r in ok]))
    tree = float(np.mean([r.maxtree_phi for r in ok]))
    unprot = float(np.mean([r.num_unprotected for r in ok]))
    ms = None
    if all(r.solve_ms is not None for r in ok):
        ms = float(np.mean([r.solve_ms for r in ok]))
    status = "ok" if len(ok) == len(reps) else "partial"
    return SweepRow(name, level, "mean", base, tree, tree / base if base > 0 else None, unprot, ms, status)


def write_csv(rows: Iterable[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.as_csv())


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
