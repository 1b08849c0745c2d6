"""Exact routing optimization by branch and bound over candidate paths.

Two problems are solved:

* the maximal protecting spanning tree: a logical spanning tree and branch
  routes whose combined physical support has the least total cost;
* the base mapping: a route for every logical link minimizing the total
  cost of critical physical links.

Link costs are 1 under the uniform model and ``-ln(1 - rho)`` otherwise, so
the survivable probability is recovered as ``exp(-objective)`` (random) or
``(1 - rho) ** objective`` (uniform).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

from .model import (
    CrossLayerInstance,
    InfeasibleError,
    Link,
    LinkMapping,
    PathPolicy,
    default_policy,
    enumerate_paths,
    path_links,
    removal_oracle,
)
from .survivability import (
    BaseTreeSet,
    ProtectingTree,
    critical_links,
    extract_base_tree_set,
    survival_product,
    tree_links,
)

log = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 450.0
_EPS = 1e-9


class BudgetExceeded(RuntimeError):
    """The search hit its node or time cap before proving optimality."""


@dataclass(frozen=True)
class WeightModel:
    kind: str
    costs: Mapping[Link, float]


def build_weights(inst: CrossLayerInstance, kind: str = "random") -> WeightModel:
    if kind == "uniform":
        return WeightModel(kind, {e: 1.0 for e in inst.physical.links})
    if kind == "random":
        costs = {}
        for e in inst.physical.links:
            rho = inst.rho(e)
            if rho >= 1.0:
                raise ValueError(f"link {e} has failure probability 1 (infinite cost)")
            costs[e] = -math.log1p(-rho)
        return WeightModel(kind, costs)
    raise ValueError(f"unknown weight kind {kind!r}")


@dataclass(frozen=True)
class Budget:
    time_limit: float | None = DEFAULT_TIME_LIMIT
    max_nodes: int | None = None


@dataclass
class SearchStats:
    nodes: int = 0
    wall_time: float = 0.0
    incumbent_updates: int = 0


@dataclass(frozen=True)
class SolveResult:
    mapping: LinkMapping
    unprotected: frozenset[Link]
    objective: float
    phi: float
    base_set: BaseTreeSet
    weights: WeightModel
    stats: SearchStats = field(compare=False)


@dataclass(frozen=True)
class MaxTreeResult:
    tree: ProtectingTree
    objective: float
    phi: float
    weights: WeightModel
    stats: SearchStats = field(compare=False)


def _resolve(inst, policy, weights):
    policy = policy or default_policy(inst)
    if isinstance(weights, str):
        weights = build_weights(inst, weights)
    return policy, weights


class _Clock:
    def __init__(self, budget: Budget, stats: SearchStats):
        self.budget = budget
        self.stats = stats
        self.start = time.perf_counter()

    def tick(self):
        self.stats.nodes += 1
        b = self.budget
        if b.max_nodes is not None and self.stats.nodes > b.max_nodes:
            raise BudgetExceeded(f"node limit {b.max_nodes} reached")
        if b.time_limit is not None and self.stats.nodes % 256 == 0:
            if time.perf_counter() - self.start > b.time_limit:
                raise BudgetExceeded(f"time limit {b.time_limit}s reached")

    def stop(self):
        self.stats.wall_time = time.perf_counter() - self.start


def _objective(weights: WeightModel, links) -> float:
    return math.fsum(weights.costs[e] for e in sorted(links))


def candidate_paths(inst: CrossLayerInstance, policy: PathPolicy) -> dict[Link, tuple]:
    return {u: enumerate_paths(inst, u, policy).paths for u in inst.logical.sorted_links}


# ---------------------------------------------------------------------------
# Base mapping


class _MappingSearch:
    """DFS over per-logical-link route choices with domain filtering.

    A physical link is *forced* at a search node when the committed links
    through it, together with uncommitted links whose every remaining
    candidate crosses it, already disconnect G_L. Forced status is monotone
    down a branch and equals criticality at a leaf, so the forced cost is an
    admissible bound that is exact at the leaves. Candidates whose own
    increment pushes the bound past the incumbent are filtered out, which in
    turn can make more links mandatory; this is iterated to a fixpoint.
    """

    def __init__(self, inst, cands, weights, clock):
        pidx = inst.physical.link_index
        llinks = inst.logical.sorted_links
        self.cost = [weights.costs[e] for e in inst.physical.sorted_links]
        self.np = len(self.cost)
        self.nl = len(llinks)
        self.disconnects = removal_oracle(inst.logical)
        self.clock = clock
        # per logical link (by sorted index): path link-index tuples and bitmasks
        self.cand = [tuple(tuple(sorted(pidx[e] for e in path_links(p))) for p in cands[u])
                     for u in llinks]
        self.pmask = [tuple(sum(1 << i for i in p) for p in paths) for paths in self.cand]

    def exact_cost(self, choice) -> float:
        through = [0] * self.np
        for k, j in enumerate(choice):
            for i in self.cand[k][j]:
                through[i] |= 1 << k
        return math.fsum(c for c, t in zip(self.cost, through) if t and self.disconnects(t))

    def greedy(self):
        """Cheapest-increment construction followed by first-improvement local search."""
        choice = [0] * self.nl
        through = [0] * self.np
        for k in sorted(range(self.nl), key=lambda k: (len(self.cand[k]), k)):
            best_j, best_d = 0, math.inf
            for j, p in enumerate(self.cand[k]):
                d = sum(self.cost[i] for i in p if self.disconnects(through[i] | (1 << k))
                        and not self.disconnects(through[i]))
                if d < best_d - _EPS:
                    best_j, best_d = j, d
            choice[k] = best_j
            for i in self.cand[k][best_j]:
                through[i] |= 1 << k
        value = self.exact_cost(choice)
        improved = True
        while improved:
            improved = False
            for k in range(self.nl):
                for j in range(len(self.cand[k])):
                    if j == choice[k]:
                        continue
                    trial = list(choice)
                    trial[k] = j
                    v = self.exact_cost(trial)
                    if v < value - _EPS:
                        choice, value, improved = trial, v, True
        return choice, value

    def _propagate(self, through, domains, best):
        """Filter domains against the incumbent.

        Returns ``(lb, forced, deltas)`` or ``None`` when the node is pruned.
        ``deltas[k][j]`` is the bound increment of taking ``domains[k][j]``.
        """
        cost, cand, pmask, disconnects = self.cost, self.cand, self.pmask, self.disconnects
        np_ = self.np
        while True:
            mand = [0] * np_
            for k, dom in domains.items():
                common = pmask[k][dom[0]]
                for j in dom[1:]:
                    common &= pmask[k][j]
                i = 0
                while common:
                    if common & 1:
                        mand[i] |= 1 << k
                    common >>= 1
                    i += 1
            base = [through[i] | mand[i] for i in range(np_)]
            forced = [bool(b) and disconnects(b) for b in base]
            lb = math.fsum(c for c, f in zip(cost, forced) if f)
            if lb >= best - _EPS:
                return None
            shrunk = False
            deltas = {}
            for k, dom in domains.items():
                bit = 1 << k
                keep, dk = [], []
                for j in dom:
                    d = sum(cost[i] for i in cand[k][j]
                            if not forced[i] and disconnects(base[i] | bit))
                    if lb + d < best - _EPS:
                        keep.append(j)
                        dk.append(d)
                if not keep:
                    return None
                if len(keep) < len(dom):
                    shrunk = True
                    domains[k] = keep
                deltas[k] = dk
            if not shrunk:
                if lb + max(min(d) for d in deltas.values()) >= best - _EPS:
                    return None
                return lb, forced, deltas

    def run(self):
        best_choice, best = self.greedy()
        stats = self.clock.stats
        choice = [0] * self.nl
        through = [0] * self.np

        def dfs(domains):
            nonlocal best, best_choice
            self.clock.tick()
            if not domains:
                value = self.exact_cost(choice)
                if value < best - _EPS:
                    best, best_choice = value, list(choice)
                    stats.incumbent_updates += 1
                return
            domains = {k: list(d) for k, d in domains.items()}
            res = self._propagate(through, domains, best)
            if res is None:
                return
            lb, _, deltas = res
            k = min(domains, key=lambda k: (len(domains[k]), k))
            rest = {v: d for v, d in domains.items() if v != k}
            bit = 1 << k
            for d, j in sorted(zip(deltas[k], domains[k])):
                if lb + d >= best - _EPS:
                    break
                for i in self.cand[k][j]:
                    through[i] |= bit
                choice[k] = j
                dfs(rest)
                for i in self.cand[k][j]:
                    through[i] &= ~bit

        dfs({k: list(range(len(self.cand[k]))) for k in range(self.nl)})
        return best_choice, best


def solve_base_mapping(
    inst: CrossLayerInstance,
    policy: PathPolicy | None = None,
    weights: WeightModel | str = "random",
    budget: Budget = Budget(),
) -> SolveResult:
    """Mapping minimizing the total cost of critical physical links.

    Exact over the candidate path sets; with the default all-paths policy the
    result is the maximal survivable probability of the instance. Ties are
    broken by the first optimum met in the deterministic search order.
    """
    policy, weights = _resolve(inst, policy, weights)
    cands = candidate_paths(inst, policy)
    stats = SearchStats()
    clock = _Clock(budget, stats)
    llinks = inst.logical.sorted_links
    if llinks:
        search = _MappingSearch(inst, cands, weights, clock)
        try:
            choice, _ = search.run()
        finally:
            clock.stop()
        mapping = LinkMapping({u: cands[u][j] for u, j in zip(llinks, choice)})
    else:
        clock.stop()
        mapping = LinkMapping({})
    unprotected = critical_links(inst, mapping)
    log.debug("base mapping: %d nodes in %.3fs", stats.nodes, stats.wall_time)
    return SolveResult(
        mapping=mapping,
        unprotected=unprotected,
        objective=_objective(weights, unprotected),
        phi=survival_product(inst, unprotected),
        base_set=extract_base_tree_set(inst, mapping),
        weights=weights,
        stats=stats,
    )


# ---------------------------------------------------------------------------
# Maximal protecting spanning tree


class _TreeSearch:
    """DFS deciding, per logical link in order, to skip it or take it with one route.

    Taken links must keep the branch set a forest; the bound is the cost of
    the union of committed routes, which only grows.
    """

    def __init__(self, inst, cands, weights, clock):
        pidx = inst.physical.link_index
        self.llinks = inst.logical.sorted_links
        self.nodes = inst.logical.sorted_nodes
        self.pos = {v: i for i, v in enumerate(self.nodes)}
        self.cost = [weights.costs[e] for e in inst.physical.sorted_links]
        self.cand = [tuple(tuple(sorted(pidx[e] for e in path_links(p))) for p in cands[u])
                     for u in self.llinks]
        self.need = len(self.nodes) - 1
        self.clock = clock

    def _components(self, taken):
        parent = list(range(len(self.nodes)))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for k in taken:
            a, b = self.llinks[k]
            parent[find(self.pos[a])] = find(self.pos[b])
        return parent, find

    def greedy(self):
        """Repeatedly add the (link, route) with the smallest incremental cost."""
        used = set()
        taken = {}
        parent, find = self._components([])
        while len(taken) < self.need:
            best = None
            for k, (a, b) in enumerate(self.llinks):
                if k in taken or find(self.pos[a]) == find(self.pos[b]):
                    continue
                for j, p in enumerate(self.cand[k]):
                    d = sum(self.cost[i] for i in set(p) - used)
                    if best is None or d < best[0] - _EPS:
                        best = (d, k, j)
            _, k, j = best
            taken[k] = j
            used |= set(self.cand[k][j])
            a, b = self.llinks[k]
            parent[find(self.pos[a])] = find(self.pos[b])
        return taken, math.fsum(self.cost[i] for i in sorted(used))

    def run(self):
        best_taken, best = self.greedy()
        nl = len(self.llinks)
        usage = [0] * len(self.cost)
        taken: dict[int, int] = {}

        def spans(excluded_upto):
            # can the taken links plus all undecided ones still span G_L?
            keep = list(taken) + list(range(excluded_upto, nl))
            parent, find = self._components(keep)
            return len({find(i) for i in range(len(self.nodes))}) == 1

        def dfs(k, lb):
            nonlocal best, best_taken
            self.clock.tick()
            if len(taken) == self.need:
                if lb < best - _EPS:
                    best, best_taken = lb, dict(taken)
                    self.clock.stats.incumbent_updates += 1
                return
            if k == nl or len(taken) + (nl - k) < self.need:
                return
            a, b = self.llinks[k]
            parent, find = self._components(taken)
            if find(self.pos[a]) != find(self.pos[b]):
                for j, p in enumerate(self.cand[k]):
                    child_lb = lb + sum(self.cost[i] for i in p if usage[i] == 0)
                    if child_lb >= best - _EPS:
                        continue
                    for i in p:
                        usage[i] += 1
                    taken[k] = j
                    dfs(k + 1, child_lb)
                    del taken[k]
                    for i in p:
                        usage[i] -= 1
            if spans(k + 1):
                dfs(k + 1, lb)

        if self.need > 0:
            dfs(0, 0.0)
        return best_taken, best


def solve_max_prct_tree(
    inst: CrossLayerInstance,
    policy: PathPolicy | None = None,
    weights: WeightModel | str = "random",
    budget: Budget = Budget(),
) -> MaxTreeResult:
    """Routed logical spanning tree with the least-cost physical support."""
    policy, weights = _resolve(inst, policy, weights)
    cands = candidate_paths(inst, policy)
    stats = SearchStats()
    clock = _Clock(budget, stats)
    search = _TreeSearch(inst, cands, weights, clock)
    try:
        taken, _ = search.run()
    finally:
        clock.stop()
    routes = {search.llinks[k]: cands[search.llinks[k]][j] for k, j in sorted(taken.items())}
    tree = ProtectingTree(frozenset(routes), routes)
    support = tree_links(tree)
    return MaxTreeResult(
        tree=tree,
        objective=_objective(weights, support),
        phi=survival_product(inst, support),
        weights=weights,
        stats=stats,
    )


__all__ = [
    "Budget",
    "BudgetExceeded",
    "InfeasibleError",
    "MaxTreeResult",
    "SearchStats",
    "SolveResult",
    "WeightModel",
    "build_weights",
    "candidate_paths",
    "solve_base_mapping",
    "solve_max_prct_tree",
]
