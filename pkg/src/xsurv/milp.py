"""Mixed-integer models for the two routing problems, in LP text format.

Variable naming (all indices are node identifiers):

``x_i_j``      physical link (i, j) is used by the tree's routes (maxtree)
``y_s_t_i_j``  logical link (s, t) is routed over the physical arc i -> j
``z_s_t``      logical link (s, t) is a tree branch (maxtree)
``q_s_t``      tree-building flow on the logical arc s -> t (maxtree)
``g_i_j``      physical link (i, j) is unprotected (baseset)
``w_i_j_s_t``  flow on logical arc s -> t after physical link (i, j) fails (baseset)

Physical links appear with ``i < j``; arcs and logical arcs appear in both
directions. Routes of logical link ``(s, t)`` (``s < t``) flow from the image
of ``s`` to the image of ``t``. The root of every tree flow is the lowest
logical node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .model import CrossLayerInstance, Link, LinkMapping, canon, path_links
from .optimizer import WeightModel, build_weights
from .survivability import BaseTreeSet, ProtectingTree, extract_base_tree_set


@dataclass(frozen=True)
class Var:
    name: str
    binary: bool = False
    lb: float = 0.0
    ub: float | None = None


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[float, str], ...]
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass
class MilpModel:
    which: str
    root: int
    variables: dict[str, Var] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: list[tuple[float, str]] = field(default_factory=list)

    def add_var(self, name, **kw):
        self.variables[name] = Var(name, **kw)
        return name

    def add(self, name, terms, sense, rhs):
        self.constraints.append(Constraint(name, tuple(terms), sense, float(rhs)))

    def count(self, prefix: str) -> int:
        return sum(1 for n in self.variables if n.startswith(prefix + "_"))


def _arcs(links: Iterable[Link]):
    for a, b in sorted(links):
        yield a, b
        yield b, a


def _yname(u, a, b):
    return f"y_{u[0]}_{u[1]}_{a}_{b}"


def _add_routing(model: MilpModel, inst: CrossLayerInstance, u: Link, supply: str | None):
    """Flow conservation for one logical link's route; ``supply`` names z_s_t or None for 1."""
    src, dst = inst.endpoints(u)
    out: dict[int, list] = {v: [] for v in inst.physical.nodes}
    for a, b in _arcs(inst.physical.links):
        y = model.add_var(_yname(u, a, b), binary=True)
        out[a].append((1.0, y))
        out[b].append((-1.0, y))
    for v in sorted(inst.physical.nodes):
        terms = list(out[v])
        sign = 1.0 if v == src else -1.0 if v == dst else 0.0
        if not terms and sign == 0.0:
            continue
        if supply is None or sign == 0.0:
            model.add(f"route_{u[0]}_{u[1]}_n{v}", terms, "=", sign)
        else:
            model.add(f"route_{u[0]}_{u[1]}_n{v}", terms + [(-sign, supply)], "=", 0.0)


def build_maxtree_model(inst: CrossLayerInstance, weights: WeightModel) -> MilpModel:
    """Least-cost routed spanning tree.

    Binary branch selectors are paired with a continuous single-commodity
    flow capped by ``(|V_L| - 1)`` times the selector, which admits every
    spanning tree rather than only stars.
    """
    lnodes = inst.logical.sorted_nodes
    root = lnodes[0]
    n1 = len(lnodes) - 1
    model = MilpModel("maxtree", root)
    for i, j in inst.physical.sorted_links:
        model.add_var(f"x_{i}_{j}", binary=True)
        model.objective.append((weights.costs[(i, j)], f"x_{i}_{j}"))
    for u in inst.logical.sorted_links:
        z = model.add_var(f"z_{u[0]}_{u[1]}", binary=True)
        _add_routing(model, inst, u, z)
        for i, j in inst.physical.sorted_links:
            model.add(f"use_{u[0]}_{u[1]}_{i}_{j}",
                      [(1.0, _yname(u, i, j)), (1.0, _yname(u, j, i)), (-1.0, f"x_{i}_{j}")], "<=", 0)
    if n1 > 0:
        model.add("tree_size", [(1.0, f"z_{s}_{t}") for s, t in inst.logical.sorted_links], "=", n1)
        bal: dict[int, list] = {v: [] for v in lnodes}
        for s, t in _arcs(inst.logical.links):
            q = model.add_var(f"q_{s}_{t}", ub=float(n1))
            bal[s].append((1.0, q))
            bal[t].append((-1.0, q))
        for s, t in inst.logical.sorted_links:
            model.add(f"cap_{s}_{t}", [(1.0, f"q_{s}_{t}"), (1.0, f"q_{t}_{s}"),
                                       (-float(n1), f"z_{s}_{t}")], "<=", 0)
        for v in lnodes:
            model.add(f"tree_n{v}", bal[v], "=", n1 if v == root else -1)
    return model


def build_baseset_model(inst: CrossLayerInstance, weights: WeightModel) -> MilpModel:
    """Least-cost set of unprotected physical links over all full mappings.

    For each physical link a unit flow from the root reaches every other
    logical node in equal shares over logical links whose routes avoid it,
    unless the link is declared unprotected.
    """
    lnodes = inst.logical.sorted_nodes
    root = lnodes[0]
    n1 = len(lnodes) - 1
    model = MilpModel("baseset", root)
    for i, j in inst.physical.sorted_links:
        model.add_var(f"g_{i}_{j}", binary=True)
        model.objective.append((weights.costs[(i, j)], f"g_{i}_{j}"))
    for u in inst.logical.sorted_links:
        _add_routing(model, inst, u, None)
    if n1 == 0:
        return model
    for i, j in inst.physical.sorted_links:
        bal: dict[int, list] = {v: [] for v in lnodes}
        for s, t in _arcs(inst.logical.links):
            w = model.add_var(f"w_{i}_{j}_{s}_{t}")
            bal[s].append((1.0, w))
            bal[t].append((-1.0, w))
            u = canon(s, t)
            model.add(f"avoid_{i}_{j}_{s}_{t}",
                      [(1.0, w), (1.0, _yname(u, i, j)), (1.0, _yname(u, j, i))], "<=", 1)
        g = f"g_{i}_{j}"
        for v in lnodes:
            if v == root:
                model.add(f"conn_{i}_{j}_n{v}", bal[v] + [(1.0, g)], "=", 1)
            else:
                # scaled by |V_L| - 1: each non-root node absorbs (1 - g) / (|V_L| - 1)
                terms = [(c * n1, name) for c, name in bal[v]] + [(-1.0, g)]
                model.add(f"conn_{i}_{j}_n{v}", terms, "=", -1)
    return model


def build_model(inst: CrossLayerInstance, which: str, weights: WeightModel | str = "uniform") -> MilpModel:
    if isinstance(weights, str):
        weights = build_weights(inst, weights)
    if which == "maxtree":
        return build_maxtree_model(inst, weights)
    if which == "baseset":
        return build_baseset_model(inst, weights)
    raise ValueError(f"unknown model {which!r}")


# ---------------------------------------------------------------------------
# LP text


def _num(c: float) -> str:
    return repr(float(c)) if c != int(c) else str(int(c))


def _expr(terms, per_line=6) -> list[str]:
    parts = []
    for k, (c, name) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = name if mag == 1 else f"{_num(mag)} {name}"
        if k == 0:
            parts.append(f"- {body}" if c < 0 else body)
        else:
            parts.append(f"{sign} {body}")
    if not parts:
        parts = ["0"]
    return [" ".join(parts[i:i + per_line]) for i in range(0, len(parts), per_line)]


def to_lp(model: MilpModel, title: str = "") -> str:
    sense = {"<=": "<=", "=": "=", ">=": ">="}
    lines = [f"\\ {title or model.which} (root logical node {model.root})", "Minimize"]
    obj = [(c, n) for c, n in model.objective if c != 0] or model.objective[:1]
    expr = _expr(obj)
    lines.append(f" obj: {expr[0]}")
    lines += [f"   {x}" for x in expr[1:]]
    lines.append("Subject To")
    for con in model.constraints:
        expr = _expr(con.terms)
        expr[-1] += f" {sense[con.sense]} {_num(con.rhs)}"
        lines.append(f" {con.name}: {expr[0]}")
        lines += [f"   {x}" for x in expr[1:]]
    bounds = [v for v in model.variables.values() if not v.binary and (v.ub is not None or v.lb != 0)]
    if bounds:
        lines.append("Bounds")
        for v in bounds:
            ub = "+inf" if v.ub is None else _num(v.ub)
            lines.append(f" {_num(v.lb)} <= {v.name} <= {ub}")
    binaries = [v.name for v in model.variables.values() if v.binary]
    if binaries:
        lines.append("Binary")
        lines += [" " + " ".join(binaries[i:i + 8]) for i in range(0, len(binaries), 8)]
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_milp(inst: CrossLayerInstance, which: str, weights: WeightModel | str = "uniform") -> str:
    return to_lp(build_model(inst, which, weights), title=f"{inst.name or 'instance'} {which}")


# ---------------------------------------------------------------------------
# Solution checking


@dataclass(frozen=True)
class CheckReport:
    feasible: bool
    objective: float
    violations: tuple[str, ...]


def check_solution(model: MilpModel, values: Mapping[str, float], tol: float = 1e-6) -> CheckReport:
    """Verify a variable assignment against every bound and constraint.

    Missing variables count as zero; unknown names are reported.
    """
    bad = [f"unknown variable {n}" for n in values if n not in model.variables]
    val = {n: float(values.get(n, 0.0)) for n in model.variables}
    for v in model.variables.values():
        x = val[v.name]
        if v.binary and min(abs(x), abs(x - 1)) > tol:
            bad.append(f"{v.name}={x} is not binary")
        if x < v.lb - tol or (v.ub is not None and x > v.ub + tol):
            bad.append(f"{v.name}={x} outside bounds")
    for con in model.constraints:
        lhs = sum(c * val[n] for c, n in con.terms)
        ok = {"<=": lhs <= con.rhs + tol, ">=": lhs >= con.rhs - tol,
              "=": abs(lhs - con.rhs) <= tol}[con.sense]
        if not ok:
            bad.append(f"{con.name}: {lhs} {con.sense} {con.rhs} violated")
    objective = sum(c * val[n] for c, n in model.objective)
    return CheckReport(not bad, objective, tuple(bad))


def parse_solution(text: str) -> dict[str, float]:
    """Read ``name value`` pairs, one per line; ``#`` starts a comment."""
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, value = line.replace("=", " ").split()[:2]
        out[name] = float(value)
    return out


def _route_values(inst, routes: Mapping[Link, tuple]) -> dict[str, float]:
    out = {}
    for u, path in routes.items():
        for a, b in zip(path, path[1:]):
            out[_yname(u, a, b)] = 1.0
    return out


def _tree_flow(root: int, branches: Iterable[Link], scale: float) -> dict[tuple[int, int], float]:
    """Flow on tree arcs sending ``scale`` units from the root to every other node."""
    adj: dict[int, list[int]] = {}
    for a, b in branches:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    parent = {root: None}
    order = [root]
    for v in order:
        for w in sorted(adj.get(v, [])):
            if w not in parent:
                parent[w] = v
                order.append(w)
    size = {v: 1 for v in order}
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    return {(parent[v], v): size[v] * scale for v in order[1:]}


def maxtree_solution(inst: CrossLayerInstance, tree: ProtectingTree) -> dict[str, float]:
    """Variable assignment of the maxtree model encoding a routed spanning tree."""
    values = _route_values(inst, tree.routes)
    for u in tree.branches:
        values[f"z_{u[0]}_{u[1]}"] = 1.0
    for u in tree.branches:
        for i, j in path_links(tree.routes[u]):
            values[f"x_{i}_{j}"] = 1.0
    for (s, t), f in _tree_flow(inst.logical.root, tree.branches, 1.0).items():
        values[f"q_{s}_{t}"] = f
    return values


def baseset_solution(
    inst: CrossLayerInstance, m: LinkMapping, base: BaseTreeSet | None = None
) -> dict[str, float]:
    """Variable assignment of the baseset model built from a mapping and its witness trees."""
    base = base or extract_base_tree_set(inst, m)
    values = _route_values(inst, m.routes)
    n1 = len(inst.logical.nodes) - 1
    for i, j in inst.physical.sorted_links:
        if (i, j) in base.unprotected:
            values[f"g_{i}_{j}"] = 1.0
            continue
        if n1 == 0:
            continue
        tree = base.trees[base.protected_by[(i, j)]]
        for (s, t), f in _tree_flow(inst.logical.root, tree.branches, 1.0 / n1).items():
            values[f"w_{i}_{j}_{s}_{t}"] = f
    return values
