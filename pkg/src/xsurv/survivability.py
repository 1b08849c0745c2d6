"""Survivable probabilities of routed trees, tree sets and full mappings.

The survivable probability of a set of physical links is the chance that
none of them fails. For a routed spanning tree that set is its support; for
a tree set it is the support shared by every tree; for a mapping it is the
set of critical links, those whose single failure disconnects the logical
network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import (
    CrossLayerInstance,
    InstanceError,
    Link,
    LinkMapping,
    Path,
    canon,
    check_route,
    format_routes,
    is_connected,
    orient_route,
    path_links,
    surviving_logical_subgraph,
)

_LOG_DOMAIN_THRESHOLD = 64


@dataclass(frozen=True)
class ProtectingTree:
    """A logical spanning tree together with the physical routes of its branches."""

    branches: frozenset[Link]
    routes: Mapping[Link, Path]

    def links_of(self, u: Link) -> frozenset[Link]:
        return path_links(self.routes[u])

    def key(self):
        return tuple(sorted((u, self.routes[u]) for u in self.branches))


def make_tree(inst: CrossLayerInstance, routes: Mapping[Link, Sequence[int]]) -> ProtectingTree:
    """Validated tree from ``{logical link: route}``; keys may use either orientation."""
    canonical = dict(orient_route(inst, u, p) for u, p in routes.items())
    tree = ProtectingTree(frozenset(canonical), canonical)
    validate_tree(inst, tree)
    return tree


def validate_tree(inst: CrossLayerInstance, tree: ProtectingTree) -> None:
    nodes = inst.logical.nodes
    if len(tree.branches) != len(nodes) - 1 or not is_connected(nodes, tree.branches):
        raise InstanceError("branches do not form a spanning tree of the logical network")
    if set(tree.routes) != set(tree.branches):
        raise InstanceError("every branch needs exactly one route")
    for u in tree.branches:
        check_route(inst, u, tree.routes[u])


def survival_product(inst: CrossLayerInstance, links: Iterable[Link]) -> float:
    """Probability that none of ``links`` fails (each link counted once)."""
    links = sorted(set(links))
    if len(links) > _LOG_DOMAIN_THRESHOLD:
        return math.exp(math.fsum(math.log1p(-inst.rho(e)) for e in links))
    p = 1.0
    for e in links:
        p *= 1.0 - inst.rho(e)
    return p


def tree_links(tree: ProtectingTree) -> frozenset[Link]:
    out: set[Link] = set()
    for u in tree.branches:
        out |= tree.links_of(u)
    return frozenset(out)


def tree_probability(inst: CrossLayerInstance, tree: ProtectingTree) -> float:
    return survival_product(inst, tree_links(tree))


def treeset_common_links(trees: Sequence[ProtectingTree]) -> frozenset[Link]:
    if not trees:
        raise ValueError("tree set is empty")
    common = set(tree_links(trees[0]))
    for t in trees[1:]:
        common &= tree_links(t)
    return frozenset(common)


def treeset_probability(inst: CrossLayerInstance, trees: Sequence[ProtectingTree]) -> float:
    return survival_product(inst, treeset_common_links(trees))


def critical_links(inst: CrossLayerInstance, m: LinkMapping) -> frozenset[Link]:
    """Physical links whose failure alone disconnects the logical network under ``m``.

    Only links carried by some route can be critical.
    """
    used = set()
    for u in inst.logical.links:
        used |= m.links_of(u)
    return frozenset(e for e in used if not surviving_logical_subgraph(inst, m, [e])[1])


def mapping_probability(inst: CrossLayerInstance, m: LinkMapping) -> float:
    return survival_product(inst, critical_links(inst, m))


@dataclass(frozen=True)
class BaseTreeSet:
    trees: tuple[ProtectingTree, ...]
    protected_by: Mapping[Link, int]
    unprotected: frozenset[Link]

    def protects(self, i: int) -> list[Link]:
        return sorted(e for e, k in self.protected_by.items() if k == i)


def spanning_tree(nodes: Sequence[int], links: Iterable[Link]) -> list[Link]:
    """BFS tree from the lowest node, visiting neighbours in increasing order."""
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in links:
        adj[a].append(b)
        adj[b].append(a)
    root = min(nodes)
    seen = {root}
    queue = [root]
    branches = []
    for v in queue:
        for w in sorted(adj[v]):
            if w not in seen:
                seen.add(w)
                queue.append(w)
                branches.append(canon(v, w))
    if len(seen) != len(adj):
        raise ValueError("links do not span the node set")
    return branches


def extract_base_tree_set(inst: CrossLayerInstance, m: LinkMapping) -> BaseTreeSet:
    """Witness trees: for each non-critical physical link, one tree that avoids it."""
    nodes = inst.logical.sorted_nodes
    trees: list[ProtectingTree] = []
    index: dict[tuple, int] = {}
    protected_by: dict[Link, int] = {}
    unprotected = set()
    for e in inst.physical.sorted_links:
        alive, connected = surviving_logical_subgraph(inst, m, [e])
        if not connected:
            unprotected.add(e)
            continue
        branches = spanning_tree(nodes, alive)
        tree = ProtectingTree(frozenset(branches), {u: m.routes[u] for u in branches})
        key = tree.key()
        if key not in index:
            index[key] = len(trees)
            trees.append(tree)
        protected_by[e] = index[key]
    if not trees:
        # every physical link is critical; any spanning tree of G_L is a valid witness set
        branches = spanning_tree(nodes, inst.logical.links)
        trees.append(ProtectingTree(frozenset(branches), {u: m.routes[u] for u in branches}))
    return BaseTreeSet(tuple(trees), protected_by, frozenset(unprotected))


def _fmt_links(links: Iterable[Link]) -> str:
    return " ".join(f"({a},{b})" for a, b in links)


def format_base_set(base: BaseTreeSet) -> str:
    """Text form: one routes block per tree plus the links it protects."""
    lines = [f"unprotected: {_fmt_links(sorted(base.unprotected))}".rstrip()]
    for i, tree in enumerate(base.trees):
        lines.append(f"[tree {i}]")
        lines.append(f"protects: {_fmt_links(base.protects(i))}".rstrip())
        lines += format_routes(tree.routes)
    return "\n".join(lines) + "\n"
