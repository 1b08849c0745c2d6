"""Cross-layer instances: physical and logical graphs, mappings, instance files.

Links are undirected and stored as ``(a, b)`` tuples with ``a < b``. A route
for logical link ``(s, t)`` is the physical node sequence running from the
physical image of ``s`` to that of ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import networkx as nx

Link = tuple[int, int]
Path = tuple[int, ...]


class InstanceError(ValueError):
    """Raised for malformed instance files or inconsistent instances."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleError(RuntimeError):
    """No physical route exists for some logical link."""


def canon(a: int, b: int) -> Link:
    """Canonical (sorted) form of an undirected link."""
    return (a, b) if a < b else (b, a)


def path_links(path: Sequence[int]) -> frozenset[Link]:
    return frozenset(canon(a, b) for a, b in zip(path, path[1:]))


@dataclass(frozen=True)
class PhysicalNetwork:
    nodes: frozenset[int]
    links: frozenset[Link]
    failure_prob: Mapping[Link, float]

    def __post_init__(self):
        for a, b in self.links:
            if a == b:
                raise InstanceError(f"self-loop on physical node {a}")
            if a > b:
                raise InstanceError(f"link ({a},{b}) not in canonical order")
            if a not in self.nodes or b not in self.nodes:
                raise InstanceError(f"physical link ({a},{b}) uses an undeclared node")
        if set(self.failure_prob) != set(self.links):
            raise InstanceError("failure probabilities must cover exactly the physical links")
        for e, rho in self.failure_prob.items():
            if not (0.0 <= rho < 1.0) or math.isnan(rho):
                raise InstanceError(f"failure probability {rho} of link {e} outside [0, 1)")

    @cached_property
    def sorted_links(self) -> tuple[Link, ...]:
        return tuple(sorted(self.links))

    @cached_property
    def link_index(self) -> dict[Link, int]:
        return {e: i for i, e in enumerate(self.sorted_links)}

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(sorted(self.nodes))
        g.add_edges_from(self.sorted_links)
        return g

    def has_link(self, a: int, b: int) -> bool:
        return canon(a, b) in self.links


@dataclass(frozen=True)
class LogicalNetwork:
    nodes: frozenset[int]
    links: frozenset[Link]

    def __post_init__(self):
        for a, b in self.links:
            if a == b:
                raise InstanceError(f"self-loop on logical node {a}")
            if a > b:
                raise InstanceError(f"link ({a},{b}) not in canonical order")
            if a not in self.nodes or b not in self.nodes:
                raise InstanceError(f"logical link ({a},{b}) uses an undeclared node")
        if not self.nodes:
            raise InstanceError("logical network has no nodes")
        if not is_connected(self.nodes, self.links):
            raise InstanceError("logical network is not connected")

    @cached_property
    def sorted_links(self) -> tuple[Link, ...]:
        return tuple(sorted(self.links))

    @cached_property
    def sorted_nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.nodes))

    @property
    def root(self) -> int:
        return self.sorted_nodes[0]


@dataclass(frozen=True)
class NodeMapping:
    assign: Mapping[int, int]

    def __getitem__(self, s: int) -> int:
        return self.assign[s]


@dataclass(frozen=True)
class CrossLayerInstance:
    physical: PhysicalNetwork
    logical: LogicalNetwork
    node_map: NodeMapping
    name: str = ""

    def __post_init__(self):
        assign = self.node_map.assign
        if set(assign) != set(self.logical.nodes):
            missing = sorted(set(self.logical.nodes) - set(assign))
            raise InstanceError(f"node map is not total over logical nodes, missing {missing}")
        images = list(assign.values())
        if len(set(images)) != len(images):
            raise InstanceError("node map is not injective")
        for s, i in assign.items():
            if i not in self.physical.nodes:
                raise InstanceError(f"logical node {s} mapped to unknown physical node {i}")

    def endpoints(self, u: Link) -> tuple[int, int]:
        """Physical images of a logical link's endpoints, in link order."""
        return self.node_map[u[0]], self.node_map[u[1]]

    def rho(self, e: Link) -> float:
        return self.physical.failure_prob[canon(*e)]

    def with_failure_probs(self, probs: Mapping[Link, float] | float) -> CrossLayerInstance:
        """Copy of the instance with replaced failure probabilities.

        A scalar assigns the same probability to every physical link.
        """
        if isinstance(probs, (int, float)):
            probs = {e: float(probs) for e in self.physical.links}
        phys = PhysicalNetwork(self.physical.nodes, self.physical.links, dict(probs))
        return CrossLayerInstance(phys, self.logical, self.node_map, self.name)


@dataclass(frozen=True)
class LinkMapping:
    """One physical route per logical link, keyed by canonical logical link."""

    routes: Mapping[Link, Path]

    def links_of(self, u: Link) -> frozenset[Link]:
        return path_links(self.routes[u])

    def __contains__(self, u: Link) -> bool:
        return u in self.routes


def orient_route(inst: CrossLayerInstance, u: Link, path: Sequence[int]) -> tuple[Link, Path]:
    """Canonicalize ``(u, path)`` so that the path starts at the image of ``min(u)``.

    A path written from either end is accepted.
    """
    key = canon(*u)
    path = tuple(path)
    if key in inst.logical.links and path:
        src, dst = inst.endpoints(key)
        if path[0] == dst and path[-1] == src:
            path = path[::-1]
    elif key != tuple(u):
        path = path[::-1]
    return key, path


def check_route(inst: CrossLayerInstance, u: Link, path: Path) -> None:
    if u not in inst.logical.links:
        raise InstanceError(f"route given for unknown logical link {u}")
    src, dst = inst.endpoints(u)
    if not path or path[0] != src or path[-1] != dst:
        raise InstanceError(f"route {path} for {u} must run from {src} to {dst}")
    if len(set(path)) != len(path):
        raise InstanceError(f"route {path} for {u} repeats a node")
    for a, b in zip(path, path[1:]):
        if not inst.physical.has_link(a, b):
            raise InstanceError(f"route {path} for {u} uses missing physical link ({a},{b})")


def validate_mapping(inst: CrossLayerInstance, m: LinkMapping, total: bool = True) -> None:
    for u, path in m.routes.items():
        check_route(inst, u, path)
    if total:
        missing = sorted(set(inst.logical.links) - set(m.routes))
        if missing:
            raise InstanceError(f"mapping has no route for logical links {missing}")


def make_mapping(inst: CrossLayerInstance, routes: Mapping[Link, Sequence[int]]) -> LinkMapping:
    """Build a validated, total mapping; link keys may be in either orientation."""
    canonical = dict(orient_route(inst, u, p) for u, p in routes.items())
    m = LinkMapping(canonical)
    validate_mapping(inst, m)
    return m


# ---------------------------------------------------------------------------
# Connectivity

def is_connected(nodes: Iterable[int], links: Iterable[Link]) -> bool:
    nodes = list(nodes)
    if len(nodes) <= 1:
        return True
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    groups = len(nodes)
    for a, b in links:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            groups -= 1
    return groups == 1


def removal_oracle(logical: LogicalNetwork) -> Callable[[int], bool]:
    """Cached predicate: does removing the masked logical links disconnect G_L?

    Bit ``k`` of the mask refers to ``logical.sorted_links[k]``.
    """
    links = logical.sorted_links
    nodes = logical.sorted_nodes

    @lru_cache(maxsize=1 << 16)
    def disconnects(mask: int) -> bool:
        alive = [e for k, e in enumerate(links) if not (mask >> k) & 1]
        return not is_connected(nodes, alive)

    return disconnects


def surviving_logical_subgraph(
    inst: CrossLayerInstance, m: LinkMapping, failed: Iterable[Link]
) -> tuple[frozenset[Link], bool]:
    """Logical links whose routes avoid every failed link, and whether they connect G_L."""
    failed = {canon(*e) for e in failed}
    alive = frozenset(u for u in inst.logical.links if not (m.links_of(u) & failed))
    return alive, is_connected(inst.logical.nodes, alive)


# ---------------------------------------------------------------------------
# Candidate paths

@dataclass(frozen=True)
class AllPaths:
    """Every simple path with at most ``max_hops`` physical links."""

    max_hops: int


@dataclass(frozen=True)
class KShortest:
    """The first ``k`` simple paths in (hop count, node sequence) order."""

    k: int


PathPolicy = AllPaths | KShortest


@dataclass(frozen=True)
class PathSet:
    link: Link
    paths: tuple[Path, ...]
    policy: PathPolicy

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)


def default_policy(inst: CrossLayerInstance) -> PathPolicy:
    if len(inst.physical.links) <= 25:
        return AllPaths(max(len(inst.physical.nodes) - 1, 1))
    return KShortest(16)


def _path_key(p: Path):
    return (len(p), p)


def enumerate_paths(inst: CrossLayerInstance, u: Link, policy: PathPolicy | None = None) -> PathSet:
    """Candidate routes for logical link ``u``, ordered by hop count then node sequence."""
    u = canon(*u)
    if u not in inst.logical.links:
        raise InstanceError(f"{u} is not a logical link")
    policy = policy or default_policy(inst)
    src, dst = inst.endpoints(u)
    g = inst.physical.graph
    if isinstance(policy, AllPaths):
        if policy.max_hops < 1:
            raise ValueError("max_hops must be at least 1")
        paths = sorted((tuple(p) for p in nx.all_simple_paths(g, src, dst, cutoff=policy.max_hops)),
                       key=_path_key)
    elif isinstance(policy, KShortest):
        if policy.k < 1:
            raise ValueError("k must be at least 1")
        paths = []
        try:
            gen = nx.shortest_simple_paths(g, src, dst)
            for p in gen:
                # ties at the k-th length are collected so the cut is order independent
                if len(paths) >= policy.k and len(p) > len(paths[policy.k - 1]):
                    break
                paths.append(tuple(p))
        except nx.NetworkXNoPath:
            paths = []
        paths = sorted(paths, key=_path_key)[: policy.k]
    else:
        raise TypeError(f"unknown path policy {policy!r}")
    if not paths:
        raise InfeasibleError(f"no physical path for logical link {u} ({src} -> {dst})")
    return PathSet(u, tuple(paths), policy)


# ---------------------------------------------------------------------------
# Instance files

_SECTIONS = ("physical", "logical", "node_map", "routes")


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InstanceError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def parse_instance(text: str, name: str = "") -> tuple[CrossLayerInstance, LinkMapping | None]:
    """Parse instance-file text.

    Returns the instance and, when a ``[routes]`` section is present, the
    total link mapping it describes.
    """
    section = None
    seen = set()
    p_nodes: set[int] = set()
    p_links: dict[Link, float] = {}
    l_nodes: set[int] = set()
    l_links: set[Link] = set()
    nmap: dict[int, int] = {}
    raw_routes: list[tuple[int, Link, Path]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in _SECTIONS:
                raise InstanceError(f"unknown section {line!r}", lineno)
            section = line[1:-1].strip()
            if section in seen:
                raise InstanceError(f"section [{section}] repeated", lineno)
            seen.add(section)
            continue
        tok = line.split()
        if section is None:
            raise InstanceError("content before the first section header", lineno)
        if section in ("physical", "logical"):
            kind = tok[0]
            if kind == "node" and len(tok) == 2:
                (v,) = _ints(tok[1:], lineno)
                if v <= 0:
                    raise InstanceError("node identifiers must be positive", lineno)
                (p_nodes if section == "physical" else l_nodes).add(v)
            elif kind == "link" and section == "physical" and len(tok) == 4:
                a, b = _ints(tok[1:3], lineno)
                try:
                    rho = float(tok[3])
                except ValueError:
                    raise InstanceError(f"bad failure probability {tok[3]!r}", lineno) from None
                if a == b:
                    raise InstanceError(f"self-loop on physical node {a}", lineno)
                if min(a, b) <= 0:
                    raise InstanceError("node identifiers must be positive", lineno)
                if not (0.0 <= rho < 1.0):
                    raise InstanceError(f"failure probability {tok[3]} outside [0, 1)", lineno)
                e = canon(a, b)
                if e in p_links:
                    raise InstanceError(f"duplicate physical link {e}", lineno)
                p_links[e] = rho
                p_nodes.update(e)
            elif kind == "link" and section == "logical" and len(tok) == 3:
                s, t = _ints(tok[1:], lineno)
                if s == t:
                    raise InstanceError(f"self-loop on logical node {s}", lineno)
                if min(s, t) <= 0:
                    raise InstanceError("node identifiers must be positive", lineno)
                u = canon(s, t)
                if u in l_links:
                    raise InstanceError(f"duplicate logical link {u}", lineno)
                l_links.add(u)
                l_nodes.update(u)
            else:
                raise InstanceError(f"cannot parse {line!r} in [{section}]", lineno)
        elif section == "node_map":
            if len(tok) != 2:
                raise InstanceError("expected '<logical-id> <physical-id>'", lineno)
            s, i = _ints(tok, lineno)
            if s in nmap:
                raise InstanceError(f"logical node {s} mapped twice", lineno)
            if i in nmap.values():
                raise InstanceError(f"node map is not injective: physical node {i} reused", lineno)
            nmap[s] = i
        else:
            if ":" not in line:
                raise InstanceError("expected '<s> <t> : <n1> ... <nk>'", lineno)
            head, _, body = line.partition(":")
            ends = _ints(head.split(), lineno)
            if len(ends) != 2:
                raise InstanceError("route header must name two logical nodes", lineno)
            raw_routes.append((lineno, (ends[0], ends[1]), tuple(_ints(body.split(), lineno))))

    for required in ("physical", "logical", "node_map"):
        if required not in seen:
            raise InstanceError(f"missing section [{required}]")
    for s, i in nmap.items():
        if s not in l_nodes:
            raise InstanceError(f"node map names unknown logical node {s}")
        if i not in p_nodes:
            raise InstanceError(f"node map names unknown physical node {i}")

    inst = CrossLayerInstance(
        PhysicalNetwork(frozenset(p_nodes), frozenset(p_links), p_links),
        LogicalNetwork(frozenset(l_nodes), frozenset(l_links)),
        NodeMapping(dict(nmap)),
        name,
    )
    if "routes" not in seen:
        return inst, None
    routes: dict[Link, Path] = {}
    for lineno, u, path in raw_routes:
        key, path = orient_route(inst, u, path)
        if key in routes:
            raise InstanceError(f"duplicate route for logical link {key}", lineno)
        try:
            check_route(inst, key, path)
        except InstanceError as exc:
            raise InstanceError(str(exc), lineno) from None
        routes[key] = path
    m = LinkMapping(routes)
    validate_mapping(inst, m)
    return inst, m


def load_instance(path) -> tuple[CrossLayerInstance, LinkMapping | None]:
    from pathlib import Path as _P

    p = _P(path)
    return parse_instance(p.read_text(encoding="utf-8"), name=p.stem)


def format_routes(routes: Mapping[Link, Path]) -> list[str]:
    return [f"{s} {t} : {' '.join(map(str, routes[(s, t)]))}" for s, t in sorted(routes)]


def serialize_instance(inst: CrossLayerInstance, m: LinkMapping | None = None) -> str:
    out = []
    if inst.name:
        out.append(f"# {inst.name}")
    out.append("[physical]")
    linked = {v for e in inst.physical.links for v in e}
    out += [f"node {v}" for v in sorted(inst.physical.nodes - linked)]
    out += [f"link {a} {b} {inst.rho((a, b))!r}" for a, b in inst.physical.sorted_links]
    out.append("[logical]")
    linked = {v for e in inst.logical.links for v in e}
    out += [f"node {v}" for v in sorted(inst.logical.nodes - linked)]
    out += [f"link {s} {t}" for s, t in inst.logical.sorted_links]
    out.append("[node_map]")
    out += [f"{s} {inst.node_map[s]}" for s in inst.logical.sorted_nodes]
    if m is not None:
        out.append("[routes]")
        out += format_routes(m.routes)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Bundled instances

def bundled_path(name: str):
    from importlib.resources import files

    if not name.endswith(".xln"):
        name += ".xln"
    return files("xsurv") / "data" / name


def load_bundled(name: str) -> tuple[CrossLayerInstance, LinkMapping | None]:
    res = bundled_path(name)
    return parse_instance(res.read_text(encoding="utf-8"), name=name.removesuffix(".xln"))


BUNDLED = ("fig1", "nsf-ln1", "nsf-ln2")
