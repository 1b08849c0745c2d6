"""Ground-truth reliability of a mapping under independent link failures.

Random numbers come from numpy's PCG64 bit generator; an (algorithm, seed,
samples) triple fixes the Monte Carlo output exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .model import CrossLayerInstance, Link, LinkMapping, validate_mapping

EXACT_LINK_CAP = 22
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ReliabilityReport:
    method: str
    value: float
    stderr: float
    samples: int
    seed: int | None = None


def single_failure_scan(inst: CrossLayerInstance, m: LinkMapping) -> dict[Link, bool]:
    """For every physical link, whether G_L stays connected when it alone fails."""
    validate_mapping(inst, m)
    out = {}
    for e in inst.physical.sorted_links:
        g = nx.Graph()
        g.add_nodes_from(inst.logical.nodes)
        g.add_edges_from(u for u in inst.logical.links if e not in m.links_of(u))
        out[e] = nx.is_connected(g)
    return out


class _Encoding:
    """Route bitmasks over a subset of physical links plus a cached connectivity table."""

    def __init__(self, inst: CrossLayerInstance, m: LinkMapping, links):
        validate_mapping(inst, m)
        self.links = list(links)
        pos = {e: i for i, e in enumerate(self.links)}
        self.llinks = inst.logical.sorted_links
        self.route_masks = np.array(
            [sum(1 << pos[e] for e in m.links_of(u) if e in pos) for u in self.llinks],
            dtype=np.uint64,
        )
        self.nodes = inst.logical.sorted_nodes
        self._table: dict[int, bool] = {}

    def _connected(self, alive_mask: int) -> bool:
        if alive_mask not in self._table:
            g = nx.Graph()
            g.add_nodes_from(self.nodes)
            g.add_edges_from(u for k, u in enumerate(self.llinks) if (alive_mask >> k) & 1)
            self._table[alive_mask] = nx.is_connected(g)
        return self._table[alive_mask]

    def connected(self, failed: np.ndarray) -> np.ndarray:
        """Vectorized connectivity for an array of failure bitmasks."""
        alive = np.zeros(failed.shape, dtype=np.int64)
        for k, mask in enumerate(self.route_masks):
            alive |= ((failed & mask) == 0).astype(np.int64) << k
        uniq, inv = np.unique(alive, return_inverse=True)
        flags = np.array([self._connected(int(a)) for a in uniq], dtype=bool)
        return flags[inv]


def exact_reliability(inst: CrossLayerInstance, m: LinkMapping) -> ReliabilityReport:
    """Probability that G_L stays connected, summed over every failure pattern.

    Links carried by no route cannot affect connectivity and are marginalized
    out; the enumeration cap applies to the remaining ones.
    """
    used = sorted({e for u in inst.logical.links for e in m.links_of(u)})
    if len(used) > EXACT_LINK_CAP:
        raise ValueError(
            f"{len(used)} route links exceed the exact enumeration cap of {EXACT_LINK_CAP}; "
            "use mc_reliability instead"
        )
    enc = _Encoding(inst, m, used)
    rho = np.array([inst.rho(e) for e in used])
    bits = np.arange(len(used), dtype=np.uint64)
    total = 0.0
    n_patterns = 1 << len(used)
    for start in range(0, n_patterns, _CHUNK):
        pats = np.arange(start, min(start + _CHUNK, n_patterns), dtype=np.uint64)
        down = ((pats[:, None] >> bits) & np.uint64(1)).astype(bool)
        prob = np.prod(np.where(down, rho, 1.0 - rho), axis=1)
        total += float(np.sum(prob[enc.connected(pats)]))
    return ReliabilityReport("exact", min(max(total, 0.0), 1.0), 0.0, n_patterns)


def mc_reliability(
    inst: CrossLayerInstance, m: LinkMapping, samples: int, seed: int = 0
) -> ReliabilityReport:
    """Monte Carlo estimate of the same probability with its standard error."""
    if samples < 1:
        raise ValueError("samples must be positive")
    links = inst.physical.sorted_links
    if len(links) > 64:
        raise ValueError("Monte Carlo sampler supports at most 64 physical links")
    enc = _Encoding(inst, m, links)
    rho = np.array([inst.rho(e) for e in links])
    weights = np.uint64(1) << np.arange(len(links), dtype=np.uint64)
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    done = 0
    while done < samples:
        n = min(_CHUNK, samples - done)
        down = rng.random((n, len(links))) < rho
        pats = (down.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
        hits += int(np.count_nonzero(enc.connected(pats)))
        done += n
    p = hits / samples
    return ReliabilityReport("monte-carlo", p, float(np.sqrt(p * (1.0 - p) / samples)), samples, seed)
