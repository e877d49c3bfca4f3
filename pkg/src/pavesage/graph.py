"""Road-network graph built from reference-marker coincidence.

Sections become nodes 0..N-1 in input order. Two sections are adjacent when
one's end marker equals the other's begin marker on the same route, compared
as exact string tokens (markers are identifiers, never floats). The adjacency
is stored compressed (offsets + flat neighbor array), undirected, deduplicated,
self-loop free, with each node's neighbor list sorted ascending.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .exceptions import ConfigError, DataError

if TYPE_CHECKING:  # pragma: no cover
    from .data import SectionRecord


@dataclass(frozen=True)
class RoadGraph:
    """Immutable compressed adjacency; safe for concurrent reads."""

    n_nodes: int
    offsets: np.ndarray
    neighbor_ids: np.ndarray

    def __post_init__(self):
        self.offsets.setflags(write=False)
        self.neighbor_ids.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return self.neighbor_ids.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return self.offsets[1:] - self.offsets[:-1]

    def edge_set(self) -> set[tuple[int, int]]:
        """All undirected edges as (min, max) pairs."""
        out = set()
        for v in range(self.n_nodes):
            for u in self.neighbor_ids[self.offsets[v] : self.offsets[v + 1]]:
                out.add((min(v, int(u)), max(v, int(u))))
        return out


@dataclass(frozen=True)
class SampledNeighborhood:
    """Per-hop sampled adjacency: layers[k] is a tuple of (center, neighbor ids)."""

    fanouts: tuple[int | None, ...]
    layers: tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]


def build_graph(sections: Sequence["SectionRecord"]) -> RoadGraph:
    """Builds the undirected section graph from begin/end reference markers."""
    if not sections:
        raise DataError("build_graph: section list is empty")
    seen_ids: dict[str, int] = {}
    for i, s in enumerate(sections):
        if not s.begin_marker or not s.end_marker:
            raise DataError(f"section {s.section_id!r} lacks a begin or end marker")
        if s.section_id in seen_ids:
            raise DataError(
                f"duplicate section id {s.section_id!r} at rows "
                f"{seen_ids[s.section_id]} and {i}"
            )
        seen_ids[s.section_id] = i

    by_begin: dict[tuple[str, str], list[int]] = {}
    for i, s in enumerate(sections):
        by_begin.setdefault((s.route_id, s.begin_marker), []).append(i)

    adjacency: list[set[int]] = [set() for _ in sections]
    for i, s in enumerate(sections):
        for j in by_begin.get((s.route_id, s.end_marker), ()):
            if j == i:
                continue  # a section looping onto itself is not an edge
            adjacency[i].add(j)
            adjacency[j].add(i)

    degrees = np.array([len(a) for a in adjacency], dtype=np.int64)
    offsets = np.zeros(len(sections) + 1, dtype=np.int64)
    np.cumsum(degrees, out=offsets[1:])
    neighbor_ids = np.fromiter(
        (u for a in adjacency for u in sorted(a)), dtype=np.int64, count=int(degrees.sum())
    )
    return RoadGraph(len(sections), offsets, neighbor_ids)


def neighbors(graph: RoadGraph, v: int) -> np.ndarray:
    """Sorted neighbor ids of node v."""
    if not 0 <= v < graph.n_nodes:
        raise IndexError(f"node {v} out of range 0..{graph.n_nodes - 1}")
    return graph.neighbor_ids[graph.offsets[v] : graph.offsets[v + 1]]


def sample_neighborhood(
    graph: RoadGraph,
    seeds: Sequence[int],
    fanouts: Sequence[int | None],
    rng_seed: int,
) -> SampledNeighborhood:
    """Multi-hop uniform neighbor sampling without replacement.

    Hop 1 samples neighbors of the seeds with fanouts[0]; each later hop k
    samples neighbors of every node reached so far (seeds plus all earlier
    samples, sorted) with fanouts[k-1]. A fanout of None, or any fanout at
    least the node's degree, returns the full neighbor list. The result is a
    pure function of (graph, seeds, fanouts, rng_seed).
    """
    if len(fanouts) == 0:
        raise ConfigError("sample_neighborhood: fanouts must be non-empty")
    if len(seeds) == 0:
        raise ConfigError("sample_neighborhood: seeds must be non-empty")
    for f in fanouts:
        if f is not None and f < 0:
            raise ConfigError(f"fanout must be None or >= 0, got {f}")

    rng = np.random.default_rng(rng_seed)
    frontier: list[int] = [int(v) for v in seeds]
    layers = []
    for fanout in fanouts:
        hop = []
        reached: set[int] = set(frontier)
        for center in frontier:
            nbrs = neighbors(graph, center)
            if fanout is None or fanout >= nbrs.size:
                sample = nbrs
            else:
                sample = rng.choice(nbrs, size=fanout, replace=False)
            hop.append((center, tuple(int(u) for u in sample)))
            reached.update(int(u) for u in sample)
        layers.append(tuple(hop))
        frontier = sorted(reached)
    return SampledNeighborhood(
        fanouts=tuple(fanouts), layers=tuple(layers)
    )


def bfs_distances(graph: RoadGraph, source: int) -> np.ndarray:
    """Hop distances from source; unreachable nodes get -1."""
    dist = np.full(graph.n_nodes, -1, dtype=np.int64)
    dist[source] = 0
    queue = [source]
    while queue:
        nxt = []
        for v in queue:
            for u in neighbors(graph, v):
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(int(u))
        queue = nxt
    return dist
