"""Shared builders for tests: quick records, random marker tables, oracles."""

from __future__ import annotations

import numpy as np

from pavesage.data import SectionRecord


def make_section(
    section_id: str,
    route_id: str = "FM0001",
    begin: str = "0",
    end: str = "1",
    **overrides,
) -> SectionRecord:
    fields = dict(
        section_id=section_id,
        route_id=route_id,
        begin_marker=begin,
        end_marker=end,
        condition={},
        traffic=100.0,
        time_since_treatment=3.0,
        treatments=frozenset(),
        climate_zone="central",
        pavement_type=5,
        functional_class="FM",
    )
    fields.update(overrides)
    return SectionRecord(**fields)


def chain_sections(n: int, route_id: str = "FM0001") -> list[SectionRecord]:
    """n sections sharing consecutive markers: a path graph."""
    return [
        make_section(f"{route_id}-{i}", route_id, begin=str(i), end=str(i + 1))
        for i in range(n)
    ]


def random_marker_sections(
    n: int, rng: np.random.Generator, n_routes: int = 3, n_markers: int = 12
) -> list[SectionRecord]:
    """Random marker table; repeated tokens produce branching and cycles."""
    sections = []
    for i in range(n):
        route = f"R{rng.integers(n_routes)}"
        begin = str(rng.integers(n_markers))
        end = str(rng.integers(n_markers))
        sections.append(make_section(f"S{i}", route, begin=begin, end=end))
    return sections


def brute_force_edges(sections) -> set[tuple[int, int]]:
    """O(N^2) marker-comparison oracle for the graph construction rule."""
    edges = set()
    for i, a in enumerate(sections):
        for j, b in enumerate(sections):
            if i == j:
                continue
            if (a.route_id, a.end_marker) == (b.route_id, b.begin_marker):
                edges.add((min(i, j), max(i, j)))
    return edges
