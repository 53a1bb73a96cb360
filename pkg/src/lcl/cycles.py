"""Cycle sets over a graph: fundamental, facial (hierarchical), local greedy."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .trees import SpanningTree, tree_path
from .work import cost_vector


class Cycle:
    """An oriented closed walk stored as (edge id, sign) arrays.

    Signs are +1 when the walk follows an edge's stored orientation.
    Projection-ready quantities (signed resistances, total resistance,
    per-metric costs) are precomputed so solver inner loops stay cheap.
    """

    __slots__ = ("edge_ids", "signs", "length", "resistance", "kind",
                 "level", "color", "sr", "scaled_signs", "costs", "cost_tuple",
                 "_idset")

    def __init__(self, g: Graph, traversal: list[tuple[int, int]],
                 kind: str, level: int = 0, color: int = 0):
        if len(traversal) < 3:
            raise ValueError(f"cycle of length {len(traversal)} is degenerate")
        self.edge_ids = np.array([e for e, _ in traversal], dtype=np.int64)
        self.signs = np.array([s for _, s in traversal], dtype=np.float64)
        self.length = len(traversal)
        self.kind = kind
        self.level = level
        self.color = color
        r = g.r[self.edge_ids]
        self.sr = self.signs * r
        self.resistance = float(np.sum(r))
        # signs / R, so one projection is f[ids] -= scaled_signs * delta
        self.scaled_signs = self.signs / self.resistance
        self.costs = cost_vector(self.length, kind, g.n)
        self.cost_tuple = tuple(int(c) for c in self.costs)
        self._idset: frozenset[int] | None = None

    def edge_id_set(self) -> frozenset[int]:
        if self._idset is None:
            self._idset = frozenset(int(e) for e in self.edge_ids)
        return self._idset


def cycle_closure_defect(g: Graph, c: Cycle) -> np.ndarray:
    """Per-vertex signed incidence of the walk; all zeros for a closed cycle."""
    acc = np.zeros(g.n)
    np.add.at(acc, g.eu[c.edge_ids], -c.signs)
    np.add.at(acc, g.ev[c.edge_ids], c.signs)
    return acc


@dataclass
class CycleSet:
    """Cycles plus their sampling weights.

    `spans_flag` records whether the set provably spans the cycle space;
    `extra_weight_fraction` is the share of sampling mass held by
    non-fundamental cycles after extension.
    """

    cycles: list[Cycle]
    weights: np.ndarray
    spans_flag: bool
    extra_weight_fraction: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len(self.weights) != len(self.cycles):
            raise ValueError("one weight per cycle required")
        if np.any(self.weights <= 0):
            raise ValueError("cycle weights must be strictly positive")

    def __len__(self) -> int:
        return len(self.cycles)

    def fundamental_weight_sum(self) -> float:
        return float(sum(w for c, w in zip(self.cycles, self.weights)
                         if c.kind == "fundamental"))


def fundamental_cycles(g: Graph, t: SpanningTree) -> CycleSet:
    """One cycle per off-tree edge: the edge forward, the tree path back.

    Weights are the stretches R_e / r_e, so they sum to the tree condition
    number.
    """
    cycles = []
    weights = []
    for eid in range(g.m):
        if t.in_tree[eid]:
            continue
        u, v = int(g.eu[eid]), int(g.ev[eid])
        traversal = [(eid, 1)] + tree_path(g, t, v, u)
        c = Cycle(g, traversal, kind="fundamental")
        cycles.append(c)
        weights.append(c.resistance / float(g.r[eid]))
    return CycleSet(cycles, np.array(weights, dtype=np.float64), spans_flag=True)


def _block_boundary(g: Graph, d1: int, r0: int, c0: int, size: int) -> list[tuple[int, int]]:
    # Perimeter of a size x size block of faces, consistently oriented:
    # down the left side, right along the bottom, up the right, left along
    # the top. Stored grid edges run low index -> high index.
    r1, c1 = r0 + size, c0 + size
    walk = []
    for r in range(r0, r1):
        walk.append((g.edge_id(r * d1 + c0, (r + 1) * d1 + c0), 1))
    for c in range(c0, c1):
        walk.append((g.edge_id(r1 * d1 + c, r1 * d1 + c + 1), 1))
    for r in range(r1, r0, -1):
        walk.append((g.edge_id((r - 1) * d1 + c1, r * d1 + c1), -1))
    for c in range(c1, c0, -1):
        walk.append((g.edge_id(r0 * d1 + c - 1, r0 * d1 + c), -1))
    return walk


def facial_cycles(g: Graph, max_level: int = 0) -> CycleSet:
    """Face boundaries of a 2D grid graph, optionally combined hierarchically.

    Level 0 holds every unit face, colored checkerboard by (i + j) mod 2.
    Level l >= 1 holds boundaries of aligned, non-overlapping 2^l x 2^l
    face blocks that fit entirely inside the grid, colored by block parity.
    Weights equal cycle lengths.
    """
    dims = g.dims
    if dims is None or len(dims) != 2:
        raise ValueError("facial cycles require a 2D grid graph")
    d0, d1 = dims
    faces0, faces1 = d0 - 1, d1 - 1
    cycles = []
    for level in range(max_level + 1):
        size = 1 << level
        for bi in range(0, faces0 - size + 1, size):
            for bj in range(0, faces1 - size + 1, size):
                walk = _block_boundary(g, d1, bi, bj, size)
                color = ((bi // size) + (bj // size)) % 2
                cycles.append(Cycle(g, walk, kind="facial", level=level, color=color))
    weights = np.array([c.length for c in cycles], dtype=np.float64)
    return CycleSet(cycles, weights, spans_flag=True)


def truncated_bfs(g: Graph, eid: int, max_edges: int) -> list[tuple[int, int]] | None:
    """Short path between the endpoints of `eid` avoiding the edge itself.

    Breadth-first from the stored tail, scanning adjacency entries in
    order. Each edge that expands the search to a new vertex counts
    against `max_edges`; overrunning the budget returns None, keeping
    every search constant work for a fixed budget.
    """
    start, target = int(g.eu[eid]), int(g.ev[eid])
    prev: dict[int, tuple[int, int]] = {start: (-1, -1)}
    queue = deque([start])
    explored = 0
    while queue:
        v = queue.popleft()
        for e2, u2 in g.adjacency[v]:
            if e2 == eid or u2 in prev:
                continue
            explored += 1
            if explored > max_edges:
                return None
            prev[u2] = (v, e2)
            if u2 == target:
                walk = []
                node = u2
                while node != start:
                    pv, pe = prev[node]
                    sign = 1 if int(g.eu[pe]) == pv else -1
                    walk.append((pe, sign))
                    node = pv
                walk.reverse()
                return walk
            queue.append(u2)
    return None


def local_greedy_cycles(g: Graph, max_edges: int = 20) -> CycleSet:
    """Short cycles found by budgeted BFS around each not-yet-covered edge.

    Edges are tried in ascending id; edges of a found cycle are marked and
    never seed another search, though later paths may still cross them.
    Weights equal cycle lengths.
    """
    marked = np.zeros(g.m, dtype=bool)
    cycles = []
    for eid in range(g.m):
        if marked[eid]:
            continue
        path = truncated_bfs(g, eid, max_edges)
        if path is None:
            continue
        walk = path + [(eid, -1)]
        c = Cycle(g, walk, kind="greedy")
        cycles.append(c)
        marked[c.edge_ids] = True
    weights = np.array([c.length for c in cycles], dtype=np.float64)
    return CycleSet(cycles, weights, spans_flag=False)


def extend_cycle_set(fundamental: CycleSet, extra: CycleSet) -> CycleSet:
    """Concatenate a spanning set with extra cycles, keeping both weightings."""
    cycles = fundamental.cycles + extra.cycles
    weights = np.concatenate([fundamental.weights, extra.weights])
    total = float(np.sum(weights))
    extra_mass = float(np.sum(extra.weights)) if len(extra.cycles) else 0.0
    fraction = extra_mass / total if total > 0 else 0.0
    return CycleSet(cycles, weights, spans_flag=fundamental.spans_flag,
                    extra_weight_fraction=fraction)


class Sampler:
    """Weighted cycle sampling via a cumulative table and binary search."""

    def __init__(self, weights: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        if len(weights) == 0:
            raise ValueError("cannot sample from an empty cycle set")
        if np.any(weights <= 0):
            raise ValueError("sampling weights must be positive")
        self.cumulative = np.cumsum(weights)
        self.total = float(self.cumulative[-1])

    def __len__(self) -> int:
        return len(self.cumulative)

    def index_for(self, u: float) -> int:
        """Cycle index whose cumulative interval contains u * total."""
        idx = int(np.searchsorted(self.cumulative, u * self.total, side="right"))
        return min(idx, len(self.cumulative) - 1)

    def draw(self, rng) -> int:
        return self.index_for(rng.random())


def build_sampler(cs: CycleSet) -> Sampler:
    return Sampler(cs.weights)
