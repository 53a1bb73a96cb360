"""Spanning trees, tree paths, and stretch / tree-condition-number."""

from __future__ import annotations

from collections import deque

import numpy as np

from .graph import Graph


class SpanningTree:
    """Rooted spanning tree over a Graph, with parent pointers and depths.

    `parent_edge[v]` is the Graph edge id connecting v to its parent
    (-1 at the root). `up_sign[v]` is +1 when that edge is stored as
    (v, parent), so traversing v -> parent follows the stored orientation.
    """

    def __init__(self, g: Graph, root: int, tree_edges: list[int]):
        n = g.n
        if len(tree_edges) != n - 1:
            raise ValueError(f"{len(tree_edges)} tree edges for n={n}")
        self.root = root
        self.in_tree = np.zeros(g.m, dtype=bool)
        self.in_tree[tree_edges] = True
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for eid in tree_edges:
            u, v = int(g.eu[eid]), int(g.ev[eid])
            adj[u].append((eid, v))
            adj[v].append((eid, u))
        parent = np.full(n, -1, dtype=np.int64)
        parent_edge = np.full(n, -1, dtype=np.int64)
        depth = np.full(n, -1, dtype=np.int64)
        up_sign = np.zeros(n, dtype=np.int64)
        order = np.empty(n, dtype=np.int64)
        parent[root] = root
        depth[root] = 0
        order[0] = root
        queue = deque([root])
        filled = 1
        while queue:
            v = queue.popleft()
            for eid, u in adj[v]:
                if depth[u] < 0:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    parent_edge[u] = eid
                    up_sign[u] = 1 if int(g.eu[eid]) == u else -1
                    order[filled] = u
                    filled += 1
                    queue.append(u)
        if filled != n:
            raise ValueError("tree edges do not span the graph")
        self.parent = parent
        self.parent_edge = parent_edge
        self.depth = depth
        self.up_sign = up_sign
        self.order = order  # vertices in BFS order from the root
        # flattened walk for potential recovery: child, parent, edge, signed r
        children = order[1:]
        coef = up_sign[children] * g.r[parent_edge[children]]
        self.recover_walk = list(zip(children.tolist(),
                                     parent[children].tolist(),
                                     parent_edge[children].tolist(),
                                     coef.tolist()))

    @property
    def n(self) -> int:
        return len(self.parent)

    def tree_edge_ids(self) -> np.ndarray:
        return np.flatnonzero(self.in_tree)


def _kruskal(g: Graph, ranked_edge_ids) -> list[int]:
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen = []
    for eid in ranked_edge_ids:
        ra, rb = find(int(g.eu[eid])), find(int(g.ev[eid]))
        if ra != rb:
            parent[ra] = rb
            chosen.append(int(eid))
            if len(chosen) == g.n - 1:
                break
    if len(chosen) != g.n - 1:
        raise ValueError("graph is disconnected")
    return chosen


def degree_sum_tree(g: Graph, order: str = "descending") -> SpanningTree:
    """Greedy spanning tree ranked by the sum of incident vertex degrees.

    Edges are taken in descending degree-sum order (a cheap centrality
    proxy), ties broken by ascending edge id, so the result is
    deterministic. `order="ascending"` flips the ranking.
    """
    if order not in ("descending", "ascending"):
        raise ValueError(f"unknown order {order!r}")
    sums = g.degrees[g.eu] + g.degrees[g.ev]
    if order == "descending":
        sums = -sums
    ranked = np.lexsort((np.arange(g.m), sums))
    return SpanningTree(g, root=0, tree_edges=_kruskal(g, ranked))


def bfs_tree(g: Graph, root: int = 0) -> SpanningTree:
    """Breadth-first spanning tree; a trivial baseline."""
    seen = np.zeros(g.n, dtype=bool)
    seen[root] = True
    tree_edges = []
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for eid, u in g.adjacency[v]:
            if not seen[u]:
                seen[u] = True
                tree_edges.append(eid)
                queue.append(u)
    if not seen.all():
        raise ValueError("graph is disconnected")
    return SpanningTree(g, root=root, tree_edges=tree_edges)


def _h_tree_pairs(r0: int, c0: int, s: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    # Recursive H layout: four quadrant trees joined by three edges placed
    # at the midpoints of the H strokes.
    if s == 1:
        return []
    h = s // 2
    pairs = []
    for dr, dc in ((0, 0), (0, h), (h, 0), (h, h)):
        pairs.extend(_h_tree_pairs(r0 + dr, c0 + dc, h))
    q = h // 2
    # left and right vertical strokes cross the horizontal cut
    pairs.append(((r0 + h - 1, c0 + q), (r0 + h, c0 + q)))
    pairs.append(((r0 + h - 1, c0 + h + q), (r0 + h, c0 + h + q)))
    # crossbar joins the halves next to the cut
    pairs.append(((r0 + h - 1, c0 + h - 1), (r0 + h - 1, c0 + h)))
    return pairs


def h_tree(g: Graph) -> SpanningTree:
    """H-tree over a square power-of-two grid graph.

    Raises ValueError for any other shape; callers fall back to
    degree_sum_tree.
    """
    dims = g.dims
    if dims is None or len(dims) != 2 or dims[0] != dims[1]:
        raise ValueError("h_tree requires a square 2D grid graph")
    side = dims[0]
    if side & (side - 1) != 0:
        raise ValueError(f"h_tree requires a power-of-two side, got {side}")
    tree_edges = []
    for (r1, c1), (r2, c2) in _h_tree_pairs(0, 0, side):
        tree_edges.append(g.edge_id(r1 * side + c1, r2 * side + c2))
    return SpanningTree(g, root=0, tree_edges=tree_edges)


def tree_path(g: Graph, t: SpanningTree, u: int, v: int) -> list[tuple[int, int]]:
    """Edges on the tree path u -> v as (edge id, sign) pairs.

    The sign is +1 when the edge is traversed in its stored (u, v)
    orientation. Both endpoints walk up to their lowest common ancestor.
    """
    up_u: list[tuple[int, int]] = []
    down_v: list[tuple[int, int]] = []
    a, b = u, v
    while a != b:
        if t.depth[a] >= t.depth[b]:
            up_u.append((int(t.parent_edge[a]), int(t.up_sign[a])))
            a = int(t.parent[a])
        else:
            down_v.append((int(t.parent_edge[b]), -int(t.up_sign[b])))
            b = int(t.parent[b])
    down_v.reverse()
    return up_u + down_v


def edge_stretch(g: Graph, t: SpanningTree, eid: int) -> tuple[float, float]:
    """Cycle resistance and stretch of an off-tree edge.

    The cycle resistance is the edge's own resistance plus the resistances
    along the tree path between its endpoints; stretch divides by the
    edge's resistance.
    """
    if t.in_tree[eid]:
        raise ValueError(f"edge {eid} is a tree edge")
    u, v = int(g.eu[eid]), int(g.ev[eid])
    path_r = sum(g.r[pe] for pe, _ in tree_path(g, t, u, v))
    cycle_r = float(g.r[eid]) + path_r
    return cycle_r, cycle_r / float(g.r[eid])


def tree_condition_number(g: Graph, t: SpanningTree) -> float:
    """Sum of stretches over all off-tree edges."""
    total = 0.0
    for eid in range(g.m):
        if not t.in_tree[eid]:
            total += edge_stretch(g, t, eid)[1]
    return total
