"""Undirected weighted graphs, ingestion, pruning, and Laplacian operations."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class MatrixMarketError(ValueError):
    """Raised on malformed Matrix Market input; the message names the line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class Graph:
    """Simple undirected graph with positive edge weights.

    Edges carry a stored orientation (u, v); flows and cycle traversals are
    signed relative to it. The electrical resistance of an edge is 1/weight.
    Instances are immutable after construction and safe to share across
    concurrent solves.
    """

    def __init__(self, n: int, edges: Sequence[tuple[int, int, float]],
                 dims: tuple[int, ...] | None = None):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self.dims = dims
        m = len(edges)
        eu = np.empty(m, dtype=np.int64)
        ev = np.empty(m, dtype=np.int64)
        w = np.empty(m, dtype=np.float64)
        pair_to_id: dict[tuple[int, int], int] = {}
        for k, (u, v, wk) in enumerate(edges):
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if not wk > 0:
                raise ValueError(f"edge ({u},{v}) has non-positive weight {wk}")
            key = (u, v) if u < v else (v, u)
            if key in pair_to_id:
                raise ValueError(f"duplicate undirected edge {key}")
            pair_to_id[key] = k
            eu[k], ev[k], w[k] = u, v, wk
        self.eu = eu
        self.ev = ev
        self.w = w
        self.r = 1.0 / w
        self._pair_to_id = pair_to_id
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for k in range(m):
            adjacency[eu[k]].append((k, int(ev[k])))
            adjacency[ev[k]].append((k, int(eu[k])))
        self.adjacency = adjacency
        self.degrees = np.array([len(a) for a in adjacency], dtype=np.int64)

    @property
    def m(self) -> int:
        return len(self.w)

    def edge_id(self, u: int, v: int) -> int:
        """Edge id for the unordered pair {u, v}; KeyError if absent."""
        return self._pair_to_id[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._pair_to_id

    def edge_list(self) -> list[tuple[int, int, float]]:
        return [(int(self.eu[k]), int(self.ev[k]), float(self.w[k]))
                for k in range(self.m)]

    def edge_pairs(self) -> set[tuple[int, int]]:
        """Unordered edge set, each pair normalized low-high."""
        return set(self._pair_to_id)


def validate_demand(b: np.ndarray) -> np.ndarray:
    """Check that a demand vector is balanced (entries sum to ~zero)."""
    b = np.asarray(b, dtype=np.float64)
    tol = 1e-12 * np.sum(np.abs(b))
    if abs(float(np.sum(b))) > tol:
        raise ValueError(f"demand vector sums to {np.sum(b):g}, not zero")
    return b


def _parse_header(line: str) -> tuple[str, str]:
    tokens = line.strip().split()
    if (len(tokens) != 5 or tokens[0] != "%%MatrixMarket"
            or tokens[1].lower() != "matrix"):
        raise MatrixMarketError("malformed MatrixMarket header", 1)
    layout, field, symmetry = (t.lower() for t in tokens[2:5])
    if layout != "coordinate":
        raise MatrixMarketError(f"unsupported layout '{layout}'", 1)
    if field not in ("real", "integer", "pattern"):
        raise MatrixMarketError(f"unsupported field '{field}'", 1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry '{symmetry}'", 1)
    return field, symmetry


def parse_matrix_market(source: str | Iterable[str], unweighted: bool = False) -> Graph:
    """Parse Matrix Market coordinate text into an undirected Graph.

    The matrix is read as an adjacency: diagonal entries are dropped,
    off-diagonal values contribute |value| (Laplacian-style input is
    accepted), and repeated (i, j) entries are summed. When both (i, j)
    and (j, i) carry weight, the edge takes the larger of the two
    directional sums, so a symmetric matrix stored in general form yields
    the same graph as its symmetric-format file. `unweighted` forces all
    weights to 1.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in source]
    if not lines:
        raise MatrixMarketError("empty input", 1)
    field, symmetry = _parse_header(lines[0])

    size: tuple[int, int, int] | None = None
    directed: dict[tuple[int, int], float] = {}
    order: dict[tuple[int, int], None] = {}
    entries_seen = 0
    for idx, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        tokens = line.split()
        if size is None:
            if len(tokens) != 3:
                raise MatrixMarketError("size line must be 'rows cols nnz'", idx)
            try:
                rows, cols, nnz = (int(t) for t in tokens)
            except ValueError:
                raise MatrixMarketError("non-integer size line", idx) from None
            if rows != cols:
                raise MatrixMarketError(f"non-square dimensions {rows}x{cols}", idx)
            size = (rows, cols, nnz)
            continue
        want = 2 if field == "pattern" else 3
        if len(tokens) != want:
            raise MatrixMarketError(f"expected {want} tokens, got {len(tokens)}", idx)
        try:
            i, j = int(tokens[0]), int(tokens[1])
            value = 1.0 if field == "pattern" else float(tokens[2])
        except ValueError:
            raise MatrixMarketError("non-numeric entry", idx) from None
        rows = size[0]
        if not (1 <= i <= rows and 1 <= j <= rows):
            raise MatrixMarketError(f"index ({i},{j}) out of range 1..{rows}", idx)
        entries_seen += 1
        if i == j:
            continue
        u, v = i - 1, j - 1
        directed[(u, v)] = directed.get((u, v), 0.0) + abs(value)
        key = (u, v) if u < v else (v, u)
        order.setdefault(key, None)
    if size is None:
        raise MatrixMarketError("missing size line", len(lines))
    if entries_seen != size[2]:
        raise MatrixMarketError(
            f"declared {size[2]} entries but found {entries_seen}", len(lines))

    edges = []
    for (u, v) in order:
        w = max(directed.get((u, v), 0.0), directed.get((v, u), 0.0))
        edges.append((u, v, 1.0 if unweighted else w))
    return Graph(size[0], edges)


def write_matrix_market(g: Graph) -> str:
    """Render a Graph as a symmetric real coordinate Matrix Market file."""
    out = ["%%MatrixMarket matrix coordinate real symmetric",
           f"{g.n} {g.n} {g.m}"]
    for k in range(g.m):
        u, v = int(g.eu[k]), int(g.ev[k])
        lo, hi = (u, v) if u < v else (v, u)
        out.append(f"{hi + 1} {lo + 1} {g.w[k]:.17g}")
    return "\n".join(out) + "\n"


def symmetrize(n: int, directed_edges: Iterable[tuple[int, int, float]],
               unweighted: bool = False) -> Graph:
    """Collapse a directed edge list into an undirected graph.

    The undirected weight of {u, v} is the sum of every (u, v) and (v, u)
    entry, i.e. the matrix plus its transpose. Self-loops are dropped.
    """
    acc: dict[tuple[int, int], float] = {}
    for u, v, w in directed_edges:
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        acc[key] = acc.get(key, 0.0) + w
    edges = [(u, v, 1.0 if unweighted else w) for (u, v), w in acc.items()]
    return Graph(n, edges)


def prune_two_core(g: Graph) -> tuple[Graph, np.ndarray]:
    """Largest connected component of the 2-core, with an old->new index map.

    Degree-1 vertices are peeled repeatedly; of the surviving components the
    largest by vertex count is kept (ties go to the component containing the
    smallest original index). Dropped vertices map to -1. A forest prunes to
    the empty graph.
    """
    alive = np.ones(g.n, dtype=bool)
    deg = g.degrees.copy()
    stack = [v for v in range(g.n) if deg[v] < 2]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for eid, u in g.adjacency[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] < 2:
                    stack.append(u)

    comp = np.full(g.n, -1, dtype=np.int64)
    best_comp, best_size = -1, 0
    n_comp = 0
    for start in range(g.n):
        if not alive[start] or comp[start] >= 0:
            continue
        queue = [start]
        comp[start] = n_comp
        size = 0
        while queue:
            v = queue.pop()
            size += 1
            for eid, u in g.adjacency[v]:
                if alive[u] and comp[u] < 0:
                    comp[u] = n_comp
                    queue.append(u)
        if size > best_size:
            best_comp, best_size = n_comp, size
        n_comp += 1

    old_to_new = np.full(g.n, -1, dtype=np.int64)
    kept = [v for v in range(g.n) if alive[v] and comp[v] == best_comp]
    for new, old in enumerate(kept):
        old_to_new[old] = new
    edges = []
    for k in range(g.m):
        u, v = old_to_new[g.eu[k]], old_to_new[g.ev[k]]
        if u >= 0 and v >= 0:
            edges.append((int(u), int(v), float(g.w[k])))
    if len(kept) == g.n and len(edges) == g.m:
        return g, np.arange(g.n, dtype=np.int64)
    return Graph(len(kept), edges), old_to_new


def grid_graph(dims: Sequence[int]) -> Graph:
    """Axis-aligned lattice with unit weights and row-major numbering."""
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise ValueError("grid dims must have 2 or 3 entries")
    if any(d < 2 for d in dims):
        raise ValueError(f"grid sides must be >= 2, got {dims}")
    n = math.prod(dims)
    strides = []
    s = 1
    for d in reversed(dims):
        strides.append(s)
        s *= d
    strides.reverse()
    edges = []
    for v in range(n):
        rest = v
        coords = []
        for st in strides:
            coords.append(rest // st)
            rest %= st
        for axis, side in enumerate(dims):
            if coords[axis] + 1 < side:
                edges.append((v, v + strides[axis], 1.0))
    return Graph(n, edges, dims=dims)


def laplacian_apply(g: Graph, x: np.ndarray) -> np.ndarray:
    """Apply L = D - A edge-wise: each edge {u,v} adds w*(x_u - x_v) to u."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"vector length {x.shape} does not match n={g.n}")
    out = np.zeros(g.n)
    d = g.w * (x[g.eu] - x[g.ev])
    np.add.at(out, g.eu, d)
    np.add.at(out, g.ev, -d)
    return out


def laplacian_csr(g: Graph) -> sp.csr_matrix:
    """Laplacian as a scipy CSR matrix (diagonal included)."""
    rows = np.concatenate([g.eu, g.ev, np.arange(g.n)])
    cols = np.concatenate([g.ev, g.eu, np.arange(g.n)])
    wdeg = np.zeros(g.n)
    np.add.at(wdeg, g.eu, g.w)
    np.add.at(wdeg, g.ev, g.w)
    vals = np.concatenate([-g.w, -g.w, wdeg])
    return sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))


def relative_residual(g: Graph, v: np.ndarray, b: np.ndarray) -> float:
    """||Lv - b|| / ||b||, with the zero-demand convention."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (g.n,):
        raise ValueError(f"demand length {b.shape} does not match n={g.n}")
    lv = laplacian_apply(g, v)
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return 0.0 if float(np.linalg.norm(lv)) == 0.0 else math.inf
    return float(np.linalg.norm(lv - b)) / nb
