"""Laplacian solvers: cycle-space dual Kaczmarz, facial sweeps, PRK, Jacobi-PCG."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .cycles import Cycle, CycleSet, build_sampler
from .graph import Graph, laplacian_csr, relative_residual, validate_demand
from .trees import SpanningTree, bfs_tree
from .work import WorkLedger


class FlowState:
    """Dual iterate: signed currents per edge plus the demand they satisfy.

    Currents are positive in the stored edge orientation. Flow
    conservation (net outflow equals demand at every vertex) holds after
    initialization and is preserved by every cycle projection.
    """

    def __init__(self, f: np.ndarray, tree: SpanningTree, b: np.ndarray):
        self.f = f
        self.tree = tree
        self.b = b

    def conservation_defect(self, g: Graph) -> np.ndarray:
        out = np.zeros(g.n)
        np.add.at(out, g.eu, self.f)
        np.add.at(out, g.ev, -self.f)
        return out - self.b


@dataclass
class SolveConfig:
    """Shared convergence settings for all solvers."""

    tolerance: float = 1e-3
    mode: str = "residual"              # "residual" or "actual"
    check_interval: int | None = None   # updates (or rounds/sweeps) between checks
    max_iterations: int | None = None
    seed: int = 0
    reference: np.ndarray | None = None  # v* for actual-error mode

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.mode not in ("residual", "actual"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "actual" and self.reference is None:
            raise ValueError("actual-error mode needs a reference solution")


@dataclass
class SolveReport:
    solver: str
    converged: bool
    iterations: int
    final_residual: float
    final_error: float | None
    work: WorkLedger
    solution: np.ndarray
    seed: int | None = None
    warnings: list[str] = field(default_factory=list)


class _Criterion:
    """Evaluates the configured stopping criterion on recovered potentials."""

    def __init__(self, g: Graph, b: np.ndarray, cfg: SolveConfig):
        self.g = g
        self.b = b
        self.mode = cfg.mode
        self.reference = None
        self.reference_norm = 0.0
        if cfg.reference is not None:
            ref = np.asarray(cfg.reference, dtype=np.float64)
            ref = ref - ref.mean()
            self.reference = ref
            self.reference_norm = float(np.linalg.norm(ref))

    def error(self, v: np.ndarray) -> float | None:
        if self.reference is None:
            return None
        vc = v - v.mean()
        if self.reference_norm == 0.0:
            return 0.0 if float(np.linalg.norm(vc)) == 0.0 else math.inf
        return float(np.linalg.norm(vc - self.reference)) / self.reference_norm

    def value(self, v: np.ndarray) -> float:
        if self.mode == "actual":
            return self.error(v)
        return relative_residual(self.g, v, self.b)


def init_tree_flow(g: Graph, t: SpanningTree, b: np.ndarray) -> FlowState:
    """Unique feasible flow supported on the tree: leaves push demand rootward."""
    b = validate_demand(b)
    f = np.zeros(g.m)
    acc = b.astype(np.float64).copy()
    for v in t.order[:0:-1]:
        pe = t.parent_edge[v]
        f[pe] = t.up_sign[v] * acc[v]
        acc[t.parent[v]] += acc[v]
    return FlowState(f, t, b)


def cycle_project(state: FlowState, c: Cycle) -> float:
    """Kaczmarz projection onto one cycle's zero-voltage constraint.

    Returns the pre-projection signed voltage around the cycle; the update
    zeroes it exactly while preserving flow conservation. Mutates the
    state in place.
    """
    ids = c.edge_ids
    f = state.f
    delta = float(c.sr @ f[ids])
    f[ids] -= c.scaled_signs * delta
    return delta


def cycle_voltage(state: FlowState, c: Cycle) -> float:
    """Signed sum of r*f around a cycle (zero right after projecting it)."""
    return float(c.sr @ state.f[c.edge_ids])


def recover_potentials(g: Graph, t: SpanningTree, state: FlowState) -> np.ndarray:
    """Potentials induced by the tree currents, mean-centered.

    Current flows from high to low potential, so walking a tree edge away
    from the root drops the potential by r*f in the flow direction.
    """
    f = state.f.tolist()
    v = [0.0] * g.n
    for child, parent, edge, coef in t.recover_walk:
        v[child] = v[parent] + coef * f[edge]
    out = np.array(v)
    return out - out.mean()


def _default_drk_cap(cs: CycleSet) -> int:
    tau = cs.fundamental_weight_sum()
    if tau <= 0:
        tau = float(np.sum(cs.weights))
    return int(1e4 * max(tau, 1.0))


def drk_solve(g: Graph, t: SpanningTree, cs: CycleSet, b: np.ndarray,
              cfg: SolveConfig | None = None) -> SolveReport:
    """Randomized dual Kaczmarz: sample cycles by weight, project until done.

    Work is charged under all four cost metrics per update; convergence is
    checked on recovered potentials every `check_interval` updates
    (default: one cycle-set's worth). Runs with a warning when the cycle
    set is not known to span the cycle space.
    """
    cfg = cfg or SolveConfig()
    b = validate_demand(b)
    warnings = []
    if not cs.spans_flag:
        warnings.append("cycle set may not span the cycle space; "
                        "convergence is not guaranteed")
    sampler = build_sampler(cs)
    rng = np.random.default_rng(cfg.seed)
    state = init_tree_flow(g, t, b)
    ledger = WorkLedger(threads=1)
    interval = cfg.check_interval or len(cs)
    cap = cfg.max_iterations if cfg.max_iterations is not None else _default_drk_cap(cs)
    crit = _Criterion(g, b, cfg)

    v = recover_potentials(g, t, state)
    converged = crit.value(v) <= cfg.tolerance
    k = 0
    w1 = w2 = w3 = 0
    cycles = cs.cycles
    last = len(cycles) - 1
    cum, total = sampler.cumulative, sampler.total
    rand, searchsorted = rng.random, np.searchsorted
    f = state.f
    while not converged and k < cap:
        idx = searchsorted(cum, rand() * total, side="right")
        c = cycles[idx if idx <= last else last]
        ids = c.edge_ids
        delta = float(c.sr @ f[ids])
        f[ids] -= c.scaled_signs * delta
        costs = c.cost_tuple
        w1 += costs[0]
        w2 += costs[1]
        w3 += costs[2]
        k += 1
        if k % interval == 0:
            v = recover_potentials(g, t, state)
            converged = crit.value(v) <= cfg.tolerance
    if not converged and k % interval != 0:
        v = recover_potentials(g, t, state)
        converged = crit.value(v) <= cfg.tolerance
    ledger.work[:] = (w1, w2, w3, k)
    ledger.psteps[:] = ledger.work
    ledger.per_thread[0] = ledger.work
    ledger.updates = ledger.rounds = k
    return SolveReport("drk", converged, k, relative_residual(g, v, b),
                       crit.error(v), ledger, v, cfg.seed, warnings)


def facial_sweep_solve(g: Graph, cs: CycleSet, b: np.ndarray,
                       cfg: SolveConfig | None = None) -> SolveReport:
    """Deterministic sweeps over facial cycles, by level then by color.

    Same-color cycles within a level are edge-disjoint, so each half-sweep
    is notionally simultaneous: its span charge is the cost of one cycle.
    Convergence is checked after every full sweep. Iterations count
    sweeps.
    """
    cfg = cfg or SolveConfig()
    if any(c.kind != "facial" for c in cs.cycles):
        raise ValueError("facial sweeps need a facial cycle set")
    b = validate_demand(b)
    groups: dict[tuple[int, int], list[Cycle]] = {}
    for c in cs.cycles:
        groups.setdefault((c.level, c.color), []).append(c)
    ordered = [groups[key] for key in sorted(groups)]
    group_total = [np.sum([c.costs for c in grp], axis=0, dtype=np.int64)
                   for grp in ordered]
    group_step = [np.max([c.costs for c in grp], axis=0).astype(np.int64)
                  for grp in ordered]

    t = bfs_tree(g)
    state = init_tree_flow(g, t, b)
    ledger = WorkLedger(threads=1)
    cap = cfg.max_iterations if cfg.max_iterations is not None else 10_000
    crit = _Criterion(g, b, cfg)

    v = recover_potentials(g, t, state)
    converged = crit.value(v) <= cfg.tolerance
    sweeps = 0
    while not converged and sweeps < cap:
        for grp, total, step in zip(ordered, group_total, group_step):
            for c in grp:
                cycle_project(state, c)
            ledger.charge_block(total, step, len(grp))
        ledger.rounds += 1
        sweeps += 1
        v = recover_potentials(g, t, state)
        converged = crit.value(v) <= cfg.tolerance
    return SolveReport("facial-sweep", converged, sweeps,
                       relative_residual(g, v, b), crit.error(v), ledger, v,
                       cfg.seed, [])


def kaczmarz_row_project(indices: np.ndarray, values: np.ndarray,
                         b_i: float, x: np.ndarray) -> np.ndarray:
    """Project x onto one sparse row constraint <row, x> = b_i, in place."""
    nrm2 = float(values @ values)
    if nrm2 == 0.0:
        raise ValueError("cannot project onto a zero row")
    step = (b_i - float(values @ x[indices])) / nrm2
    x[indices] += step * values
    return x


def prk_solve(g: Graph, b: np.ndarray, cfg: SolveConfig | None = None) -> SolveReport:
    """Primal randomized Kaczmarz over the rows of L.

    Each sweep projects against every row in a fresh random order and is
    charged nnz(L) work. Convergence is checked once per sweep.
    """
    cfg = cfg or SolveConfig()
    b = validate_demand(b)
    L = laplacian_csr(g)
    nnz = L.nnz
    rows = [(L.indices[L.indptr[i]:L.indptr[i + 1]],
             L.data[L.indptr[i]:L.indptr[i + 1]]) for i in range(g.n)]
    rng = np.random.default_rng(cfg.seed)
    x = np.zeros(g.n)
    ledger = WorkLedger(threads=1)
    cap = cfg.max_iterations if cfg.max_iterations is not None else 10_000
    crit = _Criterion(g, b, cfg)

    converged = crit.value(x - x.mean()) <= cfg.tolerance
    sweeps = 0
    while not converged and sweeps < cap:
        for i in rng.permutation(g.n):
            idx, vals = rows[i]
            kaczmarz_row_project(idx, vals, b[i], x)
        ledger.charge_scalar(nnz)
        sweeps += 1
        converged = crit.value(x - x.mean()) <= cfg.tolerance
    v = x - x.mean()
    return SolveReport("prk", converged, sweeps, relative_residual(g, v, b),
                       crit.error(v), ledger, v, cfg.seed, [])


def pcg_solve(g: Graph, b: np.ndarray, cfg: SolveConfig | None = None) -> SolveReport:
    """Jacobi-preconditioned CG on the system grounded at the last vertex.

    The last row and column of L are removed to fix that potential at
    zero; the result is embedded back and mean-centered. Work per
    iteration is nnz of the reduced matrix plus one preconditioner apply.
    """
    cfg = cfg or SolveConfig()
    b = validate_demand(b)
    if g.n < 2:
        raise ValueError("pcg needs at least two vertices")
    L = laplacian_csr(g)
    Lr = L[:-1, :][:, :-1].tocsr()
    br = b[:-1]
    inv_diag = 1.0 / Lr.diagonal()
    per_iter = Lr.nnz + (g.n - 1)
    ledger = WorkLedger(threads=1)
    crit = _Criterion(g, b, cfg)
    cap = cfg.max_iterations if cfg.max_iterations is not None else 10 * g.n
    warnings = []

    def embed(xr):
        v = np.concatenate([xr, [0.0]])
        return v - v.mean()

    x = np.zeros(g.n - 1)
    resid = br.copy()
    z = inv_diag * resid
    p = z.copy()
    rz = float(resid @ z)
    v = embed(x)
    converged = crit.value(v) <= cfg.tolerance
    steps = 0
    while not converged and steps < cap:
        Ap = Lr @ p
        pAp = float(p @ Ap)
        if pAp <= 0.0 or rz == 0.0:
            warnings.append("pcg breakdown: zero denominator in recurrence")
            break
        alpha = rz / pAp
        x += alpha * p
        resid -= alpha * Ap
        steps += 1
        ledger.charge_scalar(per_iter)
        v = embed(x)
        converged = crit.value(v) <= cfg.tolerance
        if converged:
            break
        z = inv_diag * resid
        rz_next = float(resid @ z)
        beta = rz_next / rz
        p = z + beta * p
        rz = rz_next
    return SolveReport("pcg", converged, steps, relative_residual(g, v, b),
                       crit.error(v), ledger, v, cfg.seed, warnings)


def reference_solution(g: Graph, b: np.ndarray) -> np.ndarray:
    """Direct sparse solve of the grounded system, mean-centered."""
    b = validate_demand(b)
    if g.n == 1:
        return np.zeros(1)
    L = laplacian_csr(g).tocsc()
    xr = spla.spsolve(L[:-1, :][:, :-1], b[:-1])
    v = np.concatenate([np.atleast_1d(xr), [0.0]])
    return v - v.mean()
