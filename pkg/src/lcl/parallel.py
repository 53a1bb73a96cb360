"""Deterministic simulation of multi-thread cycle updates with idle-on-conflict."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cycles import CycleSet, Sampler, build_sampler
from .graph import Graph, relative_residual, validate_demand
from .solvers import (SolveConfig, SolveReport, _Criterion, _default_drk_cap,
                      cycle_project, init_tree_flow, recover_potentials)
from .trees import SpanningTree
from .work import METRICS, CostMetric, WorkLedger, cycle_cost  # noqa: F401  (re-export)


@dataclass
class SimReport(SolveReport):
    """Solve report plus the simulated thread count.

    `iterations` counts cycle updates (so it always equals metric-4 work);
    the ledger's `rounds` counts synchronized selection rounds and `psteps`
    holds the per-metric parallel steps.
    """

    threads: int = 1


def select_round(sampler: Sampler, cs: CycleSet, threads: int, rng
                 ) -> tuple[list[tuple[int, int]], int]:
    """One selection round: every thread draws, conflicts idle the loser.

    Threads draw in index order from the unconditioned distribution; a
    draw sharing any edge with an earlier accepted draw is discarded and
    that thread idles for the round. Returns accepted (thread, cycle
    index) pairs plus the idle count. The realized distribution is thereby
    conditioned on edge availability, biasing toward small cycles.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    used: set[int] = set()
    accepted: list[tuple[int, int]] = []
    idle = 0
    for thread in range(threads):
        idx = sampler.draw(rng)
        ids = cs.cycles[idx].edge_id_set()
        if used & ids:
            idle += 1
        else:
            accepted.append((thread, idx))
            used |= ids
    return accepted, idle


def parallel_drk_simulate(g: Graph, t: SpanningTree, cs: CycleSet, b: np.ndarray,
                          threads: int, cfg: SolveConfig | None = None) -> SimReport:
    """Simulate `threads` workers doing synchronized cycle-update rounds.

    Accepted cycles in a round are edge-disjoint, so projecting them
    sequentially reproduces the simultaneous update. Each thread is
    charged its own cycle's cost (idle threads zero); the round's span
    contribution is the maximum charge. With one thread this reduces to
    the sequential solver, draw for draw. Communication is free by design.
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
    ledger = WorkLedger(threads=threads)
    interval = cfg.check_interval or len(cs)
    cap = cfg.max_iterations if cfg.max_iterations is not None else _default_drk_cap(cs)
    crit = _Criterion(g, b, cfg)

    v = recover_potentials(g, t, state)
    converged = crit.value(v) <= cfg.tolerance
    rounds = 0
    cycles = cs.cycles
    while not converged and rounds < cap:
        accepted, idle = select_round(sampler, cs, threads, rng)
        charges = []
        for thread, idx in accepted:
            c = cycles[idx]
            cycle_project(state, c)
            charges.append((thread, c.costs))
        ledger.charge_round(charges, idle)
        rounds += 1
        if rounds % interval == 0:
            v = recover_potentials(g, t, state)
            converged = crit.value(v) <= cfg.tolerance
    if not converged and rounds % interval != 0:
        v = recover_potentials(g, t, state)
        converged = crit.value(v) <= cfg.tolerance
    return SimReport("drk", converged, ledger.updates,
                     relative_residual(g, v, b), crit.error(v), ledger, v,
                     cfg.seed, warnings, threads=threads)


def speedup_table(reports: list[SimReport]) -> dict[int, dict[CostMetric, float]]:
    """Per-metric speedups: single-thread total work over parallel steps.

    Requires a threads=1 report among the inputs to serve as the
    sequential baseline.
    """
    by_threads = {r.threads: r for r in reports}
    if 1 not in by_threads:
        raise ValueError("speedup table needs a threads=1 baseline report")
    base = by_threads[1].work.work
    table: dict[int, dict[CostMetric, float]] = {}
    for p, report in sorted(by_threads.items()):
        row = {}
        for metric in METRICS:
            steps = int(report.work.psteps[metric - 1])
            total = int(base[metric - 1])
            if steps == 0:
                row[metric] = 1.0 if total == 0 else float("inf")
            else:
                row[metric] = total / steps
        table[p] = row
    return table
