"""Cost metrics for cycle updates and the work ledger that accumulates them."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class CostMetric(IntEnum):
    """Work models for one cycle update, cheapest assumptions last."""

    EDGES_TOUCHED = 1   # naive: touch every edge in the cycle
    LOG_N = 2           # tree-cycle update structure, ceil(log2 n)
    LOG_CYCLE_LENGTH = 3  # optimistic ceil(log2 length)
    UNIT = 4            # lower bound, one unit per update


METRICS = tuple(CostMetric)


def _ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


def cost_vector(length: int, kind: str, n: int) -> np.ndarray:
    """Costs of one update under all four metrics, as an int64 4-vector.

    Greedy cycles cannot use the tree-cycle update structure, so metric 2
    charges them the full edge count instead of ceil(log2 n).
    """
    log_n_cost = length if kind == "greedy" else _ceil_log2(n)
    return np.array([length, log_n_cost, _ceil_log2(length), 1], dtype=np.int64)


def cycle_cost(cycle, n: int, metric: CostMetric) -> int:
    """Work units for one update of `cycle` under a single metric."""
    return int(cost_vector(cycle.length, cycle.kind, n)[metric - 1])


class WorkLedger:
    """Cumulative per-metric work, per-thread splits, and step counters.

    `work` is total work across threads per metric; `psteps` sums, per
    iteration, the maximum single-thread charge (the span under each
    metric). With one thread the two coincide.
    """

    def __init__(self, threads: int = 1):
        self.threads = threads
        self.work = np.zeros(4, dtype=np.int64)
        self.psteps = np.zeros(4, dtype=np.int64)
        self.per_thread = np.zeros((threads, 4), dtype=np.int64)
        self.updates = 0
        self.rounds = 0
        self.idle = 0

    def charge_round(self, thread_costs: list[tuple[int, np.ndarray]], idle: int) -> None:
        """One simulated round: per-thread charges plus idle threads at zero."""
        step = np.zeros(4, dtype=np.int64)
        for thread, costs in thread_costs:
            self.work += costs
            self.per_thread[thread] += costs
            np.maximum(step, costs, out=step)
        self.psteps += step
        self.updates += len(thread_costs)
        self.rounds += 1
        self.idle += idle

    def charge_block(self, total: np.ndarray, step: np.ndarray, count: int) -> None:
        """A half-sweep of edge-disjoint cycles: work sums, span takes one max."""
        self.work += total
        self.per_thread[0] += total
        self.psteps += step
        self.updates += count

    def charge_scalar(self, amount: int) -> None:
        """Row-solver accounting: the same scalar under every metric."""
        self.work += amount
        self.psteps += amount
        self.per_thread[0] += amount
        self.rounds += 1

    def metric_work(self, metric: CostMetric) -> int:
        return int(self.work[metric - 1])

    def metric_psteps(self, metric: CostMetric) -> int:
        return int(self.psteps[metric - 1])
