"""Experiment driver: config parsing, solver sweeps, stats, and CSV emission."""

from __future__ import annotations

import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cycles import CycleSet, extend_cycle_set, facial_cycles, fundamental_cycles, \
    local_greedy_cycles
from .graph import Graph, grid_graph, parse_matrix_market, prune_two_core
from .parallel import parallel_drk_simulate
from .solvers import SolveConfig, SolveReport, drk_solve, facial_sweep_solve, \
    pcg_solve, prk_solve, reference_solution
from .trees import SpanningTree, bfs_tree, degree_sum_tree, edge_stretch, h_tree, \
    tree_path


class ConfigError(ValueError):
    """Invalid experiment configuration."""


CSV_COLUMNS = [
    "graph", "n", "m", "solver", "tree", "cycles", "threads", "seed", "mode",
    "tol", "converged", "iterations", "work_m1", "work_m2", "work_m3",
    "work_m4", "psteps_m1", "psteps_m2", "psteps_m3", "psteps_m4",
    "final_residual", "final_error", "idle_events",
]
_INT_COLUMNS = {"n", "m", "threads", "seed", "iterations", "idle_events",
                "work_m1", "work_m2", "work_m3", "work_m4",
                "psteps_m1", "psteps_m2", "psteps_m3", "psteps_m4"}
_FLOAT_COLUMNS = {"tol", "final_residual", "final_error"}
_BOOL_COLUMNS = {"converged"}

KNOWN_SOLVERS = ("drk", "prk", "pcg", "facial-sweep")
KNOWN_TREES = ("degree-sum", "h-tree", "bfs")


@dataclass
class ExperimentConfig:
    graph: str
    name: str | None = None
    unweighted: bool = True
    prune: bool = True
    tree: str = "degree-sum"
    cycles: list[str] = field(default_factory=lambda: ["fundamental"])
    solvers: list[str] = field(default_factory=lambda: ["drk"])
    threads: list[int] = field(default_factory=lambda: [1])
    seeds: list[int] = field(default_factory=lambda: [0])
    tol: float = 1e-3
    mode: str = "residual"
    max_iter: int | None = None
    check_interval: int | None = None
    greedy_budget: int = 20
    demand: str = "random"
    out: str | None = None

    def __post_init__(self):
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.cycles:
            raise ConfigError("at least one cycle-set choice is required")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.mode not in ("residual", "actual"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.tree not in KNOWN_TREES:
            raise ConfigError(f"unknown tree {self.tree!r}")
        for s in self.solvers:
            if s not in KNOWN_SOLVERS:
                raise ConfigError(f"unknown solver {s!r}")
        if any(t < 1 for t in self.threads):
            raise ConfigError("thread counts must be >= 1")


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse a flat key=value config file (# starts a comment line)."""
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in ("graph", "name", "tree", "mode", "demand", "out"):
                values[key] = value
            elif key in ("unweighted", "prune"):
                values[key] = _parse_bool(value)
            elif key in ("cycles", "solvers"):
                values[key] = [v.strip() for v in value.split(",") if v.strip()]
            elif key in ("threads", "seeds"):
                values[key] = [int(v) for v in value.split(",") if v.strip()]
            elif key == "tol":
                values[key] = float(value)
            elif key in ("max_iter", "check_interval", "greedy_budget"):
                values[key] = int(value)
            else:
                raise ConfigError(f"line {line_no}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {line_no}: {exc}") from None
    if "graph" not in values:
        raise ConfigError("config is missing the 'graph' key")
    return ExperimentConfig(**values)  # type: ignore[arg-type]


def load_graph(source: str, unweighted: bool = True) -> tuple[Graph, str]:
    """Load a graph from a generator spec (grid2d:WxH, grid3d:WxHxD) or a file."""
    if source.startswith("grid2d:") or source.startswith("grid3d:"):
        kind, _, spec = source.partition(":")
        try:
            dims = tuple(int(p) for p in spec.lower().split("x"))
        except ValueError:
            raise ConfigError(f"bad grid spec {source!r}") from None
        want = 2 if kind == "grid2d" else 3
        if len(dims) != want:
            raise ConfigError(f"{kind} expects {want} sides, got {source!r}")
        return grid_graph(dims), f"{kind}:{spec}"
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"graph file not found: {source}")
    g = parse_matrix_market(path.read_text(), unweighted=unweighted)
    return g, path.stem


def build_tree(g: Graph, kind: str) -> SpanningTree:
    """Construct the requested tree; h-tree falls back to degree-sum."""
    if kind == "degree-sum":
        return degree_sum_tree(g)
    if kind == "bfs":
        return bfs_tree(g)
    if kind == "h-tree":
        try:
            return h_tree(g)
        except ValueError as exc:
            print(f"lcl: h-tree unavailable ({exc}); using degree-sum tree",
                  file=sys.stderr)
            return degree_sum_tree(g)
    raise ConfigError(f"unknown tree {kind!r}")


def build_cycles(g: Graph, t: SpanningTree, choice: str,
                 greedy_budget: int = 20) -> CycleSet:
    """Build a cycle set named by a CLI choice string."""
    if choice == "fundamental":
        return fundamental_cycles(g, t)
    if choice == "fundamental+greedy":
        return extend_cycle_set(fundamental_cycles(g, t),
                                local_greedy_cycles(g, greedy_budget))
    if choice == "facial" or choice.startswith("facial:"):
        levels = 0
        if ":" in choice:
            try:
                levels = int(choice.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad facial level in {choice!r}") from None
        return facial_cycles(g, max_level=levels)
    raise ConfigError(f"unknown cycle set {choice!r}")


def make_demand(g: Graph, spec: str, seed: int) -> np.ndarray:
    """Balanced demand vector: seeded random by default, or pair:SRC:DST."""
    if spec == "random":
        rng = np.random.default_rng([seed, 0x1CD])
        b = rng.standard_normal(g.n)
        return b - b.mean()
    if spec.startswith("pair:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad demand spec {spec!r}")
        src, dst = int(parts[1]), int(parts[2])
        if not (0 <= src < g.n and 0 <= dst < g.n) or src == dst:
            raise ConfigError(f"demand pair {spec!r} out of range")
        b = np.zeros(g.n)
        b[src], b[dst] = 1.0, -1.0
        return b
    raise ConfigError(f"unknown demand spec {spec!r}")


@dataclass
class StatsRow:
    """One line of the graph-statistics table."""

    name: str
    n: int
    m: int
    core_n: int
    core_m: int
    greedy_cycles: int
    greedy_fraction: float
    largest_cycle: int

    def __post_init__(self):
        assert self.core_n <= self.n
        assert 0.0 <= self.greedy_fraction <= 1.0


def graph_stats(g: Graph, t: SpanningTree, greedy: CycleSet, name: str = "",
                original: tuple[int, int] | None = None) -> StatsRow:
    """Summary statistics of a (pruned) graph under a tree and greedy set.

    `original` supplies the pre-pruning (n, m); it defaults to the working
    graph's own counts.
    """
    tau = 0.0
    largest = 0
    for eid in range(g.m):
        if t.in_tree[eid]:
            continue
        length = len(tree_path(g, t, int(g.eu[eid]), int(g.ev[eid]))) + 1
        largest = max(largest, length)
        tau += edge_stretch(g, t, eid)[1]
    greedy_mass = float(np.sum(greedy.weights)) if len(greedy) else 0.0
    total = tau + greedy_mass
    fraction = greedy_mass / total if total > 0 else 0.0
    orig_n, orig_m = original if original is not None else (g.n, g.m)
    return StatsRow(name, orig_n, orig_m, g.n, g.m, len(greedy), fraction, largest)


def compute_stats(source: str, unweighted: bool = True, tree: str = "degree-sum",
                  greedy_budget: int = 20) -> StatsRow:
    """Load, prune to the 2-core component, and summarize a graph."""
    g, name = load_graph(source, unweighted)
    core, _ = prune_two_core(g)
    if core.n == 0:
        return StatsRow(name, g.n, g.m, 0, 0, 0, 0.0, 0)
    t = build_tree(core, tree)
    greedy = local_greedy_cycles(core, greedy_budget)
    return graph_stats(core, t, greedy, name, original=(g.n, g.m))


def _canonical_float(x: float) -> float:
    return float(f"{x:.6g}")


def _format_value(column: str, value) -> str:
    if value is None:
        return ""
    if column in _BOOL_COLUMNS:
        return "true" if value else "false"
    if column in _FLOAT_COLUMNS:
        return f"{value:.6g}"
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or CSV_COLUMNS
    out = io.StringIO()
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_format_value(c, row.get(c)) for c in columns) + "\n")
    return out.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    """Parse CSV emitted by rows_to_csv back into typed rows."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        return []
    columns = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        row: dict = {}
        for col, cell in zip(columns, cells):
            if cell == "":
                row[col] = None
            elif col in _INT_COLUMNS:
                row[col] = int(cell)
            elif col in _FLOAT_COLUMNS:
                row[col] = float(cell)
            elif col in _BOOL_COLUMNS:
                row[col] = cell == "true"
            else:
                row[col] = cell
        rows.append(row)
    return rows


def _report_row(cfg: ExperimentConfig, name: str, g: Graph, solver: str,
                cycles_name: str, threads: int, seed: int,
                report: SolveReport) -> dict:
    ledger = report.work
    row = {
        "graph": name, "n": g.n, "m": g.m, "solver": solver, "tree": cfg.tree,
        "cycles": cycles_name, "threads": threads, "seed": seed,
        "mode": cfg.mode, "tol": _canonical_float(cfg.tol),
        "converged": report.converged, "iterations": report.iterations,
        "final_residual": _canonical_float(report.final_residual),
        "final_error": (None if report.final_error is None
                        else _canonical_float(report.final_error)),
        "idle_events": ledger.idle,
    }
    for i in range(4):
        row[f"work_m{i + 1}"] = int(ledger.work[i])
        row[f"psteps_m{i + 1}"] = int(ledger.psteps[i])
    return row


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Run every (cycle set, solver, threads, seed) cell and collect CSV rows.

    Non-converged runs still produce rows. Output is deterministic for a
    fixed config: canonical loop order, seeded generators, and 6
    significant digits on floats.
    """
    g, name = load_graph(cfg.graph, cfg.unweighted)
    if cfg.prune:
        g, _ = prune_two_core(g)
    if g.n == 0:
        raise ConfigError("graph pruned to the empty 2-core; nothing to solve")
    if cfg.name:
        name = cfg.name
    tree = build_tree(g, cfg.tree)

    rows = []
    row_cache: dict[tuple, SolveReport] = {}
    for cycles_name in cfg.cycles:
        cs = build_cycles(g, tree, cycles_name, cfg.greedy_budget)
        for solver in cfg.solvers:
            for threads in cfg.threads:
                for seed in cfg.seeds:
                    b = make_demand(g, cfg.demand, seed)
                    reference = reference_solution(g, b) if cfg.mode == "actual" else None
                    scfg = SolveConfig(tolerance=cfg.tol, mode=cfg.mode,
                                       check_interval=cfg.check_interval,
                                       max_iterations=cfg.max_iter, seed=seed,
                                       reference=reference)
                    if solver == "drk":
                        if threads == 1:
                            report = drk_solve(g, tree, cs, b, scfg)
                        else:
                            report = parallel_drk_simulate(g, tree, cs, b, threads, scfg)
                    elif solver == "facial-sweep":
                        if any(c.kind != "facial" for c in cs.cycles):
                            raise ConfigError(
                                "facial-sweep requires cycles=facial[:levels]")
                        report = facial_sweep_solve(g, cs, b, scfg)
                    elif solver in ("prk", "pcg"):
                        key = (solver, seed)  # row solvers ignore threads/cycles
                        if key not in row_cache:
                            row_cache[key] = (prk_solve if solver == "prk"
                                              else pcg_solve)(g, b, scfg)
                        report = row_cache[key]
                    else:
                        raise ConfigError(f"unknown solver {solver!r}")
                    rows.append(_report_row(cfg, name, g, solver, cycles_name,
                                            threads, seed, report))
    if cfg.out:
        Path(cfg.out).write_text(rows_to_csv(rows))
    return rows


RATIO_COLUMNS = ["graph", "cycles", "tree", "threads", "seed", "baseline",
                 "ratio_m1", "ratio_m2", "ratio_m3", "ratio_m4"]


def work_ratio_report(rows: list[dict], baseline: str) -> list[dict]:
    """Per-metric work of each drk row divided by its baseline row's work.

    Rows pair on (graph, seed, threads, mode, tol); a drk row without a
    matching baseline row is an error.
    """
    base_rows: dict[tuple, dict] = {}
    for row in rows:
        if row["solver"] == baseline:
            key = (row["graph"], row["seed"], row["threads"], row["mode"], row["tol"])
            base_rows.setdefault(key, row)
    out = []
    for row in rows:
        if row["solver"] != "drk":
            continue
        key = (row["graph"], row["seed"], row["threads"], row["mode"], row["tol"])
        if key not in base_rows:
            raise ValueError(f"no {baseline} row pairs with drk row {key}")
        base = base_rows[key]
        ratio_row = {"graph": row["graph"], "cycles": row["cycles"],
                     "tree": row["tree"], "threads": row["threads"],
                     "seed": row["seed"], "baseline": baseline}
        for i in range(1, 5):
            denom = base[f"work_m{i}"]
            ratio_row[f"ratio_m{i}"] = (float("inf") if denom == 0
                                        else _canonical_float(row[f"work_m{i}"] / denom))
        out.append(ratio_row)
    return out


RATIO_FLOATS = {"ratio_m1", "ratio_m2", "ratio_m3", "ratio_m4"}


def ratio_rows_to_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    out.write(",".join(RATIO_COLUMNS) + "\n")
    for row in rows:
        cells = []
        for c in RATIO_COLUMNS:
            v = row.get(c)
            cells.append(f"{v:.6g}" if c in RATIO_FLOATS else str(v))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def stats_to_csv(row: StatsRow) -> str:
    header = "graph,n,m,core_n,core_m,greedy_cycles,greedy_fraction,largest_cycle"
    body = (f"{row.name},{row.n},{row.m},{row.core_n},{row.core_m},"
            f"{row.greedy_cycles},{row.greedy_fraction:.6g},{row.largest_cycle}")
    return header + "\n" + body + "\n"
