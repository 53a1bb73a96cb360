"""Laplacian cycle lab: cycle-space Kaczmarz solvers and work-model experiments."""

from .cycles import (Cycle, CycleSet, Sampler, build_sampler, cycle_closure_defect,
                     extend_cycle_set, facial_cycles, fundamental_cycles,
                     local_greedy_cycles, truncated_bfs)
from .graph import (Graph, MatrixMarketError, grid_graph, laplacian_apply,
                    laplacian_csr, parse_matrix_market, prune_two_core,
                    relative_residual, symmetrize, validate_demand,
                    write_matrix_market)
from .harness import (ConfigError, ExperimentConfig, StatsRow, compute_stats,
                      graph_stats, load_graph, make_demand, parse_config,
                      run_experiment, work_ratio_report)
from .parallel import SimReport, parallel_drk_simulate, select_round, speedup_table
from .solvers import (FlowState, SolveConfig, SolveReport, cycle_project,
                      cycle_voltage, drk_solve, facial_sweep_solve, init_tree_flow,
                      kaczmarz_row_project, pcg_solve, prk_solve,
                      recover_potentials, reference_solution)
from .trees import (SpanningTree, bfs_tree, degree_sum_tree, edge_stretch, h_tree,
                    tree_condition_number, tree_path)
from .work import METRICS, CostMetric, WorkLedger, cost_vector, cycle_cost

__version__ = "0.1.0"
