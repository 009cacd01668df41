"""Update scheduling under decaying efficacy with entry shocks and downtime.

Exact (Delta-P) and linearised (Delta-L) two-parameter Dinkelbach solvers over a
candidate-time DAG, static baselines, a brute-force oracle and a myopic wait rule.
"""

from .baselines import ActionClass, classify_actions, fixed_interval_schedule, zero_wait_schedule
from .dag import CandidateGrid, Dag, GridConfig, build_candidate_times, build_dag, refine_grid
from .efficacy import PathStats, Schedule, evaluate, integrate_efficacy, objective_J, schedule_stats
from .environment import DecayParams, EnvType, Environment, ScenarioSpec, Segment, build_environment, sample_environment
from .oracle import brute_force_best
from .pareto import pareto_frontier_dp
from .shortterm import MyopicProblem, optimal_wait, should_update_now
from .solvers import DinkelbachConfig, SolveResult, SolverKind, delta_l, delta_p, solve

__version__ = "0.1.0"
