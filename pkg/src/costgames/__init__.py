"""Stability toolkit for subadditive cost games.

Cost oracles: optimal tours and spanning trees over a distance matrix (depot
at node 0), explicit tables, and perturbation wrappers.  Stability concepts:
core-family and semicore-family LPs, closed forms, and certified bounds.
"""

from .coalitions import Allocation, Coalition
from .errors import (AsymmetricMatrixError, CapacityError, CostGamesError,
                     DegenerateGameError, EmptyCoalitionError,
                     EmptyInstanceError, LpError, MetricError,
                     SemicoreNotEmptyError, ShapeError)
from .games import (CAP_SUBADDITIVITY, CAP_TABLE, TOL_LP, CostGame,
                    GrandPerturbedGame, McstGame, ProperPerturbedGame,
                    TableGame, TsgGame, is_subadditive, load_game,
                    random_subadditive_game, save_game)
from .metric import (TOL_METRIC, DistanceMatrix, ValidationReport,
                     gen_asymmetric_metric, gen_euclidean, load_instance,
                     metric_closure, save_instance, validate_metric)
from .semicore import (BoundsReport, MaxMarginalBound, MstBound,
                       bound_cos_mst, bound_coss_avg_ir,
                       bound_coss_max_marginal, bounds_report,
                       coss_closed_form, find_empty_semicore_tsgs,
                       inflate_to_empty_semicore, semicore_empty_criterion,
                       soes_closed_form)
from .stability import (FAMILY_CORE, FAMILY_SEMICORE, WEIGHT_COST,
                        WEIGHT_STRONG, WEIGHT_WEAK, LpSolution,
                        StabilityResult, core_element, cost_of_stability,
                        cost_of_semicore_stability_lp, family_masks,
                        lp_minimize, max_total_payment, optimal_alpha_core,
                        optimal_eps_core, optimal_eps_semicore_lp,
                        semicore_element, verify_allocation)
from .tsp import (CAP_BRUTEFORCE, CAP_EXACT, SpanningTree, Tour,
                  bird_allocation, double_tree_tour, mst, tour_cost,
                  tsp_bruteforce, tsp_cost_table, tsp_exact)

__version__ = "0.1.0"
