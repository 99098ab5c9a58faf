"""Closed-form semicore stability values, the emptiness criterion, and cheap bounds.

The closed formulas assume a subadditive game whose semicore is empty; they
refuse otherwise and point the caller at the LP.  The bounds never need more
than a handful of coalition costs - the cheapest one reads only the depot row
and column of the distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

from . import tsp
from .coalitions import Allocation, Coalition
from .errors import DegenerateGameError, LpError, SemicoreNotEmptyError
from .games import TOL_LP, CostGame, TableGame, TsgGame
from .metric import DistanceMatrix
from .stability import (WEIGHT_STRONG, cost_of_semicore_stability_lp,
                        optimal_eps_semicore_lp)


def semicore_empty_criterion(game: CostGame, tol: float = TOL_LP) -> bool:
    """True when the marginal costs add up to more than the grand cost.

    For subadditive games this is exactly emptiness of the semicore; it needs
    only n + 1 coalition costs and no LP.  Subadditivity is the caller's
    responsibility.
    """
    if game.n < 2:
        raise ValueError("semicore concepts need at least two players")
    return fsum(game.marginal_costs()) > game.grand_cost() + tol


def coss_closed_form(game: CostGame, tol: float = TOL_LP) -> float:
    """Grand cost minus the average everybody-but-one cost.

    Equals the least grand-bill reduction that fills the semicore of a
    subadditive game; only valid when the semicore is empty, otherwise a
    SemicoreNotEmptyError points at cost_of_semicore_stability_lp.
    """
    if not semicore_empty_criterion(game, tol):
        raise SemicoreNotEmptyError(
            "semicore is not empty; use cost_of_semicore_stability_lp (its value is 0)")
    n = game.n
    full = Coalition.full(n)
    dropped = fsum(game.cost(full.without(i)) for i in range(1, n + 1))
    return game.grand_cost() - dropped / (n - 1)


def soes_closed_form(game: CostGame, tol: float = TOL_LP) -> float:
    """Least uniform slack on singleton and everybody-but-one objections.

    Closed form for subadditive games with an empty semicore; equals
    (n-1)/n of the grand cost minus the average everybody-but-one cost
    weighted by 1/n, and relates to the grand-bill reduction by the factor
    n/(n-1).
    """
    if not semicore_empty_criterion(game, tol):
        raise SemicoreNotEmptyError(
            "semicore is not empty; use optimal_eps_semicore_lp (its value is 0)")
    n = game.n
    full = Coalition.full(n)
    dropped = fsum(game.cost(full.without(i)) for i in range(1, n + 1))
    return (n - 1) / n * game.grand_cost() - dropped / n


@dataclass(frozen=True)
class MstBound:
    """Grand-bill reduction certified by a spanning tree: value = tour - tree cost.

    The witness charges every player its tree edge; mst_grand_cost is the tree
    cost the witness adds up to.
    """

    value: float
    witness: Allocation
    mst_grand_cost: float

    def to_dict(self) -> dict:
        return {"value": self.value, "witness": self.witness.as_list(),
                "mst_grand_cost": self.mst_grand_cost}


@dataclass(frozen=True)
class MaxMarginalBound:
    """Grand-bill reduction equal to the largest marginal cost.

    The witness spreads the cheapest everybody-but-one cost proportionally to
    stand-alone costs; max_marginal_player is the dropped player (smallest
    index among ties).
    """

    value: float
    witness: Allocation
    max_marginal_player: int

    def to_dict(self) -> dict:
        return {"value": self.value, "witness": self.witness.as_list(),
                "max_marginal_player": self.max_marginal_player}


def bound_cos_mst(m: DistanceMatrix, tol: float = TOL_LP) -> MstBound:
    """Tour cost minus spanning-tree cost bounds the grand-bill reduction needed
    for full stability; never exceeds half the tour cost on a metric.

    Symmetric matrices only.  The tree allocation witnesses the bound: it
    charges the tree cost in total and no coalition can beat its own tree.
    """
    full = Coalition.full(m.n)
    grand_tour = tsp.tsp_exact(m, full).cost
    tree = tsp.mst(m, full)
    witness = tsp.bird_allocation(m)
    return MstBound(value=grand_tour - tree.cost, witness=witness,
                    mst_grand_cost=tree.cost)


def bound_coss_max_marginal(game: CostGame, tol: float = TOL_LP) -> MaxMarginalBound:
    """The largest marginal cost bounds the grand-bill reduction that fills the
    semicore of a subadditive game; certified by a proportional witness.

    The witness is validated against all 2n semicore constraints here; a
    violation (possible only on non-subadditive input) raises LpError.
    """
    n = game.n
    if n < 2:
        raise ValueError("semicore concepts need at least two players")
    marginals = game.marginal_costs()
    player = 1 + max(range(n), key=lambda i: (marginals[i], -i))
    value = marginals[player - 1]
    irs = game.individual_rationalities()
    total_ir = fsum(irs)
    if total_ir <= 0.0:
        raise DegenerateGameError("all stand-alone costs are zero")
    remaining = game.cost(Coalition.full(n).without(player))
    ratio = remaining / total_ir
    witness = Allocation(tuple(ratio * c for c in irs))
    # check every semicore constraint at the claimed reduction
    full = Coalition.full(n)
    for i in range(1, n + 1):
        if witness.pay(i) > irs[i - 1] + tol:
            raise LpError(f"witness overcharges player {i} (is the game subadditive?)")
        rest = full.without(i)
        if witness.of_coalition(rest) > game.cost(rest) + tol:
            raise LpError(f"witness overcharges the coalition without {i}")
    if abs(witness.total() - (game.grand_cost() - value)) > tol:
        raise LpError("witness misses the reduced grand bill")
    return MaxMarginalBound(value=value, witness=witness, max_marginal_player=player)


def bound_coss_avg_ir(m: DistanceMatrix, tol: float = TOL_LP) -> float:
    """Average the n-1 smallest depot round trips: no tour is ever solved.

    Each player's round trip d[0][j] + d[j][0] caps its stand-alone cost; the
    average over everyone except the most expensive round trip (smallest index
    among ties) bounds the grand-bill reduction that fills an empty semicore.
    """
    n = m.n
    if n < 2:
        raise ValueError("semicore concepts need at least two players")
    d = m.entries
    round_trips = [float(d[0, j]) + float(d[j, 0]) for j in range(1, n + 1)]
    heaviest = max(range(n), key=lambda i: (round_trips[i], -i))
    rest = [round_trips[i] for i in range(n) if i != heaviest]
    return fsum(rest) / (n - 1)


@dataclass(frozen=True)
class BoundsReport:
    """Bounds and exact semicore stability values for one game.

    Matrix-based fields are None when they do not apply (no matrix, or an
    asymmetric matrix for the tree bound).
    """

    cos_mst_bound: MstBound | None
    coss_max_marginal_bound: MaxMarginalBound
    coss_avg_ir_bound: float | None
    exact_coss: float
    exact_soes: float
    semicore_empty: bool

    def to_dict(self) -> dict:
        return {
            "cos_mst_bound": self.cos_mst_bound.to_dict() if self.cos_mst_bound else None,
            "coss_max_marginal_bound": self.coss_max_marginal_bound.to_dict(),
            "coss_avg_ir_bound": self.coss_avg_ir_bound,
            "exact_coss": self.exact_coss,
            "exact_soes": self.exact_soes,
            "semicore_empty": self.semicore_empty,
        }


def bounds_report(game: CostGame, tol: float = TOL_LP) -> BoundsReport:
    """Assemble every applicable bound plus the exact LP values for one game.

    Assumes a subadditive game (always true for tour games over a valid
    metric).  Needs only n + 1 coalition costs, never the full table.
    """
    if game.n < 2:
        raise ValueError("semicore concepts need at least two players")
    matrix = game.matrix if isinstance(game, TsgGame) else None
    mst_bound = None
    avg_ir = None
    if matrix is not None:
        avg_ir = bound_coss_avg_ir(matrix, tol)
        if matrix.symmetric:
            mst_bound = bound_cos_mst(matrix, tol)
    coss = cost_of_semicore_stability_lp(game, tol)
    soes = optimal_eps_semicore_lp(game, WEIGHT_STRONG, tol)
    return BoundsReport(
        cos_mst_bound=mst_bound,
        coss_max_marginal_bound=bound_coss_max_marginal(game, tol),
        coss_avg_ir_bound=avg_ir,
        exact_coss=coss.value,
        exact_soes=soes.value,
        semicore_empty=coss.value > tol,
    )


def inflate_to_empty_semicore(game: CostGame, seed: int | None = None,
                              tol: float = TOL_LP) -> TableGame | None:
    """Raise the grand cost of a subadditive game just enough to empty the
    semicore while staying subadditive; None when no margin exists.

    The inflation must stay below the least cost(S) + cost(T) - cost(N) over
    proper covering pairs and above (cost(N) - sum of marginals) / (n - 1).
    """
    n = game.n
    if n < 3:
        return None
    table = game.all_costs()
    full = (1 << n) - 1
    size = 1 << n
    costs = np.zeros(size)
    for mask, c in table.items():
        costs[mask] = c
    masks = np.arange(1, full)
    slack_min = np.inf
    # pair S with every proper T covering the complement of S
    for s_mask in range(1, full):
        need = full ^ s_mask
        rest = masks[(masks & need) == need]
        if rest.size:
            slack_min = min(slack_min, float(costs[s_mask] + np.min(costs[rest])))
    slack = slack_min - costs[full]
    grand = float(costs[full])
    margins = fsum(table[full ^ (1 << i)] for i in range(n))
    lower = max(0.0, (grand - (n * grand - margins)) / (n - 1))
    if not np.isfinite(slack) or slack <= lower + 1e-6:
        return None
    rng = np.random.default_rng(seed)
    delta = lower + float(rng.uniform(0.3, 0.9)) * (slack - lower)
    new_table = dict(table)
    new_table[full] = grand + delta
    inflated = TableGame(n, new_table)
    if not semicore_empty_criterion(inflated, tol):
        return None
    return inflated


def find_empty_semicore_tsgs(kind: str, n_values: list[int], seeds: list[int],
                             limit: int, tol: float = TOL_LP,
                             ) -> tuple[list[tuple[str, TsgGame]], int]:
    """Rejection-sample tour games whose semicore the criterion declares empty.

    kind is "euclidean" or "asymmetric".  Returns (found games with their
    descriptors, number of instances tried); stops at limit hits.
    """
    from .metric import gen_asymmetric_metric, gen_euclidean

    found: list[tuple[str, TsgGame]] = []
    tried = 0
    for seed in seeds:
        for n in n_values:
            if len(found) >= limit:
                return found, tried
            matrix = (gen_euclidean(n, seed) if kind == "euclidean"
                      else gen_asymmetric_metric(n, seed))
            game = TsgGame(matrix, validate=False)
            tried += 1
            if semicore_empty_criterion(game, tol):
                found.append((f"{kind}-n{n}-s{seed}", game))
    return found, tried
