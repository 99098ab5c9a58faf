"""Linear programs for core- and semicore-style stability of a cost game.

Two constraint families are supported: "core" (every proper nonempty
coalition may object) and "semicore" (only single players and
everybody-but-one coalitions).  Relief can be bought either by lowering the
grand coalition's bill (cost of stability) or by relaxing each objection by a
weighted epsilon (strong / weak / cost-proportional weights).

Sign conventions differ by family.  Core-family payments are nonnegative:
every player is charged.  Semicore-family payments are unrestricted in sign:
a player whose absence would barely change the bill may be handed a rebate so
that the everybody-but-one groups stay whole.  Without rebates the
closed-form subsidy and slack values would not be attainable on games where
some marginal cost falls below the optimal relief.

Every returned witness is re-verified against its constraint set before it
leaves this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .coalitions import Allocation, Coalition
from .errors import CapacityError, DegenerateGameError, LpError
from .games import TOL_LP, CostGame

MAX_LP_ROWS = (1 << 16) + 32

FAMILY_CORE = "core"
FAMILY_SEMICORE = "semicore"
WEIGHT_STRONG = "strong"
WEIGHT_WEAK = "weak"
WEIGHT_COST = "cost"


@dataclass(frozen=True)
class LpSolution:
    value: float
    x: tuple[float, ...]


def lp_minimize(c: Sequence[float], a_ub: np.ndarray | None, b_ub: Sequence[float] | None,
                a_eq: np.ndarray | None = None, b_eq: Sequence[float] | None = None,
                bounds: Sequence[tuple[float | None, float | None]] | None = None
                ) -> LpSolution:
    """Minimize c @ x over a bounded feasible polytope; deterministic solver.

    Infeasible or unbounded outcomes raise LpError: the models built here are
    feasible and bounded by construction, so those statuses signal a bug.
    """
    rows = (0 if a_ub is None else len(a_ub)) + (0 if a_eq is None else len(a_eq))
    if rows > MAX_LP_ROWS:
        raise CapacityError(f"LP limited to {MAX_LP_ROWS} rows, got {rows}")
    if bounds is None:
        bounds = [(0.0, None)] * len(c)
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise LpError(f"LP solve failed (status {res.status}: {res.message})")
    return LpSolution(float(res.fun), tuple(float(v) for v in res.x))


def family_masks(n: int, family: str) -> list[int]:
    """Coalition masks of the constraint family, in ascending mask order."""
    full = (1 << n) - 1
    if family == FAMILY_CORE:
        return list(range(1, full))
    if family == FAMILY_SEMICORE:
        masks = {1 << i for i in range(n)} | {full ^ (1 << i) for i in range(n)}
        masks.discard(full)  # n = 1 edge case
        return sorted(masks)
    raise ValueError(f"unknown constraint family {family!r}")


def _family_costs(game: CostGame, family: str) -> tuple[list[int], list[float]]:
    masks = family_masks(game.n, family)
    if family == FAMILY_CORE:
        table = game.all_costs()  # enforces the table cap
        return masks, [table[mask] for mask in masks]
    return masks, [game.cost(Coalition(mask, game.n)) for mask in masks]


def _indicator_matrix(masks: Iterable[int], n: int) -> np.ndarray:
    arr = np.fromiter(masks, dtype=np.int64)
    return ((arr[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _weights(masks: list[int], costs: list[float], weight: str) -> np.ndarray:
    if weight == WEIGHT_STRONG:
        return np.ones(len(masks))
    if weight == WEIGHT_WEAK:
        return np.array([bin(mask).count("1") for mask in masks], dtype=float)
    if weight == WEIGHT_COST:
        return np.array(costs, dtype=float)
    raise ValueError(f"unknown weight {weight!r}")


@dataclass(frozen=True)
class StabilityResult:
    """Outcome of one stability computation.

    value is the optimal relief (an epsilon, or the coverage ratio alpha for
    the ratio concept); status is "already-stable" when no relief was needed,
    "stabilized" otherwise.
    """

    concept: str
    family: str
    weight: str | None
    value: float
    alpha: float | None
    witness: Allocation
    status: str

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "family": self.family,
            "weight": self.weight,
            "value": self.value,
            "alpha": self.alpha,
            "witness": self.witness.as_list(),
            "status": self.status,
        }


def verify_allocation(game: CostGame, witness: Allocation, family: str,
                      weight: str | None, relief: float, reduce_grand: bool,
                      tol: float = TOL_LP) -> None:
    """Re-check a witness against its constraint set; raises LpError on failure."""
    if witness.n != game.n:
        raise LpError("witness length does not match the player count")
    masks, costs = _family_costs(game, family)
    x = np.array(witness.payments)
    lhs = _indicator_matrix(masks, game.n) @ x
    slack = np.zeros(len(masks)) if reduce_grand else _weights(masks, costs, weight or WEIGHT_STRONG) * relief
    worst = float(np.max(lhs - np.array(costs) - slack)) if masks else 0.0
    if worst > tol:
        raise LpError(f"witness violates a constraint by {worst:.3g}")
    target = game.grand_cost() - (relief if reduce_grand else 0.0)
    gap = abs(witness.total() - target)
    if gap > tol:
        raise LpError(f"witness misses the efficiency target by {gap:.3g}")


def _relief_lp(game: CostGame, concept: str, family: str, weight: str | None,
               reduce_grand: bool, tol: float) -> StabilityResult:
    n = game.n
    grand = game.grand_cost()
    masks, costs = _family_costs(game, family)
    a_ub = np.zeros((len(masks), n + 1))
    a_ub[:, :n] = _indicator_matrix(masks, n)
    if not reduce_grand:
        a_ub[:, n] = -_weights(masks, costs, weight or WEIGHT_STRONG)
    a_eq = np.ones((1, n + 1))
    if not reduce_grand:
        a_eq[0, n] = 0.0
    c_obj = np.zeros(n + 1)
    c_obj[n] = 1.0
    pay_bound = (None, None) if family == FAMILY_SEMICORE else (0.0, None)
    bounds = [pay_bound] * n + [(0.0, None)]
    sol = lp_minimize(c_obj, a_ub, costs, a_eq, [grand], bounds)
    value = max(0.0, sol.value)
    witness = Allocation(sol.x[:n])
    verify_allocation(game, witness, family, weight, value, reduce_grand, tol)
    alpha = None
    if reduce_grand and family == FAMILY_CORE and grand - value > tol:
        alpha = grand / (grand - value)
    return StabilityResult(
        concept=concept, family=family, weight=weight, value=value, alpha=alpha,
        witness=witness, status="already-stable" if value <= tol else "stabilized")


def cost_of_stability(game: CostGame, tol: float = TOL_LP) -> StabilityResult:
    """Least reduction of the grand bill under which no proper coalition objects."""
    return _relief_lp(game, "cos", FAMILY_CORE, None, True, tol)


def optimal_eps_core(game: CostGame, weight: str = WEIGHT_STRONG,
                     tol: float = TOL_LP) -> StabilityResult:
    """Least weighted objection slack keeping the full bill (proper coalitions)."""
    if weight not in (WEIGHT_STRONG, WEIGHT_WEAK, WEIGHT_COST):
        raise ValueError(f"unknown weight {weight!r}")
    return _relief_lp(game, "eps-core", FAMILY_CORE, weight, False, tol)


def cost_of_semicore_stability_lp(game: CostGame, tol: float = TOL_LP) -> StabilityResult:
    """Least grand-bill reduction against singleton and everybody-but-one objections.

    Only needs n + 1 coalition costs, so it scales past the full-table cap.
    Witness payments may be negative (rebates allowed in this family).
    """
    if game.n < 2:
        raise ValueError("semicore concepts need at least two players")
    return _relief_lp(game, "coss", FAMILY_SEMICORE, None, True, tol)


def optimal_eps_semicore_lp(game: CostGame, weight: str = WEIGHT_STRONG,
                            tol: float = TOL_LP) -> StabilityResult:
    """Least weighted slack for the singleton / everybody-but-one family.

    Witness payments may be negative (rebates allowed in this family).
    """
    if game.n < 2:
        raise ValueError("semicore concepts need at least two players")
    if weight not in (WEIGHT_STRONG, WEIGHT_WEAK):
        raise ValueError(f"weight must be strong or weak, got {weight!r}")
    return _relief_lp(game, "eps-semicore", FAMILY_SEMICORE, weight, False, tol)


def core_element(game: CostGame, tol: float = TOL_LP) -> Allocation | None:
    """An allocation no proper coalition objects to, or None (decided via cost_of_stability)."""
    result = cost_of_stability(game, tol)
    return result.witness if result.value <= tol else None


def semicore_element(game: CostGame, tol: float = TOL_LP) -> Allocation | None:
    """An allocation passing the singleton and everybody-but-one checks, or None.

    Payments may include rebates (negative entries); see the module notes.
    """
    result = cost_of_semicore_stability_lp(game, tol)
    return result.witness if result.value <= tol else None


def max_total_payment(game: CostGame, tol: float = TOL_LP) -> tuple[float, Allocation]:
    """Largest total chargeable without any coalition paying above its own cost.

    Direct LP: maximize sum(x) subject to x(S) <= cost(S) for every nonempty
    coalition (the grand one included) and x >= 0.
    """
    n = game.n
    grand = game.grand_cost()
    masks, costs = _family_costs(game, FAMILY_CORE)
    a_ub = np.vstack([_indicator_matrix(masks, n), np.ones((1, n))])
    b_ub = list(costs) + [grand]
    sol = lp_minimize(-np.ones(n), a_ub, b_ub)
    value = -sol.value
    witness = Allocation(sol.x)
    lhs = a_ub @ np.array(witness.payments)
    if float(np.max(lhs - np.array(b_ub))) > tol:
        raise LpError("coverage witness violates a cost constraint")
    return value, witness


def optimal_alpha_core(game: CostGame, tol: float = TOL_LP) -> StabilityResult:
    """Smallest cost-coverage ratio alpha such that charging cost(N)/alpha in
    total admits an allocation no coalition objects to.

    Derived from cost_of_stability and cross-checked against the direct
    maximum-payment LP; the two must agree within tolerance.
    """
    grand = game.grand_cost()
    if grand <= 0.0:
        raise DegenerateGameError("coverage ratio undefined for zero grand cost")
    cos_result = cost_of_stability(game, tol)
    if grand - cos_result.value <= tol:
        raise DegenerateGameError("total payments collapse to zero; ratio diverges")
    alpha = grand / (grand - cos_result.value)
    best_total, witness = max_total_payment(game, tol)
    if best_total <= tol:
        raise DegenerateGameError("total payments collapse to zero; ratio diverges")
    alpha_direct = grand / best_total
    if abs(alpha - alpha_direct) > tol * (1.0 + alpha * alpha):
        raise LpError(
            f"ratio cross-check failed: {alpha} vs direct {alpha_direct}")
    return StabilityResult(
        concept="alpha", family=FAMILY_CORE, weight=None, value=alpha, alpha=alpha,
        witness=witness, status="already-stable" if alpha <= 1.0 + tol else "stabilized")
