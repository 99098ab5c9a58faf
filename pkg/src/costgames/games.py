"""Cost games over coalitions: oracle kinds, memoized tables, structural checks.

A cost game assigns every nonempty coalition of players 1..n a nonnegative
cost.  Built-in kinds: explicit tables, optimal-tour games and spanning-tree
games over a distance matrix, and two cost-perturbation wrappers.
"""

from __future__ import annotations

import json
from math import fsum
from pathlib import Path
from typing import Any

import numpy as np

from . import tsp
from .coalitions import Coalition
from .errors import CapacityError, EmptyCoalitionError, MetricError
from .metric import DistanceMatrix, validate_metric

TOL_LP = 1e-7
CAP_TABLE = 16          # full tables hold 2^n - 1 entries
CAP_SUBADDITIVITY = 12  # the pair scan walks (2^n - 1)^2 ordered pairs
GAME_FORMAT = "cost-game/v1"


class CostGame:
    """Coalition -> cost oracle with a memoized table.

    Repeated queries return bit-identical values; the cache tolerates
    concurrent fills because every kind computes deterministically, so two
    workers racing on one coalition store the same number (setdefault keeps a
    single consistent entry).
    """

    kind = "abstract"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"player count must be >= 1, got {n}")
        self.n = n
        self._cache: dict[int, float] = {}

    def _compute(self, s: Coalition) -> float:
        raise NotImplementedError

    def cost(self, s: Coalition) -> float:
        if s.n != self.n:
            raise ValueError(f"coalition is over {s.n} players, game has {self.n}")
        if s.is_empty:
            raise EmptyCoalitionError("cost undefined for the empty coalition")
        cached = self._cache.get(s.mask)
        if cached is not None:
            return cached
        value = self._compute(s)
        return self._cache.setdefault(s.mask, value)

    def grand_cost(self) -> float:
        return self.cost(Coalition.full(self.n))

    def _fill_all(self) -> None:
        for mask in range(1, 1 << self.n):
            if mask not in self._cache:
                self.cost(Coalition(mask, self.n))

    def all_costs(self) -> dict[int, float]:
        """Materialize the full table {mask: cost} over all 2^n - 1 coalitions."""
        if self.n > CAP_TABLE:
            raise CapacityError(f"full cost table capped at n <= {CAP_TABLE}, got n={self.n}")
        self._fill_all()
        return {mask: self._cache[mask] for mask in range(1, 1 << self.n)}

    def individual_rationalities(self) -> list[float]:
        """Stand-alone cost of each player, index i-1 for player i."""
        return [self.cost(Coalition.singleton(i, self.n)) for i in range(1, self.n + 1)]

    def marginal_costs(self) -> list[float]:
        """grand cost minus the cost of everybody-but-i, index i-1 for player i."""
        if self.n < 2:
            raise ValueError("marginal costs need at least two players")
        full = Coalition.full(self.n)
        grand = self.cost(full)
        return [grand - self.cost(full.without(i)) for i in range(1, self.n + 1)]


class TableGame(CostGame):
    """Explicit cost table; every nonempty coalition must be present and >= 0."""

    kind = "table"

    def __init__(self, n: int, costs: dict[int, float]):
        super().__init__(n)
        if n > CAP_TABLE:
            raise CapacityError(f"explicit tables capped at n <= {CAP_TABLE}, got n={n}")
        table: dict[int, float] = {}
        for mask in range(1, 1 << n):
            try:
                value = float(costs[mask])
            except KeyError:
                raise ValueError(f"table is missing coalition mask {mask}") from None
            if not value >= 0.0:
                raise ValueError(f"cost for mask {mask} must be nonnegative, got {value}")
            table[mask] = value
        extra = set(costs) - set(table)
        if extra:
            raise ValueError(f"table has unknown coalition keys: {sorted(extra)[:5]}")
        self._table = table
        self._cache.update(table)

    def _compute(self, s: Coalition) -> float:
        return self._table[s.mask]


class TsgGame(CostGame):
    """Optimal-tour game over a distance matrix (depot at node 0).

    The matrix must be a valid metric, which makes the game subadditive.
    """

    kind = "tsg"

    def __init__(self, matrix: DistanceMatrix, validate: bool = True):
        super().__init__(matrix.n)
        if validate:
            report = validate_metric(matrix)
            if not report.valid:
                first = report.violations[0]
                raise MetricError(
                    f"matrix is not a metric ({len(report.violations)} violations; "
                    f"first: {first[0]} at {first[1]})")
        self.matrix = matrix

    def _compute(self, s: Coalition) -> float:
        return tsp.tsp_exact(self.matrix, s).cost

    def _fill_all(self) -> None:
        # one sweep computes every coalition; values match tsp_exact bit for bit
        table = tsp.tsp_cost_table(self.matrix)
        for mask in range(1, 1 << self.n):
            self._cache.setdefault(mask, table[mask])


class McstGame(CostGame):
    """Spanning-tree game over a symmetric distance matrix."""

    kind = "mcst"

    def __init__(self, matrix: DistanceMatrix):
        super().__init__(matrix.n)
        self.matrix = matrix

    def _compute(self, s: Coalition) -> float:
        return tsp.mst(self.matrix, s).cost


class GrandPerturbedGame(CostGame):
    """Wrapper that lowers the grand coalition's cost by epsilon.

    Proper coalitions keep their base cost; 0 <= epsilon <= base grand cost is
    enforced at construction.  Subadditivity of the base game is preserved.
    """

    kind = "grand-perturbed"

    def __init__(self, base: CostGame, epsilon: float):
        super().__init__(base.n)
        grand = base.grand_cost()
        if not 0.0 <= epsilon <= grand:
            raise ValueError(f"epsilon must lie in [0, {grand}], got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)

    def _compute(self, s: Coalition) -> float:
        c = self.base.cost(s)
        return c - self.epsilon if s.is_full else c

    def _fill_all(self) -> None:
        full = (1 << self.n) - 1
        for mask, c in self.base.all_costs().items():
            self._cache.setdefault(mask, c - self.epsilon if mask == full else c)


class ProperPerturbedGame(CostGame):
    """Wrapper that raises every proper coalition's cost by epsilon >= 0.

    The grand coalition keeps its base cost.  Subadditivity of the base game
    is preserved.
    """

    kind = "proper-perturbed"

    def __init__(self, base: CostGame, epsilon: float):
        super().__init__(base.n)
        if not epsilon >= 0.0:
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)

    def _compute(self, s: Coalition) -> float:
        c = self.base.cost(s)
        return c if s.is_full else c + self.epsilon

    def _fill_all(self) -> None:
        full = (1 << self.n) - 1
        for mask, c in self.base.all_costs().items():
            self._cache.setdefault(mask, c if mask == full else c + self.epsilon)


def is_subadditive(game: CostGame, tol: float = TOL_LP
                   ) -> tuple[bool, tuple[Coalition, Coalition] | None]:
    """Check cost(S) + cost(T) >= cost(S | T) over every ordered pair of
    nonempty coalitions, overlapping pairs included.

    Returns (True, None) or (False, first violating pair in mask order).
    """
    n = game.n
    if n > CAP_SUBADDITIVITY:
        raise CapacityError(
            f"subadditivity scan capped at n <= {CAP_SUBADDITIVITY}, got n={n}")
    table = game.all_costs()
    size = 1 << n
    costs = np.zeros(size)
    for mask, c in table.items():
        costs[mask] = c
    masks = np.arange(size)
    chunk = max(1, (1 << 20) // size)
    for start in range(1, size, chunk):
        rows = masks[start:start + chunk]
        union = rows[:, None] | masks[None, 1:]
        resid = costs[rows][:, None] + costs[None, 1:] - costs[union]
        bad = np.argwhere(resid < -tol)
        if bad.size:
            i, j = bad[0]
            return False, (Coalition(int(rows[i]), n), Coalition(int(j) + 1, n))
    return True, None


def random_subadditive_game(n: int, seed: int,
                            empty_semicore: bool | None = None) -> TableGame:
    """Random explicit-table game that is subadditive by construction.

    Proper coalitions cost the sum of their members' weights plus a shared
    overhead b; the grand coalition additionally pays delta with
    0 <= delta <= b.  Any two coalitions covering everybody then satisfy
    cost(S) + cost(T) >= grand cost, and other pairs only drop the overhead
    once, so the game is subadditive.  The semicore is empty exactly when
    delta > b/(n-1); pass empty_semicore to force either side with a safety
    margin, or None to sample delta freely.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if empty_semicore and n < 3:
        # any subadditive two-player game satisfies c(N) <= c({1}) + c({2}),
        # which already puts a point in the semicore
        raise ValueError("an empty semicore needs n >= 3 under subadditivity")
    rng = np.random.default_rng(seed)
    weights = rng.uniform(1.0, 10.0, size=n)
    b = float(rng.uniform(5.0, 20.0))
    threshold = 1.0 / (n - 1)
    if empty_semicore is None:
        u = float(rng.uniform(0.0, 1.0))
    elif empty_semicore:
        u = float(rng.uniform(threshold + 0.1 * (1.0 - threshold), 1.0))
    else:
        u = float(rng.uniform(0.0, 0.9 * threshold))
    delta = b * u
    costs: dict[int, float] = {}
    full = (1 << n) - 1
    for mask in range(1, full + 1):
        member_sum = fsum(weights[i] for i in range(n) if (mask >> i) & 1)
        costs[mask] = member_sum + b + (delta if mask == full else 0.0)
    return TableGame(n, costs)


def save_game(game: CostGame, path: str | Path) -> Path:
    """Write the full cost table; coalition keys are decimal mask strings."""
    table = game.all_costs()
    doc = {
        "format": GAME_FORMAT,
        "n": game.n,
        "costs": {str(mask): table[mask] for mask in sorted(table)},
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def load_game(path: str | Path) -> TableGame:
    """Read a cost-game file written by save_game (or by hand)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format") != GAME_FORMAT:
        raise ValueError(f"{path}: expected format {GAME_FORMAT!r}")
    try:
        n = int(doc["n"])
        raw: dict[str, Any] = doc["costs"]
        costs = {int(k): float(v) for k, v in raw.items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: missing or malformed fields ({exc})") from exc
    return TableGame(n, costs)
