"""Exact and approximate tours, spanning trees, and the tree-based allocation.

Every tour or tree visits a coalition of players plus the depot (node 0).
Reported costs are correctly rounded sums of the arc/edge weights: the dynamic
program carries compensated (two-float) partial sums, so equal-cost routes
compare equal no matter how the additions associate, and the lexicographic
tie-breaks reproduce across platforms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import fsum, inf

from .coalitions import Allocation, Coalition
from .errors import AsymmetricMatrixError, CapacityError, EmptyCoalitionError
from .metric import DistanceMatrix

CAP_EXACT = 16       # exact tours: O(2^k * k^2) time, O(2^k * k) memory
CAP_BRUTEFORCE = 9   # permutation scan: O(k! * k)


@dataclass(frozen=True)
class Tour:
    """Closed route (0, p1, ..., pk, 0) and its correctly rounded cost."""

    order: tuple[int, ...]
    cost: float


@dataclass(frozen=True)
class SpanningTree:
    """Tree edges over the coalition plus depot, as (u, v) pairs with u < v."""

    edges: frozenset[tuple[int, int]]
    parents: tuple[tuple[int, int], ...]   # (node, parent) pairs, depot-rooted
    cost: float


def tour_cost(m: DistanceMatrix, order: tuple[int, ...] | list[int]) -> float:
    """Exactly rounded sum of consecutive arc distances along order."""
    d = m.entries
    return fsum(float(d[order[i], order[i + 1]]) for i in range(len(order) - 1))


# ---------------------------------------------------------------------------
# compensated (two-float) accumulation helpers

def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    t = s - a
    return s, (a - (s - t)) + (b - t)


def _members_or_raise(m: DistanceMatrix, s: Coalition, cap: int, what: str) -> list[int]:
    if s.n != m.n:
        raise ValueError(f"coalition is over {s.n} players, matrix has {m.n}")
    members = list(s.members())
    if not members:
        raise EmptyCoalitionError(f"{what} undefined for the empty coalition")
    if len(members) > cap:
        raise CapacityError(f"{what} capped at {cap} players, got {len(members)}")
    return members


def tsp_exact(m: DistanceMatrix, s: Coalition) -> Tour:
    """Cheapest closed route through the coalition, by bitmask dynamic program.

    Among all minimum-cost routes the lexicographically smallest visiting
    order is returned.  Works for asymmetric matrices; capped at CAP_EXACT
    players.
    """
    members = _members_or_raise(m, s, CAP_EXACT, "exact tour")
    k = len(members)
    d = m.entries
    if k == 1:
        order = (0, members[0], 0)
        return Tour(order, tour_cost(m, order))

    dist = [[float(d[a, b]) for b in members] for a in members]
    to_depot = [float(d[a, 0]) for a in members]
    from_depot = [float(d[0, a]) for a in members]

    # rest_hi/lo[mask*k + p] = cost of the cheapest walk that starts at member p,
    # visits exactly the members in mask (p not in mask), and ends at the depot.
    size = 1 << k
    rest_hi = [0.0] * (size * k)
    rest_lo = [0.0] * (size * k)
    for p in range(k):
        rest_hi[p] = to_depot[p]
    for mask in range(1, size):
        bits = []
        mm = mask
        while mm:
            bits.append((mm & -mm).bit_length() - 1)
            mm &= mm - 1
        base = mask * k
        for p in range(k):
            if (mask >> p) & 1:
                continue
            row = dist[p]
            best_hi = inf
            best_lo = 0.0
            for q in bits:
                sub = (mask ^ (1 << q)) * k + q
                a = rest_hi[sub]
                x = row[q]
                sm = a + x
                t = sm - a
                e = (a - (sm - t)) + (x - t) + rest_lo[sub]
                hi = sm + e
                lo = e - (hi - sm)
                if hi < best_hi or (hi == best_hi and lo < best_lo):
                    best_hi = hi
                    best_lo = lo
            rest_hi[base + p] = best_hi
            rest_lo[base + p] = best_lo

    # Greedy front reconstruction: at each step keep the smallest member whose
    # completion cost attains the minimum (exact two-float comparisons).
    order = [0]
    mask = size - 1
    row = from_depot
    while mask:
        best_hi = inf
        best_lo = 0.0
        pick = -1
        mm = mask
        while mm:
            q = (mm & -mm).bit_length() - 1
            mm &= mm - 1
            sub = (mask ^ (1 << q)) * k + q
            a = rest_hi[sub]
            x = row[q]
            sm = a + x
            t = sm - a
            e = (a - (sm - t)) + (x - t) + rest_lo[sub]
            hi = sm + e
            lo = e - (hi - sm)
            if hi < best_hi or (hi == best_hi and lo < best_lo):
                best_hi = hi
                best_lo = lo
                pick = q
        order.append(members[pick])
        mask ^= 1 << pick
        row = dist[pick]
    order.append(0)
    return Tour(tuple(order), tour_cost(m, order))


def tsp_bruteforce(m: DistanceMatrix, s: Coalition) -> Tour:
    """Reference oracle: scan every visiting order, keep the first minimum.

    Costs accumulate in the same compensated two-float form the dynamic
    program uses, so the two oracles share one comparator: ties are exact
    real-cost ties, and scanning permutations in lexicographic order with a
    strict improvement test resolves them to the lexicographically smallest
    optimal order, the same rule tsp_exact follows.
    """
    members = _members_or_raise(m, s, CAP_BRUTEFORCE, "brute-force tour")
    d = m.entries.tolist()
    row0 = d[0]
    best_hi = inf
    best_lo = 0.0
    best_order: tuple[int, ...] | None = None
    for perm in itertools.permutations(members):
        hi = row0[perm[0]]
        lo = 0.0
        prev = perm[0]
        pruned = False
        for node in perm[1:]:
            x = d[prev][node]
            sm = hi + x
            t = sm - hi
            e = (hi - (sm - t)) + (x - t) + lo
            hi = sm + e
            lo = e - (hi - sm)
            # arcs are nonnegative, so a partial sum at or above the incumbent
            # can never end strictly below it
            if hi > best_hi or (hi == best_hi and lo >= best_lo):
                pruned = True
                break
            prev = node
        if pruned:
            continue
        x = d[prev][0]
        sm = hi + x
        t = sm - hi
        e = (hi - (sm - t)) + (x - t) + lo
        hi = sm + e
        lo = e - (hi - sm)
        if hi < best_hi or (hi == best_hi and lo < best_lo):
            best_hi = hi
            best_lo = lo
            best_order = perm
    assert best_order is not None
    route = (0,) + best_order + (0,)
    return Tour(route, tour_cost(m, route))


def tsp_cost_table(m: DistanceMatrix) -> list[float]:
    """Optimal tour cost for every nonempty coalition at once.

    One forward dynamic program over all player subsets; entry [mask] is the
    cost for that coalition (entry [0] is 0 and unused).  Costs are correctly
    rounded, hence bit-identical to tsp_exact on each coalition.
    """
    n = m.n
    if n > CAP_EXACT:
        raise CapacityError(f"full tour table capped at {CAP_EXACT} players, got {n}")
    d = m.entries
    dist = [[float(d[a, b]) for b in range(n + 1)] for a in range(n + 1)]
    size = 1 << n

    # reach_hi/lo[mask*n + p] = cheapest walk depot -> exactly the players in
    # mask, ending at player p+1 (p+1 must be in mask).
    reach_hi = [0.0] * (size * n)
    reach_lo = [0.0] * (size * n)
    row0 = dist[0]
    for p in range(n):
        reach_hi[(1 << p) * n + p] = row0[p + 1]

    table = [0.0] * size
    for mask in range(1, size):
        bits = []
        mm = mask
        while mm:
            bits.append((mm & -mm).bit_length() - 1)
            mm &= mm - 1
        base = mask * n
        best_hi = inf
        best_lo = 0.0
        for p in bits:
            sub_mask = mask ^ (1 << p)
            if sub_mask:
                col = p + 1
                best_phi = inf
                best_plo = 0.0
                sb = sub_mask * n
                for q in bits:
                    if q == p:
                        continue
                    a = reach_hi[sb + q]
                    x = dist[q + 1][col]
                    sm = a + x
                    t = sm - a
                    e = (a - (sm - t)) + (x - t) + reach_lo[sb + q]
                    hi = sm + e
                    lo = e - (hi - sm)
                    if hi < best_phi or (hi == best_phi and lo < best_plo):
                        best_phi = hi
                        best_plo = lo
                reach_hi[base + p] = best_phi
                reach_lo[base + p] = best_plo
            # close the route back to the depot
            a = reach_hi[base + p]
            x = dist[p + 1][0]
            sm = a + x
            t = sm - a
            e = (a - (sm - t)) + (x - t) + reach_lo[base + p]
            hi = sm + e
            lo = e - (hi - sm)
            if hi < best_hi or (hi == best_hi and lo < best_lo):
                best_hi = hi
                best_lo = lo
        table[mask] = best_hi + best_lo
    return table


# ---------------------------------------------------------------------------
# spanning trees

def mst(m: DistanceMatrix, s: Coalition) -> SpanningTree:
    """Minimum spanning tree over the coalition plus depot (Prim from the depot).

    Only defined for symmetric matrices; asymmetric input is refused, never
    symmetrized.  Equal-weight choices prefer the lexicographically smaller
    edge, so the tree is deterministic.
    """
    if not m.symmetric:
        raise AsymmetricMatrixError("spanning trees require a symmetric matrix")
    members = _members_or_raise(m, s, m.n, "spanning tree")
    d = m.entries
    nodes = [0] + members
    k = len(nodes)
    in_tree = [False] * k
    in_tree[0] = True
    best_w = [float(d[0, v]) for v in nodes]
    best_parent = [0] * k
    edges: list[tuple[int, int]] = []
    parents: list[tuple[int, int]] = []
    weights: list[float] = []
    for _ in range(k - 1):
        pick = -1
        pick_key: tuple[float, int, int] | None = None
        for idx in range(1, k):
            if in_tree[idx]:
                continue
            u, v = best_parent[idx], nodes[idx]
            key = (best_w[idx], min(u, v), max(u, v))
            if pick_key is None or key < pick_key:
                pick_key = key
                pick = idx
        assert pick >= 0 and pick_key is not None
        in_tree[pick] = True
        u, v = best_parent[pick], nodes[pick]
        edges.append((min(u, v), max(u, v)))
        parents.append((nodes[pick], best_parent[pick]))
        weights.append(best_w[pick])
        for idx in range(1, k):
            if in_tree[idx]:
                continue
            w = float(d[nodes[pick], nodes[idx]])
            a, b = min(nodes[pick], nodes[idx]), max(nodes[pick], nodes[idx])
            cu, cv = best_parent[idx], nodes[idx]
            if (w, a, b) < (best_w[idx], min(cu, cv), max(cu, cv)):
                best_w[idx] = w
                best_parent[idx] = nodes[pick]
    return SpanningTree(frozenset(edges), tuple(sorted(parents)), fsum(weights))


def double_tree_tour(m: DistanceMatrix, s: Coalition) -> Tour:
    """Tree-doubling 2-approximate tour: depth-first preorder of the MST.

    Children are visited in ascending node order; repeated nodes of the
    doubled walk are shortcut by first appearance, which is exactly what the
    preorder gives.
    """
    tree = mst(m, s)
    children: dict[int, list[int]] = {}
    for node, parent in tree.parents:
        children.setdefault(parent, []).append(node)
    order = [0]
    stack = sorted(children.get(0, []), reverse=True)
    while stack:
        v = stack.pop()
        order.append(v)
        for c in sorted(children.get(v, []), reverse=True):
            stack.append(c)
    order.append(0)
    return Tour(tuple(order), tour_cost(m, order))


def bird_allocation(m: DistanceMatrix) -> Allocation:
    """Each player pays its parent edge in the depot-rooted MST of everybody.

    The payments add up to exactly the tree cost.
    """
    tree = mst(m, Coalition.full(m.n))
    d = m.entries
    pay = [0.0] * m.n
    for node, parent in tree.parents:
        pay[node - 1] = float(d[min(node, parent), max(node, parent)])
    return Allocation(tuple(pay))
