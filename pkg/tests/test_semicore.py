"""Closed forms, the emptiness criterion, constructive bounds, inflation."""
from __future__ import annotations

from fractions import Fraction
from math import fsum

import pytest

import costgames.semicore as semicore_mod
from costgames import (Coalition, LpError, SemicoreNotEmptyError, TableGame,
                       TsgGame, bound_coss_avg_ir, bound_coss_max_marginal,
                       bound_cos_mst, bounds_report, coss_closed_form,
                       cost_of_semicore_stability_lp, cost_of_stability,
                       find_empty_semicore_tsgs, gen_asymmetric_metric,
                       gen_euclidean, inflate_to_empty_semicore,
                       is_subadditive, optimal_eps_semicore_lp,
                       random_subadditive_game, semicore_element,
                       semicore_empty_criterion, soes_closed_form)
from exactlp import exact_relief, masks_semicore


def test_criterion_is_sum_of_marginals_vs_grand(g3):
    # G3: marginals 5+5+5 = 15 > 10
    assert semicore_empty_criterion(g3)
    cheap = TableGame(3, {1: 6.0, 2: 6.0, 4: 6.0,
                          3: 5.0, 5: 5.0, 6: 5.0, 7: 5.0})
    assert not semicore_empty_criterion(cheap)


def test_closed_forms_equal_exact_lp_as_fractions():
    """The two closed forms are exact identities, so converting the float
    costs to rationals and running the exact simplex must reproduce them
    with zero error, not merely within a tolerance."""
    for seed in range(25):
        n = 3 + seed % 3
        game = random_subadditive_game(n, seed=seed, empty_semicore=True)
        costs = {m: Fraction(c) for m, c in game.all_costs().items()}
        full = (1 << n) - 1
        drops = [costs[full ^ (1 << i)] for i in range(n)]
        coss_frac = costs[full] - sum(drops) / (n - 1)
        soes_frac = (Fraction(n - 1, n) * costs[full]
                     - sum(drops, Fraction(0)) / n)
        assert exact_relief(costs, n, masks_semicore(n), None, True,
                            free_x=True) == coss_frac
        assert exact_relief(costs, n, masks_semicore(n), "strong", False,
                            free_x=True) == soes_frac
        assert coss_frac == Fraction(n, n - 1) * soes_frac
        assert coss_closed_form(game) == pytest.approx(float(coss_frac),
                                                       abs=1e-12)
        assert soes_closed_form(game) == pytest.approx(float(soes_frac),
                                                       abs=1e-12)


def test_closed_forms_refuse_nonempty_semicore():
    game = random_subadditive_game(4, seed=3, empty_semicore=False)
    with pytest.raises(SemicoreNotEmptyError):
        coss_closed_form(game)
    with pytest.raises(SemicoreNotEmptyError):
        soes_closed_form(game)


def test_criterion_agrees_with_lp_element(mixed_subadditive_500):
    for game in mixed_subadditive_500[:150]:
        empty = semicore_empty_criterion(game)
        assert empty == (semicore_element(game) is None)


def test_max_marginal_bound_on_g3(g3):
    b = bound_coss_max_marginal(g3)
    assert b.value == 5.0
    assert b.max_marginal_player == 1          # tie broken to smallest index
    assert b.witness.as_list() == pytest.approx([5 / 3] * 3, abs=1e-12)
    assert cost_of_semicore_stability_lp(g3).value <= b.value + 1e-9


def test_max_marginal_tie_breaks_to_smallest_index():
    costs = {1: 4.0, 2: 4.0, 4: 1.0,
             3: 5.0, 5: 4.5, 6: 4.5, 7: 6.0}
    game = TableGame(3, costs)
    # marginals: 6-4.5, 6-4.5, 6-5 -> players 1 and 2 tie at 1.5
    b = bound_coss_max_marginal(game)
    assert b.max_marginal_player == 1


def test_max_marginal_witness_satisfies_all_constraints():
    for seed in range(15):
        n = 3 + seed % 5
        game = random_subadditive_game(n, seed=40 + seed, empty_semicore=True)
        b = bound_coss_max_marginal(game)
        x = b.witness
        full = (1 << n) - 1
        for i in range(1, n + 1):
            assert x.pay(i) <= game.cost(Coalition(1 << (i - 1), n)) + 1e-9
            drop = Coalition(full ^ (1 << (i - 1)), n)
            assert x.of_coalition(drop) <= game.cost(drop) + 1e-9
        assert x.total() == pytest.approx(game.grand_cost() - b.value,
                                          abs=1e-9)


def test_avg_ir_bound_uses_no_tour_solver(monkeypatch):
    """The average-round-trip bound must be computable without ever
    pricing a tour; poisoning both solvers proves the claim."""
    m = gen_euclidean(7, seed=5)

    def boom(*a, **k):
        raise AssertionError("tour solver invoked on the no-solve path")

    monkeypatch.setattr("costgames.tsp.tsp_exact", boom)
    monkeypatch.setattr("costgames.tsp.tsp_cost_table", boom)
    value = bound_coss_avg_ir(m)
    assert value > 0.0


def test_avg_ir_bound_value_on_collinear(collinear_matrix):
    # round trips: 2, 4, 6; drop the heaviest, average the rest
    assert bound_coss_avg_ir(collinear_matrix) == pytest.approx(3.0, abs=1e-12)


def test_avg_ir_dominates_exact_coss_on_inflated_tsgs():
    checked = 0
    seed = 0
    while checked < 20 and seed < 200:
        n = 4 + seed % 4
        kind = gen_euclidean if seed % 2 == 0 else gen_asymmetric_metric
        m = kind(n, seed)
        w = inflate_to_empty_semicore(TsgGame(m, validate=False), seed=seed)
        seed += 1
        if w is None:
            continue
        coss = cost_of_semicore_stability_lp(w).value
        assert coss <= bound_coss_avg_ir(m) + 1e-9
        checked += 1
    assert checked == 20


def test_mst_bound_on_collinear(collinear_matrix):
    b = bound_cos_mst(collinear_matrix)
    grand = 6.0
    assert b.value == pytest.approx(3.0, abs=1e-12)           # 6 - 3
    assert b.value <= 0.5 * grand + 1e-12
    assert b.witness.as_list() == [1.0, 1.0, 1.0]
    assert b.mst_grand_cost == 3.0
    game = TsgGame(collinear_matrix)
    assert cost_of_stability(game).value <= b.value + 1e-9


def test_mst_bound_refuses_asymmetric():
    from costgames import AsymmetricMatrixError
    with pytest.raises(AsymmetricMatrixError):
        bound_cos_mst(gen_asymmetric_metric(4, seed=1))


def test_bounds_report_shapes(g3):
    rep = bounds_report(g3)
    assert rep.cos_mst_bound is None
    assert rep.coss_avg_ir_bound is None
    assert rep.semicore_empty
    assert rep.exact_coss == pytest.approx(2.5, abs=1e-9)
    assert rep.exact_soes == pytest.approx(5 / 3, abs=1e-9)
    d = rep.to_dict()
    assert set(d) == {"cos_mst_bound", "coss_max_marginal_bound",
                      "coss_avg_ir_bound", "exact_coss", "exact_soes",
                      "semicore_empty"}

    sym = bounds_report(TsgGame(gen_euclidean(5, seed=1)))
    assert sym.cos_mst_bound is not None
    assert sym.coss_avg_ir_bound is not None

    asym = bounds_report(TsgGame(gen_asymmetric_metric(5, seed=1),
                                 validate=False))
    assert asym.cos_mst_bound is None
    assert asym.coss_avg_ir_bound is not None


def test_inflation_produces_empty_semicore_subadditive_games():
    hit = 0
    for seed in range(30):
        n = 4 + seed % 4
        base = TsgGame(gen_asymmetric_metric(n, 500 + seed), validate=False)
        w = inflate_to_empty_semicore(base, seed=seed)
        if w is None:
            continue
        hit += 1
        assert semicore_empty_criterion(w)
        ok, pair = is_subadditive(w)
        assert ok, pair
        # the wrapper only moved the grand cost
        for i in range(n):
            s = Coalition(1 << i, n)
            assert w.cost(s) == base.cost(s)
    assert hit >= 15


def test_inflation_returns_none_when_no_room():
    # additive game: any grand increase breaks subadditivity immediately
    n = 3
    costs = {}
    for mask in range(1, 8):
        costs[mask] = float(sum(2.0 for i in range(n) if mask >> i & 1))
    game = TableGame(n, costs)
    assert inflate_to_empty_semicore(game, seed=1) is None


def test_find_empty_semicore_reports_shortfall_honestly():
    found, tried = find_empty_semicore_tsgs("euclidean", [4, 5],
                                            list(range(30)), limit=1)
    assert tried == 60
    assert found == []      # random flat instances are always stable there
