"""Shared fixtures: reference games and the seeded suites the gate reuses."""
from __future__ import annotations

import numpy as np
import pytest

from costgames import (DistanceMatrix, TableGame, TsgGame,
                       gen_asymmetric_metric, gen_euclidean,
                       inflate_to_empty_semicore, random_subadditive_game,
                       semicore_empty_criterion)

# three players: every singleton costs 6, every pair 5, everybody 10;
# small enough to re-derive each stability value by hand or exact simplex
G3_COSTS = {0b001: 6.0, 0b010: 6.0, 0b100: 6.0,
            0b011: 5.0, 0b101: 5.0, 0b110: 5.0, 0b111: 10.0}


@pytest.fixture(scope="session")
def g3() -> TableGame:
    return TableGame(3, dict(G3_COSTS))


@pytest.fixture(scope="session")
def collinear_matrix() -> DistanceMatrix:
    """Depot at the origin, players on a line at distances 1, 2, 3."""
    pts = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 2.0], [0.0, 3.0]])
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    return DistanceMatrix.from_entries(d)


def build_empty_semicore_suites() -> tuple[list, list]:
    """Criterion-empty subadditive games: explicit tables, tour games pushed
    into emptiness by grand-cost inflation, and any genuinely unstable tour
    games rejection sampling can find.  Returns (all games, tour-based games
    paired with their distance matrices)."""
    from costgames import find_empty_semicore_tsgs

    suite: list = []
    tsg_pairs: list = []
    for seed in range(70):
        n = 4 + seed % 7          # 4..10
        suite.append(random_subadditive_game(n, seed=seed, empty_semicore=True))
    made = 0
    seed = 0
    while made < 60 and seed < 400:
        n = 4 + seed % 5          # 4..8
        m = (gen_euclidean(n, seed) if seed % 2 == 0
             else gen_asymmetric_metric(n, seed))
        inflated = inflate_to_empty_semicore(TsgGame(m, validate=False),
                                             seed=seed)
        if inflated is not None:
            suite.append(inflated)
            tsg_pairs.append((m, inflated))
            made += 1
        seed += 1
    assert made >= 50, "inflation window unexpectedly rare"
    found, _ = find_empty_semicore_tsgs("asymmetric", [4, 5, 6, 7, 8],
                                        list(range(40)), limit=2)
    for _, game in found:
        suite.append(game)
        tsg_pairs.append((game.matrix, game))
    for game in suite:
        assert semicore_empty_criterion(game)
    return suite, tsg_pairs


@pytest.fixture(scope="session")
def _semicore_suites() -> tuple[list, list]:
    return build_empty_semicore_suites()


@pytest.fixture(scope="session")
def empty_semicore_suite(_semicore_suites) -> list:
    suite = _semicore_suites[0]
    assert len(suite) >= 100
    return suite


@pytest.fixture(scope="session")
def empty_semicore_tsg_pairs(_semicore_suites) -> list:
    pairs = _semicore_suites[1]
    assert len(pairs) >= 50
    return pairs


@pytest.fixture(scope="session")
def raw_tsg_suite() -> list[TsgGame]:
    """Unmodified tour games, both metric kinds, for the ratio-bound checks."""
    games = []
    for seed in range(60):
        n = 4 + seed % 5
        games.append(TsgGame(gen_euclidean(n, 7000 + seed), validate=False))
        games.append(TsgGame(gen_asymmetric_metric(n, 7000 + seed),
                             validate=False))
    return games


@pytest.fixture(scope="session")
def mixed_subadditive_500() -> list:
    """Five hundred subadditive games with a healthy mix of empty and
    nonempty semicores for the criterion-vs-LP agreement check."""
    games: list = []
    for seed in range(200):
        n = 3 + seed % 6
        games.append(random_subadditive_game(n, seed=seed))
    for seed in range(120):
        n = 3 + seed % 6
        games.append(random_subadditive_game(n, 10_000 + seed,
                                             empty_semicore=True))
    for seed in range(100):
        n = 3 + seed % 6
        games.append(random_subadditive_game(n, 20_000 + seed,
                                             empty_semicore=False))
    seed = 0
    while len(games) < 500 and seed < 600:
        n = 4 + seed % 4
        g = TsgGame(gen_asymmetric_metric(n, 30_000 + seed), validate=False)
        w = inflate_to_empty_semicore(g, seed=seed)
        games.append(w if w is not None and seed % 3 else g)
        seed += 1
    return games[:500]


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(index: int, label: str, ok: bool, note: str = "") -> None:
    tail = f"  ({note})" if note else ""
    ACCEPTANCE_LINES.append(
        f"ACCEPTANCE {index:2d} {'PASS' if ok else 'FAIL'}  {label}{tail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
