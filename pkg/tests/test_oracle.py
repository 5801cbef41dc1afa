"""Brute-force oracle: counts, budgets, tie-breaks, ranking output."""

import io

import pytest

from nkshed import fixtures as fx
from nkshed.attackers import compute_phi
from nkshed.engine import NoFeasibleAttackError, solve_interdiction
from nkshed.netmodel import AttackerModel
from nkshed.oracle import BudgetExceededError, solve_exhaustive, write_ranking_csv


def test_two_bus_single_line(two_bus):
    res = solve_exhaustive(two_bus, AttackerModel.traditional(1))
    assert res.best_eta == pytest.approx(1.0, abs=1e-6)
    assert res.evaluated == 1
    assert sorted(res.best_attack.lines) == [1]


def test_triangle_topological_pairs_all_touch(triangle):
    res = solve_exhaustive(triangle, AttackerModel.topological(2))
    assert res.evaluated == 3


def test_triangle_traditional_cross_check_engine(triangle):
    model = AttackerModel.traditional(2)
    res = solve_exhaustive(triangle, model)
    _, eta, _ = solve_interdiction(triangle, model)
    assert eta == pytest.approx(res.best_eta, rel=0.011, abs=1e-6)


def test_budget_rejected_before_solving(mesh8):
    with pytest.raises(BudgetExceededError, match="220"):
        solve_exhaustive(mesh8, AttackerModel.traditional(3), budget=10)


def test_spatial_enumerates_all_sizes(mesh8):
    d = fx.SPATIAL_D["mesh8"]
    footprint = compute_phi(mesh8, d)
    res = solve_exhaustive(mesh8, AttackerModel.spatial(2, d), footprint,
                           keep_ranking=True)
    sizes = {len(lines) for lines, _ in res.ranking}
    assert 0 in sizes and 1 in sizes and 2 in sizes
    assert res.best_eta >= max(eta for _, eta in res.ranking) - 1e-12


def test_lexicographic_tie_break(star5):
    # Every leg of the star sheds the same load, so the smallest id must win.
    res = solve_exhaustive(star5, AttackerModel.traditional(1), keep_ranking=True)
    etas = {eta for _, eta in res.ranking}
    assert len(etas) == 1
    assert sorted(res.best_attack.lines) == [1]


def test_no_feasible_attack_when_k_exceeds_lines(two_bus):
    with pytest.raises(NoFeasibleAttackError):
        solve_exhaustive(two_bus, AttackerModel.traditional(3))


def test_ranking_csv(star5):
    res = solve_exhaustive(star5, AttackerModel.traditional(2), keep_ranking=True)
    buf = io.StringIO()
    write_ranking_csv(res, buf)
    rows = buf.getvalue().strip().splitlines()
    assert rows[0] == "rank,lines,eta"
    assert len(rows) == 1 + res.evaluated
    first = rows[1].split(",")
    assert first[0] == "1"
    assert first[1] == ";".join(str(l) for l in sorted(res.best_attack.lines))


def test_ranking_requires_flag(star5):
    res = solve_exhaustive(star5, AttackerModel.traditional(1))
    with pytest.raises(ValueError, match="keep_ranking"):
        write_ranking_csv(res, io.StringIO())


def test_spatial_nests_in_unconstrained_small_attacks(mesh8):
    # A disk-limited attacker can never beat the best attack of size <= k,
    # and with a system-covering disk the two coincide.
    d = fx.SPATIAL_D["mesh8"]
    tight = solve_exhaustive(mesh8, AttackerModel.spatial(2, d), compute_phi(mesh8, d))
    wide_model = AttackerModel.spatial(2, 10000.0)
    wide = solve_exhaustive(mesh8, wide_model, compute_phi(mesh8, 10000.0))
    best_any = max(
        solve_exhaustive(mesh8, AttackerModel.traditional(k)).best_eta for k in (1, 2))
    assert tight.best_eta <= wide.best_eta + 1e-9
    assert wide.best_eta == pytest.approx(best_any, abs=1e-9)


def test_deterministic(mesh8):
    a = solve_exhaustive(mesh8, AttackerModel.traditional(2), keep_ranking=True)
    b = solve_exhaustive(mesh8, AttackerModel.traditional(2), keep_ranking=True)
    assert a.best_attack.lines == b.best_attack.lines
    assert a.best_eta == b.best_eta
    assert a.ranking == b.ranking
