import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wreathlab import groups as gr
from wreathlab.groups import Word, WreathElement as W
from wreathlab import metric as me

Z = gr.integers()
C2 = gr.cyclic(2)
ZWRZ = gr.wreath(Z, Z)


def test_bfs_ball_integers_radius_three():
    t = me.bfs_ball(Z, 3)
    assert t.dist == {0: 0, 1: 1, -1: 1, 2: 2, -2: 2, 3: 3, -3: 3}


def test_bfs_ball_free_group_size():
    # reduced words of length <= 2 in F2: 1 + 4 + 4*3
    assert len(me.bfs_ball(gr.free(2), 2)) == 17


def test_bfs_order_is_deterministic():
    a = list(me.bfs_ball(gr.wreath(C2, Z), 4).dist)
    b = list(me.bfs_ball(gr.wreath(C2, Z), 4).dist)
    assert a == b


def test_bfs_overflow_raises():
    with pytest.raises(me.BallOverflowError):
        me.bfs_ball(ZWRZ, 8, budget=100)


def test_distance_examples():
    g6 = gr.wreath(C2, gr.cyclic(6))
    u = W({1: 1, 5: 1}, 0)
    assert me.distance(g6, u, u) == 0
    assert me.distance(g6, u, gr.identity(g6)) == 6
    assert me.distance(gr.lattice(2), (3, -4), (0, 0)) == 7


def test_word_length_closed_forms():
    assert me.word_length(ZWRZ, W({}, 5)) == 5
    assert me.word_length(ZWRZ, W({2: 3}, 0)) == 7
    assert me.word_length(gr.free(2), Word((1, 2, -1))) == 3
    assert me.word_length(gr.cyclic(7), 5) == 2


@pytest.mark.parametrize("g, r", [
    (gr.wreath(C2, Z), 7),
    (gr.wreath(C2, gr.cyclic(5)), 8),
    (gr.wreath(gr.cyclic(3), gr.cyclic(4)), 7),
    (gr.wreath(Z, gr.cyclic(6)), 6),
    (ZWRZ, 6),
    (gr.lamp_metric(gr.cyclic(3), Z), 5),
])
def test_exact_distance_agrees_with_bfs(g, r):
    table = me.bfs_ball(g, r)
    bad = [(u, d) for u, d in table.dist.items() if me.wreath_distance_exact(u, g) != d]
    assert not bad


def test_iterated_word_length_agrees_with_bfs():
    g = gr.iterated(3)
    for u, d in me.bfs_ball(g, 5).dist.items():
        assert me.word_length(g, u) == d


def test_tsp_distance_on_plane_lamplighter_agrees_with_bfs():
    g = gr.wreath(C2, gr.lattice(2))
    for u, d in me.bfs_ball(g, 6).dist.items():
        assert me.wreath_distance_tsp(u, g) == d


def test_exact_distance_rejects_other_shapes():
    with pytest.raises(me.UnsupportedShapeError):
        me.wreath_distance_exact(W({(1, 0): 1}, (0, 0)), gr.wreath(C2, gr.lattice(2)))


def test_line_tour_cases():
    assert me.line_tour([], 4) == 4
    assert me.line_tour([3], 0) == 6
    assert me.line_tour([-2, 5], 1) == 2 * 7 - 1


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 12).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.integers(0, n - 1), max_size=n), st.integers(0, n - 1))))
def test_cycle_tour_matches_brute_force(args):
    n, sites, x = args
    assert me.cycle_tour(sites, x, n) == me.cycle_tour_brute(sites, x, n)


def test_lamp_metric_formula_examples():
    lz = gr.lamp_metric(C2, Z)
    u = W({3: 1}, 0)
    assert me.lamp_metric_formula(u, u, lz) == 0
    assert me.lamp_metric_formula(u, W({}, 0), lz) == 4
    l8 = gr.lamp_metric(C2, gr.cyclic(8))
    assert me.lamp_metric_formula(W({3: 1}, 2), W({}, 0), l8) == 6


def test_metric_equivalence_ratio_within_derived_bounds():
    # the exact lamp metric sits between half the formula and (just under) four times it
    for g in (gr.lamp_metric(C2, Z), gr.lamp_metric(gr.cyclic(3), gr.cyclic(9))):
        rep = me.check_metric_equivalence(g, 8)
        assert 0.5 <= rep.min_ratio and rep.max_ratio < 4
        assert rep.window <= 8


@pytest.mark.xfail(strict=True, raises=AssertionError, reason="measured window 6.56 at r=8; see decisions ledger")
def test_metric_equivalence_window_at_most_four():
    assert me.check_metric_equivalence(gr.lamp_metric(C2, Z), 8).window <= 4


def test_metric_equivalence_excludes_identity_pair():
    rep = me.check_metric_equivalence(gr.lamp_metric(C2, Z), 3)
    assert all(r[1] > 0 for r in rep.records)


def test_distance_table_csv_header():
    text = me.bfs_ball(Z, 1).to_csv()
    assert text.splitlines()[0] == "element,distance"


# ---------------------------------------------------------------- Poincare


def test_poincare_radius_zero():
    # one vertex: Q = 2|S|, so J(0)^2 = 1/(2|S|)
    rep = me.poincare_J(Z, [0])
    assert rep.J[0] ** 2 == pytest.approx(0.25, rel=1e-12)


def test_poincare_integers_closed_form():
    rep = me.poincare_J(Z, [1, 2, 5, 10])
    for r, J in zip(rep.radii, rep.J):
        assert J == pytest.approx(me.J_closed_form_integers(r), rel=1e-8)


def test_poincare_matches_dense_eigensolver():
    g = gr.lattice(2)
    Q, _ = me.dirichlet_matrix(g, 4)
    lam = np.linalg.eigvalsh(Q.toarray()).min()
    assert me.poincare_J(g, [4]).J[0] == pytest.approx(lam ** -0.5, rel=1e-7)


def test_poincare_exponent_integers():
    rep = me.poincare_J(Z, [4, 8, 16, 32])
    assert 0.9 <= rep.alpha_hat <= 1.1


def test_poincare_closed_form_small():
    assert me.J_closed_form_integers(0) == pytest.approx(1 / math.sqrt(4 * (1 - math.cos(math.pi / 2))))
