import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wreathlab import embed as em
from wreathlab import groups as gr
from wreathlab.groups import Word, WreathElement as W
from wreathlab.metric import bfs_ball, wreath_distance_exact
from wreathlab.sparse import SparseVec

C2 = gr.cyclic(2)
Z = gr.integers()


# ---------------------------------------------------------------- SparseVec


def test_sparse_add_sub_and_exact_norm():
    a = SparseVec({"x": Fraction(1, 3), "y": 2}, 1)
    b = SparseVec({"x": Fraction(1, 3), "z": -1}, 1)
    d = a - b
    assert d.entries == {"y": 2, "z": 1}
    assert d.pnorm_pow(1) == 3 and isinstance(d.pnorm_pow(1), int)


def test_sparse_scalar_block_uses_modulus():
    v = SparseVec({("scalar", 0): 3, ("scalar", 1): 4, "k": 1})
    assert v.norm(1) == pytest.approx(6.0)


def test_sparse_direct_sum_keeps_blocks_apart():
    u = SparseVec({("scalar", 0): 3, ("scalar", 1): 4}, 1)
    s = SparseVec.direct_sum(u, u, p=1)
    assert s.norm(1) == pytest.approx(10.0)


def test_sparse_p_mismatch():
    with pytest.raises(ValueError):
        SparseVec({"a": 1}, 1) + SparseVec({"b": 1}, 2)
    with pytest.raises(ValueError):
        SparseVec.direct_sum(SparseVec({"a": 1}, 1), p=2)


def test_sparse_relabel_and_json():
    v = SparseVec({("k", 1): 2}).relabel(lambda k: (("k", -k[1]), -1))
    assert v.entries == {("k", -1): -2}
    assert v.to_json() == '{"(k,-1)": -2.0}'


# ---------------------------------------------------------------- cycle embeddings


@pytest.mark.parametrize("n", [3, 6, 9, 12])
def test_first_cursor_step(n):
    d = em.embed_cycle_first([], 1, n) - em.embed_cycle_first([], 0, n)
    assert d.norm(1) == pytest.approx(2 * (n - 1) / n, rel=1e-12)


def test_first_self_distance_zero():
    v = em.embed_cycle_first([0, 2], 4, 6)
    assert (v - v).norm(1) == 0


def test_first_ratio_window_on_c2_wr_c6():
    g = gr.wreath(C2, gr.cyclic(6))
    e = em.embed_cycle_first([], 0, 6)
    table = bfs_ball(g, 100)
    assert len(table) == 384
    ratios = [(em.embed_cycle_first(u.support, u.cursor, 6) - e).norm(1) / d
              for u, d in table.dist.items() if d]
    assert max(ratios) / min(ratios) <= 16


def test_first_unnormalized_is_scaled():
    n = 6
    a = em.embed_cycle_first([1], 2, n, normalized=False)
    b = em.embed_cycle_first([1], 2, n)
    assert (a.scale(1 / em.cycle_first_scale(n)) - b).norm(1) < 1e-12


def test_cycle_size_limits():
    with pytest.raises(ValueError):
        em.embed_cycle_first([], 0, 2)
    with pytest.raises(ValueError):
        em.embed_cycle_first([], 0, em.MAX_CYCLE + 1)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_second_scalar_block(n):
    d = em.embed_cycle_second([], 1, n) - em.embed_cycle_second([], 0, n)
    scalar = SparseVec({k: v for k, v in d.entries.items() if k[0] == "scalar"})
    assert scalar.norm(1) == pytest.approx(2 * n * math.sin(math.pi / n), rel=1e-12)


def test_second_zero_and_lower_witness():
    n = 8
    u = em.embed_cycle_second([3, 5], 1, n)
    assert (u - u).norm(1) == 0
    e = em.embed_cycle_second([], 0, n)
    for ell in range(n):
        far = (em.embed_cycle_second([ell], 0, n) - e).norm(1)
        k = min(ell, n - ell)
        assert far >= (k + 1) * (n - k) / n - 1e-12


def test_arcs_counts():
    assert len(em.all_arcs(7)) == 7 * 6
    assert em.arc_interior(5, 4, 7) == {6, 0}


def test_l2_zero_and_p():
    v = em.embed_cycle_l2([1, 4], 3, 9, 0.75)
    assert v.p == 2 and (v - v).norm() == 0


# ---------------------------------------------------------------- line and plane


def test_line_base_point_and_cursor_step():
    assert len(em.embed_line_l1([], 0).entries) == 0
    step = (em.embed_line_l1([], 1) - em.embed_line_l1([], 0)).norm(1)
    assert 1 <= step <= 3


def test_line_bi_lipschitz_on_ball():
    g = gr.wreath(C2, Z)
    e = em.embed_line_l1([], 0)
    ratios = [(em.embed_line_l1(u.support, u.cursor) - e).norm(1) / d
              for u, d in bfs_ball(g, 9).dist.items() if d]
    assert 0.25 <= min(ratios) and max(ratios) <= 4
    lone = (em.embed_line_l1([5], 0) - e).norm(1)
    assert wreath_distance_exact(W({5: 1}, 0), g) == 11
    assert 11 / 4 <= lone <= 11 * 4


def _z2_direct(f, x, alpha, box):
    """The plane embedding summed term by term over a fixed window of centres."""
    f = {tuple(z) for z in f}
    out = {("scalar", 0): x[0], ("scalar", 1): x[1]}
    for y in itertools.product(range(-box, box + 1), repeat=2):
        D = max(abs(y[0] - x[0]), abs(y[1] - x[1]))
        if D == 0:
            continue
        for r in range(0, D):
            w = max(1 - 2 * r / D, 0) / D ** (1.5 - 2 * alpha)
            pattern = tuple(sorted(z for z in f if max(abs(z[0] - y[0]), abs(z[1] - y[1])) <= r))
            if w and pattern:
                out[("lattice", y, r, pattern)] = w
    return SparseVec(out, 2)


@pytest.mark.parametrize("f, x", [
    ([], (0, 0)), ([(1, 0)], (0, 0)), ([(2, -1), (0, 3)], (1, 1)), ([(0, 0), (1, 1)], (-1, 2)),
])
def test_z2_matches_direct_sum(f, x):
    fast = em.embed_z2(f, x, 0.4)
    slow = _z2_direct(f, x, 0.4, 12)
    assert (fast - slow).norm() < 1e-12


def test_z2_cursor_only_pairs():
    d = em.embed_z2([], (2, -1), 0.4) - em.embed_z2([], (-1, 3), 0.4)
    assert d.norm() == pytest.approx(5.0)
    assert all(k[0] == "scalar" for k in d.entries)


def test_z2_alpha_range():
    with pytest.raises(ValueError):
        em.embed_z2([], (0, 0), 0.5)


# ---------------------------------------------------------------- free group


def test_free_embedding_examples():
    assert len(em.embed_free_group(Word(()), 2).entries) == 0
    aba = Word((1, 2, 1))
    for p in (1, 1.5, 2):
        assert em.embed_free_group(aba, p).pnorm_pow(p) == 3
    ab, aB = Word((1, 2)), Word((1, -2))
    assert (em.embed_free_group(ab) - em.embed_free_group(aB)).pnorm_pow(1) == 2
    ac = Word((1, 3))  # the shared-prefix example needs a third generator
    assert (em.embed_free_group(ab) - em.embed_free_group(ac)).pnorm_pow(1) == 2


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8))
def test_free_embedding_isometric_power(x, y):
    x, y = Word(tuple(x)), Word(tuple(y))
    d = len((x.inverse() * y).letters)
    diff = em.embed_free_group(x) - em.embed_free_group(y)
    for p in (1, 1.5, 2):
        assert diff.pnorm_pow(p) == d


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=7),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=7))
def test_tree_translate_is_cocycle(x, y):
    x, y = Word(tuple(x)), Word(tuple(y))
    lhs = em.embed_free_group(x * y)
    rhs = em.tree_translate(x, em.embed_free_group(y)) + em.embed_free_group(x)
    assert lhs == rhs


# ---------------------------------------------------------------- exponent algebra and cube


def test_composition_examples():
    cp = em.CompressionParams
    assert em.compression_composition(cp(1, 1, 2)) == Fraction(2, 3)
    assert em.compression_composition(cp(Fraction(2, 3), 1, 2)) == Fraction(4, 7)
    assert em.compression_composition(cp(Fraction(4, 7), 1, 2)) == Fraction(8, 15)
    assert em.compression_composition(cp(Fraction(2, 5), 1, 2)) == Fraction(2, 5)


def test_iterated_alpha_closed_form():
    for k, a in enumerate(em.iterated_alpha(8), start=1):
        assert a == 1 / (2 - Fraction(2) ** (1 - k))


def test_composition_rejects_bad_params():
    with pytest.raises(ValueError):
        em.CompressionParams(Fraction(3, 2), 1)
    with pytest.raises(ValueError):
        em.CompressionParams(1, 1, Fraction(1, 2))


def test_cube_embedding():
    assert em.cube_to_zwrz((1, 1)) == W({3: 2, 4: 2}, 0)
    g = gr.wreath(Z, Z)
    for n in range(1, 7):
        for eps in itertools.product((1, -1), repeat=n):
            a, b = em.cube_to_zwrz(eps), em.cube_to_zwrz(tuple(-e for e in eps))
            assert wreath_distance_exact(gr.multiply(gr.inverse(a, g), b, g), g) == 2 * n * n + 4 * n


# ---------------------------------------------------------------- lifts


def test_gaussian_lift_examples():
    one = em.gaussian_lift_check([1.0], 1, 100_000, 3)
    assert abs(one.ratio - math.sqrt(2 / math.pi)) <= 3 * one.stderr
    a = em.gaussian_lift_check([3.0, 4.0], 1.5, 100_000, 4)
    b = em.gaussian_lift_check([5.0], 1.5, 100_000, 5)
    assert abs(a.ratio - b.ratio) <= 3 * math.hypot(a.stderr, b.stderr)
    two = em.gaussian_lift_check([0.3, -1.2, 2.0], 2, 100_000, 6)
    assert abs(two.ratio - 1) <= 3 * two.stderr
    with pytest.raises(ValueError):
        em.gaussian_lift_check([0.0], 1, 10, 0)


def test_lift_bernoulli_bounds():
    from wreathlab.distortion import exact_distortion_small

    n = 9
    rep = exact_distortion_small(n, "l2", 0.75)
    theta = lambda xs, j: em.embed_cycle_l2(xs, j, n, 0.75)
    g = gr.wreath(gr.cyclic(3), gr.cyclic(n))
    u, e = W({4: 1}, 0), W({}, 0)
    same = em.lift_bernoulli(theta, u, u, g, 200, 1)
    assert same.mean_sq == 0
    r = em.lift_bernoulli(theta, u, e, g, 4000, 2, rep.lipschitz, rep.compression, 1.0)
    assert r.mean_sq >= r.lower - 3 * r.stderr
    assert r.mean_sq <= r.upper


def test_combine_zero_and_single_lamp():
    psi = lambda v: SparseVec({("z",): v}, 1)
    phi0 = em.embed_cycle_first([], 0, 6)
    zero = em.combine_wreath_embedding(phi0 - phi0, psi, W({}, 0), 1)
    assert zero.norm(1) == 0
    phi = em.embed_cycle_first([2], 0, 6)
    a = em.combine_wreath_embedding(phi, psi, W({2: 5}, 0), 1)
    b = em.combine_wreath_embedding(phi, psi, W({2: -2}, 0), 1)
    assert (a - b).norm(1) == 7


def test_combine_rejects_p_mismatch():
    with pytest.raises(ValueError):
        em.combine_wreath_embedding(SparseVec({}, 2), lambda v: SparseVec({("z",): v}, 2), W({}, 0), 1)
