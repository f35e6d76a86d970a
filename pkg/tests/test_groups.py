import pytest
from hypothesis import given, settings, strategies as st

from wreathlab import groups as gr
from wreathlab.groups import Word, WreathElement
from wreathlab.notation import NotationError, format_element, parse_element

Z = gr.integers()
ZWRZ = gr.wreath(Z, Z)
C2 = gr.cyclic(2)
F2 = gr.free(2)

ALL_KINDS = [
    gr.cyclic(5), Z, gr.lattice(2), F2,
    gr.wreath(C2, gr.cyclic(4)), ZWRZ, gr.wreath(C2, Z),
    gr.lamp_metric(gr.cyclic(3), gr.cyclic(5)), gr.wreath(ZWRZ, Z),
    gr.wreath(Z, gr.lattice(2)),
]


def random_element(g, draw, steps=8):
    gens = gr.generators(g)
    a = gr.identity(g)
    for i in draw(st.lists(st.integers(0, len(gens) - 1), max_size=steps)):
        a = gr.multiply(a, gens[i], g)
    return a


def test_identity_neutral_for_every_kind():
    for g in ALL_KINDS:
        e = gr.identity(g)
        assert gr.multiply(e, e, g) == e
        for s in gr.generators(g):
            assert gr.multiply(e, s, g) == s == gr.multiply(s, e, g)


def test_wreath_law_hand_example():
    g = gr.wreath(C2, gr.cyclic(4))
    u = WreathElement({0: 1}, 1)
    assert gr.multiply(u, u, g) == WreathElement({0: 1, 1: 1}, 2)


def test_free_reduction_example():
    a, b = 1, 2
    x = Word((a, b, -a))
    y = Word((a, -b))
    assert gr.multiply(x, y, F2) == Word((a,))


def test_inverse_examples():
    assert gr.inverse(WreathElement({2: 3}, 5), ZWRZ) == WreathElement({-3: -3}, -5)
    assert gr.inverse(Word((1, 2)), F2) == Word((-2, -1))
    for g in ALL_KINDS:
        assert gr.inverse(gr.identity(g), g) == gr.identity(g)


def test_generators():
    assert gr.generators(Z) == [1, -1]
    assert gr.generators(gr.wreath(C2, Z)) == [
        WreathElement({0: 1}, 0), WreathElement((), 1), WreathElement((), -1)]
    assert len(gr.generators(gr.wreath(C2, gr.cyclic(6)))) == 3
    lm = gr.generators(gr.lamp_metric(gr.cyclic(3), gr.cyclic(7)))
    assert [u for u in lm if u.lamps] == [WreathElement({0: 1}, 0), WreathElement({0: 2}, 0)]
    with pytest.raises(ValueError):
        gr.lamp_metric(Z, Z)


@pytest.mark.parametrize("g", ALL_KINDS, ids=str)
def test_generators_symmetric(g):
    gens = gr.generators(g)
    assert sorted(map(repr, gens)) == sorted(repr(gr.inverse(s, g)) for s in gens)


def test_canonicalize():
    assert WreathElement({2: 0}, 0) == WreathElement((), 0)
    assert gr.canonicalize(Word((1, -1, 2))) == Word((2,))
    u = WreathElement({3: 1, 1: 1}, 2)
    assert gr.canonicalize(u) == u
    assert gr.canonicalize(gr.canonicalize(u)) == gr.canonicalize(u)
    assert gr.canonicalize(7, gr.cyclic(5)) == 2


def test_kind_mismatch():
    with pytest.raises(gr.GroupKindError):
        gr.multiply(1, Word((1,)), Z)
    with pytest.raises(gr.GroupKindError):
        gr.multiply((1, 2), (1, 2, 3), gr.lattice(2))


def test_elements_count():
    g = gr.wreath(C2, gr.cyclic(6))
    els = list(gr.elements(g))
    assert len(els) == gr.order(g) == 384 == len(set(els))


@pytest.mark.parametrize("g", ALL_KINDS, ids=str)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_axioms(g, data):
    a = random_element(g, data.draw)
    b = random_element(g, data.draw)
    c = random_element(g, data.draw)
    assert gr.multiply(gr.multiply(a, b, g), c, g) == gr.multiply(a, gr.multiply(b, c, g), g)
    assert gr.multiply(a, gr.inverse(a, g), g) == gr.identity(g)
    assert gr.inverse(gr.inverse(a, g), g) == a
    a2 = parse_element(format_element(a), g)
    assert a2 == a and hash(a2) == hash(a)
    nb = gr.right_neighbours(g)(a)
    assert nb == [gr.multiply(a, s, g) for s in gr.generators(g)]


def test_associativity_bulk():
    import random
    rnd = random.Random(5)
    for g in (gr.wreath(C2, gr.cyclic(4)), ZWRZ, F2):
        gens = gr.generators(g)

        def rand():
            a = gr.identity(g)
            for _ in range(rnd.randrange(10)):
                a = gr.multiply(a, rnd.choice(gens), g)
            return a

        for _ in range(10_000 // 3 + 1):
            a, b, c = rand(), rand(), rand()
            assert gr.multiply(gr.multiply(a, b, g), c, g) == gr.multiply(a, gr.multiply(b, c, g), g)


def test_notation_examples():
    assert parse_element("wreath{2:1,5:1|cursor=3}") == WreathElement({2: 1, 5: 1}, 3)
    assert parse_element("word:abA") == Word((1, 2, -1))
    assert parse_element("z:-4") == -4
    assert parse_element("vec:(1,-2)") == (1, -2)
    for s in ["wreath{2:1,5:1|cursor=3}", "word:abA", "z:-4", "vec:(1,-2)", "word:",
              "wreath{|cursor=(0,1)}", "wreath{-1:wreath{0:2|cursor=1}|cursor=0}"]:
        assert format_element(parse_element(s)) == s
    for bad in ["z:", "word:aA", "wreath{5:1,2:1|cursor=0}", "vec:(1,", "q:1", "z:1x"]:
        with pytest.raises(NotationError):
            parse_element(bad)
    with pytest.raises(NotationError):
        parse_element("z:7", gr.cyclic(5))
