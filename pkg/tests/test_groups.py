"""Normal forms, set algebra and boundary calculus on the concrete groups."""
from __future__ import annotations

from fractions import Fraction
from random import Random

import pytest
from hypothesis import given, strategies as st

from leftschemes import (
    BSGroup,
    CyclicGroup,
    DihedralGroup,
    DirectProductGroup,
    GroupError,
    HeisenbergGroup,
    Nil2Group,
    WreathGroup,
    ZdGroup,
    ball,
    boundary_count,
    boundary_ratio,
    conjugacy_class,
    finset,
    finset_from_json,
    finset_to_json,
    h5_presentation,
    set_algebra,
    set_invert,
    set_translate,
    word_decompose,
)
from leftschemes.groups import RadiusExceededError


def all_contexts():
    return [
        HeisenbergGroup(),
        DihedralGroup(),
        ZdGroup(2),
        CyclicGroup(5),
        WreathGroup(CyclicGroup(2)),
        BSGroup(2),
        DirectProductGroup(DihedralGroup(), CyclicGroup(2)),
        Nil2Group(h5_presentation()),
    ]


def rand_word(ctx, rng, max_len=8):
    g = ctx.identity
    for _ in range(rng.randrange(max_len + 1)):
        g = ctx.mul(g, rng.choice(ctx.gens))
    return g


def test_heisenberg_multiplication_table():
    h = HeisenbergGroup()
    x, y = h.make((1, 0, 0)), h.make((0, 1, 0))
    assert h.mul(x, y).coords == (1, 1, 0)
    assert h.mul(y, x).coords == (1, 1, 1)
    assert h.inv(h.make((1, 1, 0))).coords == (-1, -1, 1)
    g = h.make((5, -3, 2))
    assert h.mul(g, h.identity) == g
    assert h.mul(g, h.inv(g)) == h.identity


def test_bs_multiplication_example():
    bs = BSGroup(2)
    g = bs.make(((1, 0), 1))
    hh = bs.make(((1, 0), 0))
    assert bs.mul(g, hh).coords == ((3, 0), 1)
    # a b a^-1 = b^d in canonical lowest form.
    a, b = bs.make((bs.base.identity(), 1)), bs.make(((1, 0), 0))
    assert bs.mul(bs.mul(a, b), bs.inv(a)).coords == ((1, 1), 0)


def test_bs_canonical_form():
    bs = BSGroup(2)
    assert bs.make(((4, -2), 0)).coords == ((1, 0), 0)
    assert bs.make(((6, 0), 3)).coords == ((3, 1), 3)
    assert bs.make(((0, 5), 1)).coords == ((0, 0), 1)


def test_dihedral_relations():
    d = DihedralGroup()
    r, s = d.make((1, 0)), d.make((0, 1))
    rs = d.mul(r, s)
    assert d.inv(rs) == rs
    assert d.mul(d.mul(s, r), s) == d.inv(r)


def test_right_translate_example():
    h = HeisenbergGroup()
    e = finset(h, [(0, 4, 0)])
    moved = set_translate(h, "right", h.make((1, 0, 0)), e)
    assert set(moved) == {(1, 4, 4)}
    d = DihedralGroup()
    two = set_translate(d, "right", d.make((0, 1)), finset(d, [(2, 0), (1, 1)]))
    assert set(two) == {(2, 1), (1, 0)}


def test_set_algebra_counts():
    h = HeisenbergGroup()
    e = finset(h, [(0, 0, 0), (1, 0, 0), (0, 1, 0)])
    f = finset(h, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert len(set_algebra(e, f, "union")) == 4
    assert len(set_algebra(e, f, "intersect")) == 2
    assert len(set_algebra(e, f, "symdiff")) == 2
    assert len(set_algebra(e, f, "minus")) == 1
    assert len(set_algebra(e, e, "symdiff")) == 0
    # |E symdiff F| = |E| + |F| - 2|E intersect F|
    assert len(set_algebra(e, f, "symdiff")) == len(e) + len(f) - 2 * 2
    with pytest.raises(GroupError):
        set_algebra(e, finset(DihedralGroup(), [(0, 0)]), "union")


def test_set_invert():
    d = DihedralGroup()
    e = finset(d, [(3, 0), (2, 1)])
    assert set(set_invert(d, e)) == {(-3, 0), (2, 1)}


def test_boundary_ratio_window_example():
    # The one-window box A=2, B=2, C=3 with its y-interval at {4, 5}.
    h = HeisenbergGroup()
    e = finset(h, [(a, b, c) for a in range(2) for b in (4, 5)
                   for c in range(3)])
    x, y = h.make((1, 0, 0)), h.make((0, 1, 0))
    assert boundary_ratio(h, "left", x, e) == Fraction(1)         # = 2/A
    assert boundary_ratio(h, "left", y, e) == Fraction(7, 6)
    assert Fraction(7, 6) <= Fraction(2, 2) + Fraction(2, 3)      # 2/B + A/C
    assert boundary_ratio(h, "left", h.identity, e) == 0
    with pytest.raises(GroupError):
        boundary_ratio(h, "left", x, finset(h, []))


def test_word_decompose():
    h = HeisenbergGroup()
    assert word_decompose(h, h.identity) == []
    z = h.make((0, 0, 1))
    word = word_decompose(h, z)
    assert len(word) == 4
    g = h.identity
    for s in word:
        g = h.mul(g, s)
    assert g == z
    d = DihedralGroup()
    assert [w.coords for w in word_decompose(d, d.make((2, 0)))] == [(1, 0), (1, 0)]
    with pytest.raises(RadiusExceededError):
        word_decompose(h, h.make((40, 0, 0)), max_len=6)


def test_word_boundary_subadditivity():
    # |gE symdiff E| <= sum_i |s_i E symdiff E| over any generator word for g.
    h = HeisenbergGroup()
    rng = Random(7)
    for _ in range(25):
        e = finset(h, {(rng.randrange(-4, 5), rng.randrange(-4, 5),
                        rng.randrange(-4, 5)) for _ in range(12)})
        g = rand_word(h, rng, max_len=5)
        word = word_decompose(h, g)
        lhs = boundary_count(h, "left", g, e)
        rhs = sum(boundary_count(h, "left", s, e) for s in word)
        assert lhs <= rhs


def test_associativity_random_words():
    rng = Random(20240817)
    for ctx in all_contexts():
        for _ in range(1000):
            a, b, c = (rand_word(ctx, rng, 6) for _ in range(3))
            assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))


def test_inverse_and_canonicality_random_words():
    rng = Random(91)
    for ctx in all_contexts():
        for _ in range(200):
            a, b = rand_word(ctx, rng), rand_word(ctx, rng)
            assert ctx.mul(a, ctx.inv(a)) == ctx.identity
            assert ctx.inv(ctx.mul(a, b)) == ctx.mul(ctx.inv(b), ctx.inv(a))
            assert ctx.make(a.coords) == a


def test_translation_bijectivity_random():
    rng = Random(5)
    h = HeisenbergGroup()
    for _ in range(40):
        keys = {(rng.randrange(-6, 7), rng.randrange(-6, 7),
                 rng.randrange(-6, 7)) for _ in range(15)}
        e = finset(h, keys)
        f = finset(h, {(rng.randrange(-6, 7), rng.randrange(-6, 7),
                        rng.randrange(-6, 7)) for _ in range(10)})
        g = rand_word(h, rng)
        for side in ("left", "right"):
            assert len(set_translate(h, side, g, e)) == len(e)
        left = set_translate(h, "left", g, set_algebra(e, f, "symdiff"))
        right = set_algebra(set_translate(h, "left", g, e),
                            set_translate(h, "left", g, f), "symdiff")
        assert left.keys == right.keys


@given(st.integers(-30, 30), st.integers(-30, 30),
       st.integers(-30, 30), st.integers(-30, 30))
def test_zd_translation_commutes(a, b, c, d):
    z = ZdGroup(2)
    assert z.mul(z.make((a, b)), z.make((c, d))) == z.mul(z.make((c, d)),
                                                          z.make((a, b)))


def test_ball_sizes():
    h = HeisenbergGroup()
    assert len(ball(h, 1)) == 5
    # radius 2: 25 products of two generators collapse to 12 new elements.
    assert len(ball(h, 2)) == 1 + 4 + 12


def test_conjugacy_classes():
    h = HeisenbergGroup()
    z = h.make((0, 0, 1))
    assert set(conjugacy_class(h, z)) == {(0, 0, 1)}
    with pytest.raises(GroupError):
        conjugacy_class(h, h.make((1, 0, 0)), cap=50)
    d = DihedralGroup()
    assert set(conjugacy_class(d, d.make((1, 0)))) == {(1, 0), (-1, 0)}


def test_fc_detection():
    assert ZdGroup(3).is_fc()
    assert CyclicGroup(6).is_fc()
    assert not HeisenbergGroup().is_fc()
    assert not DihedralGroup().is_fc()


def test_finset_json_roundtrip():
    w = WreathGroup(CyclicGroup(2))
    rng = Random(3)
    e = finset(w, [rand_word(w, rng).coords for _ in range(8)])
    obj = finset_to_json(e)
    assert obj == sorted(obj)
    back = finset_from_json(w, obj)
    assert back.keys == e.keys


def test_group_id_mismatch_rejected():
    h, d = HeisenbergGroup(), DihedralGroup()
    with pytest.raises(GroupError):
        h.mul(h.identity, d.identity)
