"""Two-sided almost invariant families and the disjointification scan."""
from __future__ import annotations

from fractions import Fraction

import pytest

from leftschemes import (
    CyclicGroup,
    FolnerFamily,
    FolnerSearchError,
    HeisenbergGroup,
    Rad,
    SchemeError,
    WreathGroup,
    ZdGroup,
    diff_norm_sq,
    disjointify,
    finset,
    heisenberg_boxes,
    symmetric_vector,
    worst_ratios,
    wreath_rectangles,
    z_boxes,
)


def test_worst_ratios_interval():
    z = ZdGroup(1)
    s = finset(z, [(k,) for k in range(9)])
    out = worst_ratios(z, s)
    # [0,9) shifted by +-1 swaps one endpoint in and one out on either side
    assert out == {"left": Fraction(2, 9), "right": Fraction(2, 9)}


def test_disjointify_z_line():
    z = ZdGroup(1)
    sets, rep = disjointify(z_boxes(z), 3)
    assert [len(f) for f in sets] == [9, 136, 5076]
    assert [row["m"] for row in rep.series["folner"]] == [9, 145, 5221]
    assert [row["left"] for row in rep.series["folner"]] == ["2/9", "1/68", "1/2538"]
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    # the pieces really are pairwise disjoint intervals
    seen: set = set()
    for f in sets:
        assert not (seen & f.keys)
        seen |= f.keys


def test_disjointify_z_line_thresholds():
    # First pass re-derived from the scan rules: m is the least index with
    # 2/m < 1/(4 n^2), size > 4 n^2 |used| and leftover growth.
    used = 0
    prev = 0
    m = 0
    want = []
    for n in (1, 2, 3):
        m += 1
        while (Fraction(2, m) >= Fraction(1, 4 * n * n)
               or m <= 4 * n * n * used or m - used <= prev):
            m += 1
        want.append((m, m - used))
        prev = m - used
        used = m
    assert want == [(9, 9), (145, 136), (5221, 5076)]


def test_disjointify_z_plane():
    z2 = ZdGroup(2)
    sets, rep = disjointify(z_boxes(z2), 2)
    assert [len(f) for f in sets] == [81, 1288]
    assert [row["m"] for row in rep.series["folner"]] == [9, 37]
    assert rep.all_exact_passed


def test_disjointify_heisenberg_box():
    h = HeisenbergGroup()
    sets, rep = disjointify(heisenberg_boxes(h), 1)
    assert [len(f) for f in sets] == [20736]
    row = rep.series["folner"][0]
    assert row["m"] == 12 and row["left"] == "409/1728" == row["right"]
    assert rep.all_exact_passed


def test_heisenberg_ratio_against_raw_multiplication():
    """Recompute the m=12 box ratio from the bare group law."""
    m = 12
    s = {(a, b, c) for a in range(m) for b in range(m) for c in range(m * m)}

    def mul(g, h):
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])

    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    worst_left = max(
        Fraction(len({mul(g, e) for e in s} ^ s), len(s)) for g in gens
    )
    assert worst_left == Fraction(409, 1728)
    h = HeisenbergGroup()
    lib = worst_ratios(h, finset(h, sorted(s)))
    assert lib["left"] == worst_left


def test_wreath_rectangles_scan_documents_failure():
    grp = WreathGroup(CyclicGroup(2))
    fam = wreath_rectangles(grp)
    with pytest.raises(FolnerSearchError) as exc:
        disjointify(fam, 1)
    assert "index cap" in str(exc.value)
    best = exc.value.best
    assert best["m"] == 10
    assert best["left"] == Fraction(11, 10)
    assert best["right"] == Fraction(1, 5)
    # left translation by the shift keeps moving a constant mass fraction,
    # so the left ratio never drops below 1 on these rectangles
    assert best["left"] > 1 > best["right"]


def test_family_size_prediction_guard():
    z = ZdGroup(1)
    honest = z_boxes(z)
    lying = FolnerFamily(ctx=z, name="off-by-one", build=honest.build,
                         size=lambda m: m + 1, max_index=100)
    with pytest.raises(SchemeError, match="size prediction"):
        disjointify(lying, 1)


def test_symmetric_vector_values_and_norm():
    z2 = ZdGroup(2)
    f = finset(z2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    v = symmetric_vector(z2, [f])
    assert v.evaluate((0, 0)) == Rad.rational(Fraction(1, 2))
    assert v.evaluate((5, 5)) == Rad.rational(Fraction(0))
    assert v.norm_sq(1) == Fraction(1)

    z = ZdGroup(1)
    sets, _ = disjointify(z_boxes(z), 3)
    xi = symmetric_vector(z, sets)
    assert xi.evaluate((0,)) == Rad.inv_sqrt(9)
    assert xi.n_pieces == 3
    # each piece contributes |F_n| * (1/|F_n|) = 1
    for n in (1, 2, 3):
        assert xi.norm_sq(n) == Fraction(n)


def test_symmetric_vector_translation_bound():
    """||xi - s xi||^2 <= sum_n |sF_n symdiff F_n| / |F_n| <= sum_n 1/n^2."""
    z = ZdGroup(1)
    sets, _ = disjointify(z_boxes(z), 3)
    xi = symmetric_vector(z, sets)
    ratio_sum = sum(Fraction(2, len(f)) for f in sets)
    budget = sum(Fraction(1, n * n) for n in (1, 2, 3))
    for side in ("left", "right"):
        for g in z.gens:
            d = diff_norm_sq(xi, side, g)
            assert d <= Rad.rational(ratio_sum)
            assert d <= Rad.rational(budget)
    # the interval family is sharp enough that the rational part of the
    # squared difference equals the ratio sum and the cross terms only
    # subtract (each is -2ab with a, b >= 0)
    d = diff_norm_sq(xi, "left", z.s_o)
    assert 0 < float(d) < float(ratio_sum)
