"""Smith normal form, adapted directions, coordinate identities, box windows."""
from __future__ import annotations

from fractions import Fraction
from random import Random

import pytest

from leftschemes import (
    BoxParams,
    GroupError,
    MalcevPresentation,
    Nil2Group,
    SchemeError,
    box_count_checks,
    build_heisenberg_scheme,
    direction_check,
    find_heisenberg_direction,
    h5_presentation,
    heisenberg_box_profile,
    heisenberg_presentation,
    int_det,
    nil2_semidirect,
    nil2_split,
    nil2_tower_input,
    smith_normal_form,
    snf_check,
    tower_build,
    tower_check,
    verify_scheme,
    window_example_box,
    z_word_certificate,
)


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def det_exact(m):
    """Fraction Gaussian elimination, independent of the library's int_det."""
    n = len(m)
    a = [[Fraction(v) for v in row] for row in m]
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    out = Fraction(sign)
    for i in range(n):
        out *= a[i][i]
    assert out.denominator == 1
    return out.numerator


def assert_snf(m):
    u, d, v = smith_normal_form(m)
    assert matmul(matmul(u, m), v) == d
    assert abs(det_exact(u)) == 1
    assert abs(det_exact(v)) == 1
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    assert all(x >= 0 for x in diag)
    for i in range(len(diag) - 1):
        if diag[i + 1]:
            assert diag[i] != 0 and diag[i + 1] % diag[i] == 0
    off = [d[r][c] for r in range(len(d)) for c in range(len(d[0])) if r != c]
    assert all(x == 0 for x in off)
    assert snf_check(m, u, d, v)
    return diag


def test_snf_fixed_examples():
    assert assert_snf([[2, 4], [6, 8]]) == [2, 4]
    assert assert_snf([[1]]) == [1]
    assert assert_snf([[0, 0], [0, 0]]) == [0, 0]
    assert assert_snf([[2, 0], [0, 3]]) == [1, 6]
    assert assert_snf([[6, 10, 15]]) == [1]


def test_snf_random_matrices():
    rng = Random(20240818)
    for _ in range(200):
        rows = rng.randrange(1, 7)
        cols = rng.randrange(1, 7)
        m = [[rng.randrange(-50, 51) for _ in range(cols)] for _ in range(rows)]
        assert_snf(m)


def test_int_det_matches_fraction_elimination():
    rng = Random(4)
    for _ in range(50):
        n = rng.randrange(1, 6)
        m = [[rng.randrange(-9, 10) for _ in range(n)] for _ in range(n)]
        assert int_det(m) == det_exact(m)


def test_directions_on_shipped_presentations():
    for pres, want_mu in ((heisenberg_presentation(1), 1),
                          (heisenberg_presentation(2), 2),
                          (h5_presentation(), 1)):
        dirn = find_heisenberg_direction(pres)
        assert dirn.mu == want_mu
        rep = direction_check(dirn)
        assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]


def test_direction_refuses_abelian():
    pres = MalcevPresentation(r=2, s=1, comm={})
    with pytest.raises(GroupError):
        find_heisenberg_direction(pres)


@pytest.mark.parametrize("mu", [1, 2, 5])
def test_coordinate_identities_under_x_powers(mu):
    # Right multiplication by x^k fixes the y-coordinate and shears the
    # z-coordinate by mu * k * y.
    g = Nil2Group(heisenberg_presentation(mu))
    rng = Random(mu)
    for _ in range(300):
        a, b, c = (rng.randrange(-50, 51) for _ in range(3))
        k = rng.randrange(-40, 41)
        h = g.make(((a, b), (c,)))
        moved = g.mul(h, g.power(g.gens[0], k))
        assert moved.coords[0][1] == b
        assert moved.coords[1][0] == c + mu * k * b


def test_z_word_certificate():
    for mu in (1, 3):
        g = Nil2Group(heisenberg_presentation(mu))
        z_mu, word = z_word_certificate(g)
        assert len(word) == 4
        acc = g.identity
        for s in word:
            acc = g.mul(acc, s)
        assert acc == z_mu == g.central((mu,))


def test_box_profile_offsets():
    box = heisenberg_box_profile(4)
    assert box.a == [2, 4, 8, 16]
    assert box.b_w == [1, 4, 9, 16]
    assert box.c_h == [2, 16, 72, 256]
    assert box.offsets == [3, 17, 73, 257]
    for n in range(1, 5):
        assert box.mu * box.offsets[n - 1] > box.c_h[n - 1]
    assert window_example_box().offsets == [4]


def test_box_params_validation():
    with pytest.raises(SchemeError):
        BoxParams(a=[2], b_w=[2], c_h=[3], offsets=[2])     # mu*b <= C
    with pytest.raises(SchemeError):
        BoxParams(a=[2, 2], b_w=[2, 2], c_h=[3, 3], offsets=[4, 5])
    with pytest.raises(SchemeError):
        BoxParams(a=[2], b_w=[2], c_h=[])
    with pytest.raises(SchemeError):
        BoxParams(a=[2], b_w=[2], c_h=[3], mu=0)


def test_window_example_scheme():
    from leftschemes import HeisenbergGroup

    w = build_heisenberg_scheme(HeisenbergGroup(), window_example_box())
    assert [len(e) for e in w.sets] == [12]
    rep = verify_scheme(w, shift_bound=4)
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    counts = box_count_checks(w, shift_bound=4)
    assert counts.all_exact_passed


def test_desk_box_counts(heis_small):
    rep = box_count_checks(heis_small, shift_bound=8)
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]


def test_mu_two_scheme_builds():
    from leftschemes import build_window

    w = build_window("heisenberg", n_max=2, mu=2)
    rep = verify_scheme(w, shift_bound=4)
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]


def test_nil2_split_respects_multiplication():
    pres = heisenberg_presentation(2)
    g = Nil2Group(pres)
    sd = nil2_semidirect(pres)
    assert sd.kind == "nil2sd"
    rng = Random(11)

    def to_sd(h):
        key, lvl = nil2_split(g, h)
        return sd.make((key, lvl))

    for _ in range(100):
        a = g.make(((rng.randrange(-9, 10), rng.randrange(-9, 10)),
                    (rng.randrange(-9, 10),)))
        b = g.make(((rng.randrange(-9, 10), rng.randrange(-9, 10)),
                    (rng.randrange(-9, 10),)))
        assert sd.mul(to_sd(a), to_sd(b)) == to_sd(g.mul(a, b))


def test_nil2_tower_route():
    pres = heisenberg_presentation(1)
    inp = nil2_tower_input(pres, heisenberg_box_profile(2))
    w = tower_build(inp)
    assert [len(e) for e in w.sets] == [a * len(r) for a, r
                                        in zip(inp.a_seq, inp.r_sets)]
    chk = tower_check(inp, shift_bound=4)
    assert chk.all_exact_passed, [r.to_obj() for r in chk.failures()]
