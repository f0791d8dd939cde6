"""Extensions, aligned sections, kernel absorption, and window lifts."""
from __future__ import annotations

from fractions import Fraction

import pytest

from leftschemes import (
    CyclicGroup,
    GroupError,
    HeisenbergGroup,
    SchemeError,
    build_section,
    cocycle_alpha,
    direct_product_extension,
    extension_from_config,
    finset,
    heis_center_extension,
    kernel_folner,
    lift_scheme,
    lift_set,
    phi_partial,
    sample_alphas,
    verify_scheme,
)


@pytest.fixture(scope="module")
def central():
    return heis_center_extension()


def test_direct_product_extension_maps():
    ext = direct_product_extension(HeisenbergGroup(), CyclicGroup(2))
    rep = ext.check()
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    g = ext.g_ctx.make(((1, 2, 3), (1,)))
    assert ext.project_elem(g).coords == (1, 2, 3)
    n = ext.n_ctx.make((1,))
    assert ext.embed_elem(n).coords == ((0, 0, 0), (1,))
    assert ext.kernel_elem(ext.embed_elem(n)).coords == (1,)
    with pytest.raises(SchemeError, match="kernel"):
        ext.kernel_elem(g)


def test_central_extension_check(central):
    rep = central.check()
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    assert central.project((2, 5, -7)) == (2, 5)
    assert central.lift((2, 5)) == (2, 5, 0)
    z = central.g_ctx.make((0, 0, 4))
    assert central.kernel_elem(z).coords == (4,)


def test_section_is_marker_equivariant(central):
    q = central.q_ctx
    pts = [(a, b) for a in range(-2, 5) for b in range(-2, 3)]
    sect = build_section(central, pts)
    for d in [(0, 0), (-2, 1), (1, 2)]:
        moved = q.mul_coords((2, 0), d)
        want = central.g_ctx.mul(
            central.g_ctx.power(sect.s_o_g, 2), sect.tau(d))
        assert sect.tau(moved).coords == want.coords
    with pytest.raises(SchemeError, match="cover"):
        sect.tau((9, 9))


def test_cocycle_alpha_of_flat_lift(central):
    """The flat Heisenberg lift has alpha(y, (a, b)) = z^a, alpha(x, .) = e."""
    q = central.q_ctx
    pts = [(a, b) for a in range(-4, 5) for b in range(-4, 5)]
    sect = build_section(central, pts)
    y = central.g_ctx.make((0, 1, 0))
    x = central.g_ctx.make((1, 0, 0))
    for a, b in [(0, 0), (3, 1), (-2, 2), (1, -3)]:
        assert cocycle_alpha(central, sect, y, (a, b)).coords == (a,)
        assert cocycle_alpha(central, sect, x, (a, b)).coords == (0,)
    d_set = finset(q, [(a, b) for a in range(3) for b in range(3)])
    vals = sample_alphas(central, sect, d_set, [x, y])
    assert vals == {(0,), (1,), (2,)}


def test_kernel_folner_boxes(central):
    n = central.n_ctx
    alphas = [n.make((1,)), n.make((3,))]
    k = kernel_folner(central, alphas, Fraction(1, 4))
    # sides double, and 6/16 > 1/4 >= 6/32 picks the side-32 box
    assert len(k) == 32
    with pytest.raises(SchemeError, match="exhausted"):
        kernel_folner(central, alphas, Fraction(1, 10 ** 9), size_cap=4096)
    ext = direct_product_extension(HeisenbergGroup(), CyclicGroup(2))
    whole = kernel_folner(ext, [], Fraction(1, 2))
    assert whole.keys == {(0,), (1,)}


def test_lift_set_rejects_bad_input(central):
    q = central.q_ctx
    with pytest.raises(SchemeError, match="not\\s+displaced"):
        lift_set(central, finset(q, [(0, 0), (1, 0)]), q.s_o, Fraction(1, 2))
    with pytest.raises(SchemeError, match="displacement"):
        lift_set(central, finset(q, [(0, 0)]), q.make((0, 1)), Fraction(1, 2))
    with pytest.raises(GroupError, match="quotient"):
        lift_set(central, finset(central.g_ctx, [(0, 0, 0)]), q.s_o,
                 Fraction(1, 2))


def test_lift_set_conclusions(central):
    q = central.q_ctx
    d_set = finset(q, [(0, 0), (0, 1), (0, 2)])
    lifted, k_set, rep, ratios = lift_set(central, d_set, q.s_o,
                                          Fraction(1, 2))
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    assert len(lifted) == len(d_set) * len(k_set)
    assert set(ratios) == {"x", "x^-1", "y", "y^-1"}
    checks = {r.check for r in rep.rows}
    assert {"projection", "size", "displacement", "ratio",
            "marker-count", "marker-image"} <= checks


def test_lift_scheme_over_direct_product(heis_small):
    ext = extension_from_config(
        {"Q": {"kind": "heisenberg"}, "N": {"kind": "cyclic", "params": {"m": 2}}})
    lifted, rep = lift_scheme(ext, heis_small, marker_powers=(1, 2, 4))
    assert rep.all_exact_passed, [r.to_obj() for r in rep.failures()]
    assert lifted.params["K_sizes"] == [2, 2]
    assert [len(e) for e in lifted.sets] == [2 * len(e) for e in heis_small.sets]
    vrep = verify_scheme(lifted, shift_bound=4)
    assert vrep.all_exact_passed, [r.to_obj() for r in vrep.failures()]
    # Phi descends exactly through the projection
    for k in range(-16, 17):
        up = phi_partial(lifted, lifted.ctx.power(lifted.s_o, k))
        down = phi_partial(heis_small, heis_small.ctx.power(heis_small.s_o, k))
        assert up == down


def test_lift_scheme_twist_independent(heis_small):
    plain = extension_from_config(
        {"Q": {"kind": "heisenberg"}, "N": {"kind": "cyclic", "params": {"m": 2}}})
    twisted = extension_from_config(
        {"Q": {"kind": "heisenberg"}, "N": {"kind": "cyclic", "params": {"m": 2}},
         "twist": "salt-1"})
    lifted_a, rep_a = lift_scheme(plain, heis_small, marker_powers=(1, 2))
    lifted_b, rep_b = lift_scheme(twisted, heis_small, marker_powers=(1, 2))
    assert rep_b.all_exact_passed, [r.to_obj() for r in rep_b.failures()]
    # generator labels depend on the twisted lift, the verdicts must not
    rows_a = [(r.check, r.passed) for r in rep_a.rows]
    rows_b = [(r.check, r.passed) for r in rep_b.rows]
    assert rows_a == rows_b
    counts_a = [(r.subject, r.lhs, r.rhs) for r in rep_a.rows
                if r.check == "marker-count"]
    counts_b = [(r.subject, r.lhs, r.rhs) for r in rep_b.rows
                if r.check == "marker-count"]
    assert counts_a == counts_b
    assert [len(e) for e in lifted_a.sets] == [len(e) for e in lifted_b.sets]
    for k in (1, 2, 5):
        assert (phi_partial(lifted_a, lifted_a.ctx.power(lifted_a.s_o, k))
                == phi_partial(lifted_b, lifted_b.ctx.power(lifted_b.s_o, k)))
