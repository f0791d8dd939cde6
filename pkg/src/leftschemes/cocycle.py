"""Square-summable difference vectors built from scheme windows.

A step vector is a finite weighted sum of indicator functions of pairwise
disjoint finite sets. Difference norms under left and right translation are
computed exactly in the real quadratic field generated by the weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .groups import Elem, FinSet, GroupCtx, GroupError, conjugacy_class, set_translate
from .radicals import RAD_ZERO, Rad
from .report import VerifyReport, fmt_q
from .scheme import (SchemeError, SchemeWindow, phi_partial, rearrange,
                     require_leftsch)


@dataclass
class StepVector:
    """v = sum_n w_n 1_(F_n) with the F_n pairwise disjoint."""

    ctx: GroupCtx
    pieces: list[tuple[FinSet, Rad]]

    def __post_init__(self):
        seen: set = set()
        for f, w in self.pieces:
            if f.group_id != self.ctx.group_id:
                raise GroupError("piece from %s, ctx %s" % (f.group_id, self.ctx.group_id))
            if not f.keys:
                raise SchemeError("step vector pieces must be nonempty")
            if seen & f.keys:
                raise SchemeError("step vector pieces must be pairwise disjoint")
            seen |= f.keys
        self._support = seen

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    def support_size(self) -> int:
        return len(self._support)

    def evaluate(self, coords) -> Rad:
        for f, w in self.pieces:
            if coords in f.keys:
                return w
        return RAD_ZERO

    def norm_sq(self, n_trunc: Optional[int] = None) -> Rad:
        out = RAD_ZERO
        for f, w in self.pieces[:n_trunc]:
            out = out + w * w * Rad.rational(len(f))
        return out


def asym_cocycle(w: SchemeWindow) -> StepVector:
    """The asymmetric vector sum_n |F_n|^(-1/2) 1_(F_n) of a verified window."""
    require_leftsch(w)
    pieces = [(f, Rad.inv_sqrt(len(f))) for f in w.sets]
    return StepVector(ctx=w.ctx, pieces=pieces)


def step_vector(ctx: GroupCtx, sets: list[FinSet]) -> StepVector:
    """sum_n |F_n|^(-1/2) 1_(F_n) without the scheme precondition."""
    return StepVector(ctx=ctx, pieces=[(f, Rad.inv_sqrt(len(f))) for f in sets])


def diff_norm_sq(v: StepVector, side: str, g: Elem, n_trunc: Optional[int] = None,
                 support_only: bool = False) -> Rad:
    """The squared norm of (translate of v by g) - v, truncated to n_trunc pieces.

    side 'left' uses the left regular action (1_F goes to 1_(gF)); side
    'right' uses the right regular action (1_F goes to 1_(F g^-1)). With
    support_only the difference is first restricted to the union of the
    pieces' supports, the domain used by displacement lower bounds.
    """
    ctx = v.ctx
    ctx.check_member(g)
    pieces = v.pieces[:n_trunc]
    orig: dict = {}
    for n, (f, _) in enumerate(pieces):
        for c in f.keys:
            orig[c] = n
    trans: dict = {}
    for n, (f, _) in enumerate(pieces):
        if side == "left":
            t = set_translate(ctx, "left", g, f)
        elif side == "right":
            t = set_translate(ctx, "right", ctx.inv(g), f)
        else:
            raise GroupError("side must be 'left' or 'right', got %r" % side)
        for c in t.keys:
            trans[c] = n
    counts: dict = {}
    for c in set(orig) | set(trans):
        if support_only and c not in orig:
            continue
        pair = (trans.get(c), orig.get(c))
        counts[pair] = counts.get(pair, 0) + 1
    out = RAD_ZERO
    weights = [w for _, w in pieces]
    for (ti, oi), cnt in counts.items():
        wt = weights[ti] if ti is not None else RAD_ZERO
        wo = weights[oi] if oi is not None else RAD_ZERO
        d = wt - wo
        if not d.is_zero:
            out = out + d * d * Rad.rational(cnt)
    return out


def phi_norm_identity(v: StepVector, g: Elem) -> tuple[Rad, Fraction]:
    """Left difference norm and the boundary-ratio sum it must equal.

    For v = sum |F_n|^(-1/2) 1_(F_n) with all translates gF_n disjoint from
    the other pieces, the squared left difference norm is exactly
    sum_n |gF_n symdiff F_n| / |F_n|.
    """
    ctx = v.ctx
    total = Fraction(0)
    for f, _ in v.pieces:
        t = set_translate(ctx, "left", g, f)
        total += Fraction(len(t.keys ^ f.keys), len(f))
    return diff_norm_sq(v, "left", g), total


def cocycle_norm_report(w: SchemeWindow) -> VerifyReport:
    """Exact translate-difference norms of the window's step vector.

    The window is rearranged first if it has not been already; on the
    rearranged sets the right marker difference counts exactly one unit per
    piece on the support (two in full), while each generator's left
    difference collapses to the boundary-ratio sum, which stays under the
    declared budgets when the window carries them.
    """
    if not w.params.get("leftsch_verified"):
        w = rearrange(w)
    v = asym_cocycle(w)
    rep = VerifyReport(title="cocycle-norms")
    rep.meta["group"] = w.ctx.group_id
    for n in range(1, v.n_pieces + 1):
        got = diff_norm_sq(v, "right", w.s_o, n_trunc=n, support_only=True)
        rep.add("right-support", "N=%d" % n, "exact",
                (got - Rad.rational(n)).is_zero, lhs=str(got), rhs=str(n))
    full = diff_norm_sq(v, "right", w.s_o)
    rep.add("right-full", "N=%d" % v.n_pieces, "exact",
            (full - Rad.rational(2 * v.n_pieces)).is_zero,
            lhs=str(full), rhs=str(2 * v.n_pieces))
    for s in w.gens:
        lab = w.gen_label(s)
        left = diff_norm_sq(v, "left", s)
        phi = phi_partial(w, s)
        rep.add("left-identity", "s=%s" % lab, "exact",
                (left - Rad.rational(phi)).is_zero,
                lhs=str(left), rhs="Phi_N = " + fmt_q(phi))
        budgets = [w.budget(lab, n) for n in range(1, w.n_max + 1)]
        if any(b is None for b in budgets):
            rep.add("left-budget", "s=%s" % lab, "info", None, lhs=str(left),
                    rhs="no declared budget")
        else:
            total = sum(budgets, start=Fraction(0))
            rep.add("left-budget", "s=%s" % lab, "exact",
                    left <= Rad.rational(total),
                    lhs=str(left), rhs="<= " + fmt_q(total))
    return rep


# ---------------------------------------------------------------------------
# The infinite dihedral contrast
# ---------------------------------------------------------------------------


def dihedral_eta(coords) -> Rad:
    """eta(r^m) = 1/sqrt(m) for m > 0, 0 otherwise; eta(r^m s) = eta(r^-m)."""
    m, flip = coords
    if flip:
        m = -m
    if m <= 0:
        return RAD_ZERO
    return Rad.inv_sqrt(m)


def dihedral_right_partial(m_max: int) -> Fraction:
    """Mass of (right translate by s of eta) - eta over 1 <= |m| <= m_max.

    Every term is rational: the flip swaps the ray carrying 1/sqrt(m) with
    the dead ray, so each base point contributes exactly 1/|m|. The total is
    4 * (1 + 1/2 + ... + 1/m_max), which diverges with m_max.
    """
    total = Fraction(0)
    for m in range(1, m_max + 1):
        for sign in (1, -1):
            for flip in (0, 1):
                here = dihedral_eta((sign * m, flip))
                moved = dihedral_eta(_dihedral_right_s((sign * m, flip)))
                d = moved - here
                sq = d * d
                if not sq.is_rational:
                    raise SchemeError("right dihedral term is not rational")
                total += sq.rational_value()
    return total


def _dihedral_right_s(coords):
    m, flip = coords
    return (m, flip ^ 1)


def dihedral_left_partial(m_max: int) -> tuple[Rad, Fraction, bool]:
    """Successive differences along the ray: sum (1/sqrt(m+1) - 1/sqrt(m))^2.

    Returns the exact partial sum, the telescoping rational majorant
    1 - 1/(m_max + 1), and whether every term was certified below its
    majorant term 1/m - 1/(m+1) (which proves the full series sums below 1).
    """
    acc: dict = {}
    dominated = True
    for m in range(1, m_max + 1):
        d = Rad.inv_sqrt(m + 1) - Rad.inv_sqrt(m)
        term = d * d
        for rad, coeff in term.terms():
            acc[rad] = acc.get(rad, Fraction(0)) + coeff
        if dominated:
            major = Rad.rational(Fraction(1, m) - Fraction(1, m + 1))
            if not (term <= major):
                dominated = False
    return Rad(acc), Fraction(1, 1) - Fraction(1, m_max + 1), dominated


# ---------------------------------------------------------------------------
# Obstructions: finite conjugacy classes and virtually cyclic groups
# ---------------------------------------------------------------------------


def fc_window_bound(ctx: GroupCtx, s_o: Elem, e: FinSet,
                    class_cap: int = 10_000) -> VerifyReport:
    """|E| <= |E s_o intersect E| + sum over the class of s_o of |cE symdiff E|.

    E s_o is covered by the conjugate translates cE, so displaced windows
    force the class boundary sum to reach |E|; on a group where the class is
    finite this contradicts summability of the ratios.
    """
    rep = VerifyReport(title="fc-window-bound")
    k = conjugacy_class(ctx, s_o, cap=class_cap)
    rep.meta["class_size"] = len(k)
    rhs = 0
    for c in k.elems(ctx):
        t = set_translate(ctx, "left", c, e)
        rhs += len(t.keys ^ e.keys)
    disp = set_translate(ctx, "right", s_o, e)
    inter = len(disp.keys & e.keys)
    rep.add("fc-bound", "|E|=%d" % len(e), "exact", len(e) <= inter + rhs,
            lhs="|E| = %d" % len(e),
            rhs="|Es_o^E| + class sum = %d + %d" % (inter, rhs))
    if len(k) == 1:
        lt = set_translate(ctx, "left", s_o, e)
        rep.add("fc-central", "s_o central", "exact", lt.keys == disp.keys,
                lhs="s_o E", rhs="E s_o")
        if inter == 0:
            ratio = Fraction(rhs, len(e))
            rep.add("fc-displaced", "displaced window", "exact", ratio >= 1,
                    lhs="class boundary ratio " + fmt_q(ratio), rhs=">= 1")
    return rep


def fc_transfer_check(v: StepVector, g: Elem, cls: FinSet) -> VerifyReport:
    """Right difference norm at g against the class boundary sum.

    Rewriting hg as (h g h^-1) h pushes the right translate through left
    translates by conjugates, so over any set containing the conjugacy
    class of g the bound ||rho(g^-1) v - v||^2 <= sum_c ||lambda(c) v - v||^2
    holds. The class set is validated to contain g and to be closed under
    conjugation by the generators, which pins the whole class inside it.
    A central g (singleton class) turns the bound into an equality.
    """
    ctx = v.ctx
    ctx.check_member(g)
    if cls.group_id != ctx.group_id:
        raise GroupError("class from %s, vector over %s"
                         % (cls.group_id, ctx.group_id))
    if g.coords not in cls.keys:
        raise SchemeError("the class set does not contain the element itself")
    for c in cls.keys:
        for s in ctx.gens:
            conj = ctx.mul_coords(
                ctx.mul_coords(s.coords, c), ctx.inv_coords(s.coords))
            if conj not in cls.keys:
                raise SchemeError(
                    "class set is not closed under conjugation by %s at %r"
                    % (ctx.elem_label(s), c))
    rep = VerifyReport(title="fc-transfer")
    lhs = diff_norm_sq(v, "right", ctx.inv(g))
    rhs = RAD_ZERO
    for c in sorted(cls.keys):
        rhs = rhs + diff_norm_sq(v, "left", Elem(ctx.group_id, c))
    rep.add("transfer", "class of size %d" % len(cls), "exact", lhs <= rhs,
            lhs=str(lhs), rhs="<= " + str(rhs))
    if len(cls) == 1:
        rep.add("transfer", "central element", "exact",
                (lhs - rhs).is_zero, lhs=str(lhs), rhs=str(rhs))
    return rep


def virtually_cyclic_obstruction(ctx: GroupCtx, sets: list[FinSet],
                                 class_cap: int = 10_000) -> VerifyReport:
    """The window bound along every candidate displacement direction.

    On the infinite dihedral group the flips have order two (no displacement
    direction at all) and the rotations have two-element conjugacy classes,
    so each displaced window already carries class boundary ratio >= 1.
    """
    rep = VerifyReport(title="virtually-cyclic-obstruction")
    s_o = ctx.s_o
    k = conjugacy_class(ctx, s_o, cap=class_cap)
    rep.add("class", "of s_o", "info", None, lhs="size %d" % len(k), rhs="finite")
    for i, e in enumerate(sets, start=1):
        sub = fc_window_bound(ctx, s_o, e, class_cap=class_cap)
        for row in sub.rows:
            rep.add(row.check, "set %d: %s" % (i, row.subject), row.kind,
                    row.passed, lhs=row.lhs, rhs=row.rhs, witness=row.witness)
        disp = set_translate(ctx, "right", s_o, e)
        if not (disp.keys & e.keys):
            total = sum(
                len(set_translate(ctx, "left", c, e).keys ^ e.keys)
                for c in k.elems(ctx)
            )
            rep.add("class-ratio", "set %d displaced" % i, "exact",
                    Fraction(total, len(e)) >= 1,
                    lhs="sum_c |cE symdiff E|/|E| = " + fmt_q(Fraction(total, len(e))),
                    rhs=">= 1")
    return rep


def dinf_no_scheme_check(ctx: GroupCtx, e: FinSet) -> VerifyReport:
    """|s_o E intersect E| <= 2 |K| sum_(c in K) |cE symdiff E| for displaced E.

    Here K is the finite normal subgroup with infinite dihedral quotient:
    trivial for the dihedral group itself, the embedded right factor for a
    product of it with a finite group. The set must satisfy E s_o disjoint
    from E (anything else is rejected); conjugating the rotation past each
    point flips it to s_o^(+-1) times a K-element, which bounds the left
    overlap by kernel boundary terms. Trivial K collapses the bound to
    s_o E missing E entirely.
    """
    if e.group_id != ctx.group_id:
        raise GroupError("set from %s, ctx %s" % (e.group_id, ctx.group_id))
    s_o = ctx.s_o
    if s_o is None:
        raise SchemeError("context has no displacement generator")
    if ctx.kind == "dihedral":
        kernel = [ctx.identity]
    elif (ctx.kind == "direct_product" and ctx.left.kind == "dihedral"
          and ctx.right.is_finite()):
        kernel = [ctx.embed_right(h) for h in ctx.right.elements()]
    else:
        raise SchemeError(
            "no finite normal subgroup with dihedral quotient recognized "
            "for kind %r" % ctx.kind)
    overlap_right = len(set_translate(ctx, "right", s_o, e).keys & e.keys)
    if overlap_right != 0:
        raise SchemeError("E s_o meets E in %d points; the bound needs a "
                          "displaced set" % overlap_right)
    rep = VerifyReport(title="dinf-no-scheme")
    rep.meta["kernel_size"] = len(kernel)
    lhs = len(set_translate(ctx, "left", s_o, e).keys & e.keys)
    total = sum(
        len(set_translate(ctx, "left", c, e).keys ^ e.keys) for c in kernel)
    rep.add("dinf-bound", "|E| = %d" % len(e), "exact",
            lhs <= 2 * len(kernel) * total,
            lhs="|s_o E and E| = %d" % lhs,
            rhs="<= 2 * %d * %d" % (len(kernel), total))
    if len(kernel) == 1:
        rep.add("dinf-sharp", "trivial kernel", "exact", lhs == 0,
                lhs="|s_o E and E| = %d" % lhs, rhs="0")
    return rep
