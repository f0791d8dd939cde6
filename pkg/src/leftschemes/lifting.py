"""Lifting scheme windows through group extensions.

An extension is a quotient map q: G -> Q with kernel N, packaged with a
set-theoretic lift of Q into G. A section aligned with the displacement
generator is assembled over each finite window; the kernel-valued cocycle
alpha(s, d) = tau(q(s) d)^-1 s tau(d) measures how far the lift is from a
homomorphism, and kernel Folner sets absorb it. Lifted sets are products
tau(D) K, and the displacement and level structure descend exactly.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .groups import (
    DirectProductGroup,
    Elem,
    FinSet,
    GroupCtx,
    GroupError,
    HeisenbergGroup,
    ZdGroup,
    boundary_ratio,
    finset,
    set_algebra,
    set_translate,
)
from .report import VerifyReport, fmt_q
from .scheme import SchemeError, SchemeWindow


@dataclass
class ExtensionData:
    """A short exact sequence N -> G -> Q with a chosen set-theoretic lift."""

    name: str
    g_ctx: GroupCtx
    q_ctx: GroupCtx
    n_ctx: GroupCtx
    project: Callable[[tuple], tuple]
    embed: Callable[[tuple], tuple]
    lift: Callable[[tuple], tuple]
    kernel_coords: Callable[[tuple], tuple]

    def project_elem(self, g: Elem) -> Elem:
        self.g_ctx.check_member(g)
        return Elem(self.q_ctx.group_id, self.q_ctx.canon_coords(self.project(g.coords)))

    def embed_elem(self, n: Elem) -> Elem:
        self.n_ctx.check_member(n)
        return Elem(self.g_ctx.group_id, self.g_ctx.canon_coords(self.embed(n.coords)))

    def lift_elem(self, d) -> Elem:
        coords = d.coords if isinstance(d, Elem) else self.q_ctx.canon_coords(d)
        return Elem(self.g_ctx.group_id, self.g_ctx.canon_coords(self.lift(coords)))

    def in_kernel(self, g: Elem) -> bool:
        return self.project_elem(g).coords == self.q_ctx.identity_coords()

    def kernel_elem(self, g: Elem) -> Elem:
        """The N-coordinates of a kernel element, checked against embed."""
        if not self.in_kernel(g):
            raise SchemeError("element %r is not in the kernel" % (g.coords,))
        n = Elem(self.n_ctx.group_id, self.n_ctx.canon_coords(self.kernel_coords(g.coords)))
        if self.embed_elem(n).coords != g.coords:
            raise SchemeError("kernel_coords does not invert embed at %r" % (g.coords,))
        return n

    def check(self, samples: int = 200, seed: int = 5) -> VerifyReport:
        """Exact spot checks that the three maps form an extension."""
        from random import Random

        rng = Random(seed)
        rep = VerifyReport(title="extension " + self.name)
        g, q, n = self.g_ctx, self.q_ctx, self.n_ctx

        def rand_g():
            word = [rng.choice(g.gens) for _ in range(rng.randrange(1, 8))]
            out = g.identity
            for s in word:
                out = g.mul(out, s)
            return out

        def rand_n():
            word = [rng.choice(n.gens) for _ in range(rng.randrange(1, 8))]
            out = n.identity
            for s in word:
                out = n.mul(out, s)
            return out

        ok_hom = all(
            self.project_elem(g.mul(a, b)).coords
            == q.mul_coords(self.project_elem(a).coords, self.project_elem(b).coords)
            for a, b in ((rand_g(), rand_g()) for _ in range(samples))
        )
        rep.add("project", "multiplicative on samples", "exact", ok_hom)
        ok_embed = True
        for _ in range(samples):
            a, b = rand_n(), rand_n()
            ea, eb = self.embed_elem(a), self.embed_elem(b)
            if self.embed_elem(n.mul(a, b)).coords != g.mul(ea, eb).coords:
                ok_embed = False
            if not self.in_kernel(ea):
                ok_embed = False
        rep.add("embed", "multiplicative, lands in kernel", "exact", ok_embed)
        ok_sect = all(
            self.project_elem(self.lift_elem(d)).coords == d.coords
            for d in (self.project_elem(rand_g()) for _ in range(samples))
        )
        rep.add("lift", "right inverse of project", "exact", ok_sect)
        if q.s_o is not None:
            rep.add("marker", "lift of the quotient marker displaces", "exact",
                    self.project_elem(self.lift_elem(q.s_o)).coords == q.s_o.coords,
                    lhs=str(self.lift_elem(q.s_o).coords), rhs=str(q.s_o.coords))
        return rep


def direct_product_extension(q_ctx: GroupCtx, n_ctx: GroupCtx,
                             twist_seed: Optional[str] = None) -> ExtensionData:
    """G = Q x N with first-factor projection.

    With a twist seed the lift picks a hash-dependent kernel component
    instead of the identity, which exercises section independence; this
    needs the kernel finite so the hash can index its elements.
    """
    g_ctx = DirectProductGroup(q_ctx, n_ctx)
    e_n = n_ctx.identity_coords()

    if twist_seed is None:
        def lift(d):
            return (d, e_n)
    else:
        if not n_ctx.is_finite():
            raise SchemeError("twisted lifts need a finite kernel")
        options = [h.coords for h in n_ctx.elements()]

        def lift(d):
            digest = hashlib.sha256((twist_seed + repr(d)).encode()).digest()
            return (d, options[digest[0] % len(options)])

    def kernel_coords(c):
        if c[0] != q_ctx.identity_coords():
            raise SchemeError("not a kernel element")
        return c[1]

    name = "dp(%s,%s)" % (q_ctx.group_id, n_ctx.group_id)
    if twist_seed is not None:
        name += "+twist"
    return ExtensionData(
        name=name,
        g_ctx=g_ctx,
        q_ctx=q_ctx,
        n_ctx=n_ctx,
        project=lambda c: c[0],
        embed=lambda nc: (q_ctx.identity_coords(), nc),
        lift=lift,
        kernel_coords=kernel_coords,
    )


def heis_center_extension() -> ExtensionData:
    """The integer Heisenberg group over its center, quotient Z^2.

    The flat lift (a, b) -> (a, b, 0) has the nontrivial cocycle
    alpha(y, (a, b)) = z^a, which is what the kernel Folner sets absorb.
    """
    g_ctx = HeisenbergGroup()
    q_ctx = ZdGroup(2)
    n_ctx = ZdGroup(1)

    def kernel_coords(c):
        if c[0] != 0 or c[1] != 0:
            raise SchemeError("not a central element")
        return (c[2],)

    return ExtensionData(
        name="heisenberg/center",
        g_ctx=g_ctx,
        q_ctx=q_ctx,
        n_ctx=n_ctx,
        project=lambda c: (c[0], c[1]),
        embed=lambda nc: (0, 0, nc[0]),
        lift=lambda d: (d[0], d[1], 0),
        kernel_coords=kernel_coords,
    )


# ---------------------------------------------------------------------------
# Sections aligned with the displacement generator
# ---------------------------------------------------------------------------


@dataclass
class Section:
    """tau on a finite window of Q, equivariant along marker orbits.

    Every point decomposes as s_o^level * rep with the rep at level zero,
    and tau(point) = s_o_g^level * lift(rep); two points on the same orbit
    therefore lift compatibly and the induced marker cocycle vanishes.
    """

    ext: ExtensionData
    s_o_g: Elem
    table: dict = field(default_factory=dict)

    def covers(self, d) -> bool:
        coords = d.coords if isinstance(d, Elem) else self.ext.q_ctx.canon_coords(d)
        return coords in self.table

    def tau(self, d) -> Elem:
        coords = d.coords if isinstance(d, Elem) else self.ext.q_ctx.canon_coords(d)
        got = self.table.get(coords)
        if got is None:
            raise SchemeError("section range does not cover %r" % (coords,))
        return Elem(self.ext.g_ctx.group_id, got)


def build_section(ext: ExtensionData, points) -> Section:
    q = ext.q_ctx
    g = ext.g_ctx
    if q.s_o is None:
        raise SchemeError("quotient has no marker; cannot align a section")
    s_o_g = ext.lift_elem(q.s_o)
    so_inv = q.inv(q.s_o)
    sect = Section(ext=ext, s_o_g=s_o_g)
    for d in points:
        coords = d.coords if isinstance(d, Elem) else q.canon_coords(d)
        if coords in sect.table:
            continue
        level = q.gamma_level(Elem(q.group_id, coords))
        rep = q.mul_coords(q.power(so_inv, level).coords, coords)
        lifted = g.mul(g.power(s_o_g, level), ext.lift_elem(rep))
        sect.table[coords] = lifted.coords
    return sect


def cocycle_alpha(ext: ExtensionData, sect: Section, s: Elem, d) -> Elem:
    """alpha(s, d) = tau(q(s) d)^-1 * s * tau(d), returned in N."""
    g, q = ext.g_ctx, ext.q_ctx
    g.check_member(s)
    d_coords = d.coords if isinstance(d, Elem) else q.canon_coords(d)
    target = q.mul_coords(ext.project_elem(s).coords, d_coords)
    moved = g.mul(s, sect.tau(d_coords))
    a = g.mul(g.inv(sect.tau(target)), moved)
    return ext.kernel_elem(a)


def kernel_folner(ext: ExtensionData, alphas: list[Elem], eps: Fraction,
                  size_cap: int = 500_000) -> FinSet:
    """The first K in N (by size) with |aK symdiff K|/|K| <= eps for every a.

    Finite kernels take the whole group, integer lattices take boxes of
    doubling side; the bound is verified exactly before returning.
    """
    n = ext.n_ctx
    eps = Fraction(eps)
    for a in alphas:
        n.check_member(a)
    if n.is_finite():
        return finset(n, [h.coords for h in n.elements()])
    if n.kind != "zd":
        raise SchemeError("no kernel Folner family for kind %r" % n.kind)
    side = 1
    last = None
    while side ** n.d <= size_cap:
        keys = _zd_box(n.d, side)
        k_set = finset(n, keys)
        worst = max(
            (boundary_ratio(n, "left", a, k_set) for a in alphas),
            default=Fraction(0),
        )
        if worst <= eps:
            return k_set
        last = (side, worst)
        side *= 2
    detail = ""
    if last is not None:
        detail = "; worst cocycle ratio %s at side %d" % (fmt_q(last[1]), last[0])
    raise SchemeError("kernel box search exhausted at size cap %d%s"
                      % (size_cap, detail))


def _zd_box(d: int, side: int) -> list:
    out = [()]
    for _ in range(d):
        out = [c + (v,) for c in out for v in range(side)]
    return out


# ---------------------------------------------------------------------------
# Lifting sets and whole windows
# ---------------------------------------------------------------------------


def sample_alphas(ext: ExtensionData, sect: Section, d_set: FinSet,
                  gens: list[Elem], cap: Optional[int] = None) -> set:
    """Distinct cocycle values alpha(s, d) over D, optionally strided."""
    q = ext.q_ctx
    d_sorted = sorted(d_set.keys)
    if cap is not None and len(d_sorted) > cap:
        d_sorted = d_sorted[:: max(1, len(d_sorted) // cap)]
    out = set()
    for s in gens:
        s_bar = ext.project_elem(s)
        for d in d_sorted:
            moved = q.mul_coords(s_bar.coords, d)
            if sect.covers(moved):
                out.add(cocycle_alpha(ext, sect, s, d).coords)
    return out


def lift_set(ext: ExtensionData, d_set: FinSet, s_bar_o: Elem, eps: Fraction,
             gens: Optional[list[Elem]] = None,
             marker_powers: tuple = (1, 2, 4, 8, 16),
             alpha_cap: Optional[int] = None,
             kernel_cap: int = 500_000,
             sect: Optional[Section] = None,
             k_set: Optional[FinSet] = None,
             ) -> tuple[FinSet, FinSet, VerifyReport, dict]:
    """tau(D) K for the first admissible kernel set, with all conclusions.

    Requires D s_bar_o disjoint from D; anything else is rejected before
    any lifting happens. The kernel set K is searched in increasing size
    until the sampled cocycle disturbance drops under eps, and the lifted
    set E = tau(D) K is then verified exactly: it projects onto D with
    |E| = |D||K|, the lifted marker still displaces E off itself, each
    generator ratio is at most the base ratio plus the worst cocycle
    disturbance of K, and every marker power moves E by exactly the base
    count times |K|, fibering over the base difference set. Returns
    (E, K, report, generator ratios).
    """
    g, q, n = ext.g_ctx, ext.q_ctx, ext.n_ctx
    if d_set.group_id != q.group_id:
        raise GroupError("lift_set wants D over the quotient group")
    q.check_member(s_bar_o)
    if q.s_o is None or s_bar_o.coords != q.s_o.coords:
        raise SchemeError("sections are aligned with the quotient marker; "
                          "got a different displacement element")
    base_disp = len(set_algebra(
        d_set, set_translate(q, "right", s_bar_o, d_set), "intersect"))
    if base_disp != 0:
        raise SchemeError("D s_o meets D in %d points; the base set is not "
                          "displaced" % base_disp)
    if gens is None:
        gens = [ext.lift_elem(s) for s in q.gens]

    if sect is None:
        cover = set(d_set.keys)
        for s in gens:
            cover |= set_translate(q, "left", ext.project_elem(s), d_set).keys
        sect = build_section(ext, sorted(cover))
    if k_set is None:
        alphas = sample_alphas(ext, sect, d_set, gens, cap=alpha_cap)
        k_set = kernel_folner(
            ext, [Elem(n.group_id, a) for a in alphas], eps, size_cap=kernel_cap)
    elif k_set.group_id != n.group_id:
        raise GroupError("k_set must live in the kernel group")

    rep = VerifyReport(title="lifted set")
    embedded = [ext.embed_elem(Elem(n.group_id, c)) for c in k_set]
    keys = set()
    for d in d_set:
        td = sect.tau(d)
        for ke in embedded:
            keys.add(g.mul(td, ke).coords)
    lifted = FinSet(g.group_id, frozenset(keys))

    proj = {ext.project(c) for c in lifted.keys}
    rep.add("projection", "q(E) = D", "exact",
            {q.canon_coords(c) for c in proj} == set(d_set.keys),
            lhs="|q(E)| = %d" % len(proj), rhs="|D| = %d" % len(d_set))
    rep.add("size", "|E| = |D| |K|", "exact",
            len(lifted) == len(d_set) * len(k_set),
            lhs=str(len(lifted)), rhs="%d x %d" % (len(d_set), len(k_set)))

    disp = len(set_algebra(
        lifted, set_translate(g, "right", sect.s_o_g, lifted), "intersect"))
    rep.add("displacement", "E s_o upstairs", "exact", disp == 0,
            lhs="|E s_o and E| = %d" % disp, rhs="0")

    ratios = {}
    for s in gens:
        s_bar = ext.project_elem(s)
        base = boundary_ratio(q, "left", s_bar, d_set)
        alphas = sample_alphas(ext, sect, d_set, [s], cap=alpha_cap)
        worst = max(
            (boundary_ratio(n, "left", Elem(n.group_id, a), k_set)
             for a in alphas),
            default=Fraction(0),
        )
        got = boundary_ratio(g, "left", s, lifted)
        ratios[g.elem_label(s)] = got
        rep.add("ratio", g.elem_label(s), "exact", got <= base + worst,
                lhs=fmt_q(got),
                rhs="<= %s + %s" % (fmt_q(base), fmt_q(worst)))

    for k in marker_powers:
        t = g.power(sect.s_o_g, k)
        t_bar = q.power(s_bar_o, k)
        diff = set_algebra(set_translate(g, "left", t, lifted), lifted, "symdiff")
        base_diff = set_algebra(
            set_translate(q, "left", t_bar, d_set), d_set, "symdiff")
        want = len(base_diff) * len(k_set)
        rep.add("marker-count", "k=%d" % k, "exact", len(diff) == want,
                lhs=str(len(diff)), rhs="%d (base count x |K|)" % want)
        proj_diff = {q.canon_coords(ext.project(c)) for c in diff.keys}
        rep.add("marker-image", "k=%d" % k, "exact",
                proj_diff == set(base_diff.keys),
                lhs="|q(diff)| = %d" % len(proj_diff),
                rhs="|base diff| = %d" % len(base_diff))
    return lifted, k_set, rep, ratios


def lift_scheme(ext: ExtensionData, base: SchemeWindow,
                eps: Optional[list[Fraction]] = None,
                marker_powers: tuple = (1, 2, 4, 8, 16),
                alpha_sample_cap: int = 4096,
                size_cap: int = 4_000_000) -> tuple[SchemeWindow, VerifyReport]:
    """Lift a whole window along the extension.

    Kernel boxes K_n are sized so the sampled cocycle disturbance stays
    under eps_n (default 1/n^2); every claimed conclusion is then verified
    exactly on the lifted sets, so an undersized sample can only surface
    as a failed row, never as a silently weakened one.
    """
    g, q = ext.g_ctx, ext.q_ctx
    if base.ctx.group_id != q.group_id:
        raise GroupError("base window lives on %s, extension quotient is %s"
                         % (base.ctx.group_id, q.group_id))
    n_max = base.n_max
    if eps is None:
        eps = [Fraction(1, (n + 1) ** 2) for n in range(n_max)]
    if len(eps) != n_max:
        raise SchemeError("need one eps per window level")

    rep = VerifyReport(title="lifted scheme " + ext.name)
    rep.extend(ext.check())

    gen_lifts = [ext.lift_elem(s) for s in base.gens]
    window_pts: set = set()
    for d_set in base.sets:
        window_pts |= d_set.keys
        for s_bar in base.gens:
            window_pts |= set_translate(q, "left", s_bar, d_set).keys
    sect = build_section(ext, sorted(window_pts))

    lifted_sets = []
    k_sizes = []
    budgets: dict = {}
    for i, d_set in enumerate(base.sets):
        lifted, k_set, set_rep, ratios = lift_set(
            ext, d_set, q.s_o, eps[i], gens=gen_lifts,
            marker_powers=marker_powers, alpha_cap=alpha_sample_cap,
            sect=sect)
        k_sizes.append(len(k_set))
        if len(lifted) > size_cap:
            raise SchemeError("lifted level %d exceeds the size cap" % (i + 1))
        for row in set_rep.rows:
            rep.add(row.check, "E_%d %s" % (i + 1, row.subject), row.kind,
                    row.passed, lhs=row.lhs, rhs=row.rhs, witness=row.witness)
        lifted_sets.append(lifted)

        for s, s_bar in zip(gen_lifts, base.gens):
            label = g.elem_label(s)
            got = ratios[label]
            base_ratio = boundary_ratio(q, "left", s_bar, d_set)
            budgets.setdefault(label, []).append(fmt_q(base_ratio + eps[i]))
            rep.add("budget", "E_%d %s" % (i + 1, label), "exact",
                    got <= base_ratio + eps[i],
                    lhs=fmt_q(got), rhs="<= %s + %s" % (fmt_q(base_ratio), fmt_q(eps[i])))

    params = {
        "builder": "lifted:" + ext.name,
        "base_builder": base.params.get("builder", ""),
        "eps": [fmt_q(x) for x in eps],
        "K_sizes": k_sizes,
        "budgets": budgets,
    }
    if base.a_seq() is not None:
        params["A"] = base.a_seq()
    lifted_w = SchemeWindow(
        ctx=g,
        s_o=sect.s_o_g,
        gens=gen_lifts,
        sets=lifted_sets,
        params=params,
        kappa=base.kappa,
    )
    return lifted_w, rep
