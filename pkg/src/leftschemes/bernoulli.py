"""Nonsingular Bernoulli measures driven by scheme windows.

The marginal at a point of F_n is 1/2 + eps/sqrt(|F_n|) and 1/2 elsewhere.
Cylinder probabilities, pushforwards under the translation actions and
Hellinger-type sums are computed exactly; square roots of marginals are
never taken, only the certified rational brackets around them.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from random import Random
from typing import Optional

from .groups import Elem, FinSet, GroupCtx, GroupError
from .radicals import RAD_ONE, RAD_ZERO, Rad, exp_bounds, exp_lt
from .report import VerifyReport, fmt_q
from .scheme import SchemeError, SchemeWindow, phi_from_a, phi_partial, require_leftsch

HALF = Fraction(1, 2)


def delta_gate(delta: Fraction) -> tuple[Fraction, bool]:
    """The band constant delta^-2 + delta^-1 (1-delta)^-2, checked against 16."""
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise SchemeError("delta must lie in (0, 1)")
    val = 1 / delta ** 2 + 1 / (delta * (1 - delta) ** 2)
    return val, val < 16


def eps_gate(eps: Fraction, q: Fraction) -> bool:
    """Certified decision of exp(32 eps^2) < q, the recurrence compatibility."""
    eps = Fraction(eps)
    q = Fraction(q)
    if eps <= 0 or q <= 1:
        raise SchemeError("need eps > 0 and q > 1")
    return exp_lt(32 * eps * eps, q)


@dataclass
class ProductMeasure:
    """Product measure on {0,1}^G with stepped marginals over a window."""

    ctx: GroupCtx
    pieces: list[FinSet]
    eps: Fraction

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        if not 0 < self.eps <= Fraction(1, 6):
            raise SchemeError("eps must lie in (0, 1/6] to keep marginals in [1/3, 2/3]")
        seen: set = set()
        self._index: dict = {}
        self._values: list[Rad] = []
        for n, f in enumerate(self.pieces):
            if f.group_id != self.ctx.group_id:
                raise GroupError("piece from %s, ctx %s" % (f.group_id, self.ctx.group_id))
            if seen & f.keys:
                raise SchemeError("measure pieces must be pairwise disjoint")
            seen |= f.keys
            for c in f.keys:
                self._index[c] = n
            self._values.append(Rad.rational(HALF)
                                + Rad.rational(self.eps) * Rad.inv_sqrt(len(f)))
        self._half = Rad.rational(HALF)

    @staticmethod
    def from_window(w: SchemeWindow, eps: Fraction) -> "ProductMeasure":
        require_leftsch(w)
        return ProductMeasure(ctx=w.ctx, pieces=list(w.sets), eps=eps)

    @property
    def domain(self) -> set:
        return set(self._index)

    def piece_of(self, coords) -> Optional[int]:
        return self._index.get(coords)

    def marginal(self, coords) -> Rad:
        n = self._index.get(coords)
        return self._half if n is None else self._values[n]

    def band_check(self) -> VerifyReport:
        rep = VerifyReport(title="marginal-band")
        hi = HALF + self.eps
        ok = True
        wit = ""
        for n, f in enumerate(self.pieces):
            v = self._values[n]
            if not (Rad.rational(HALF) <= v and v <= Rad.rational(hi)):
                ok = False
                wit = "piece %d: %s" % (n + 1, v)
        rep.add("band", "marginals in [1/2, 1/2+eps]", "exact", ok,
                lhs="eps = " + fmt_q(self.eps), rhs="band [1/2, %s]" % fmt_q(hi),
                witness=wit)
        rep.add("band", "band inside [1/3, 2/3]", "exact",
                Fraction(1, 3) <= HALF and hi <= Fraction(2, 3),
                lhs="[1/2, %s]" % fmt_q(hi), rhs="subset of [1/3, 2/3]")
        val, ok16 = delta_gate(Fraction(1, 3))
        rep.add("band", "band constant", "exact", ok16,
                lhs=fmt_q(val), rhs="< 16")
        return rep


# ---------------------------------------------------------------------------
# Cylinders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cylinder:
    """Finitely many pinned coordinates: ((coords, bit), ...) sorted."""

    group_id: str
    constraints: tuple

    def __post_init__(self):
        seen = {}
        for c, b in self.constraints:
            if b not in (0, 1):
                raise SchemeError("cylinder bits must be 0 or 1")
            if c in seen and seen[c] != b:
                raise SchemeError("contradictory cylinder at %r" % (c,))
            seen[c] = b
        object.__setattr__(self, "constraints",
                           tuple(sorted(seen.items())))

    def window(self) -> list:
        return [c for c, _ in self.constraints]


def cylinder(ctx: GroupCtx, items) -> Cylinder:
    cons = []
    for c, b in items:
        if isinstance(c, Elem):
            ctx.check_member(c)
            cons.append((c.coords, int(b)))
        else:
            cons.append((ctx.canon_coords(c), int(b)))
    return Cylinder(group_id=ctx.group_id, constraints=tuple(cons))


def cylinder_prob(mu: ProductMeasure, cyl: Cylinder) -> Rad:
    if cyl.group_id != mu.ctx.group_id:
        raise GroupError("cylinder from %s, measure on %s" % (cyl.group_id, mu.ctx.group_id))
    out = RAD_ONE
    for c, b in cyl.constraints:
        p = mu.marginal(c)
        out = out * (p if b else Rad.rational(1) - p)
    return out


def cylinder_pullback(ctx: GroupCtx, side: str, g: Elem, cyl: Cylinder) -> Cylinder:
    """The preimage of a cylinder under the translation of configurations.

    Left action (g omega)(h) = omega(g^-1 h) pins g^-1 w to the old bit at w;
    right action (omega g)(h) = omega(h g) pins w g. Either way both
    translations compose covariantly, so pullbacks compose contravariantly.
    """
    ctx.check_member(g)
    if cyl.group_id != ctx.group_id:
        raise GroupError("cylinder from %s, ctx %s" % (cyl.group_id, ctx.group_id))
    gi = ctx.inv(g)
    cons = []
    for c, b in cyl.constraints:
        e = Elem(ctx.group_id, c)
        if side == "left":
            cons.append((ctx.mul(gi, e).coords, b))
        elif side == "right":
            cons.append((ctx.mul(e, g).coords, b))
        else:
            raise GroupError("side must be 'left' or 'right', got %r" % side)
    return Cylinder(group_id=ctx.group_id, constraints=tuple(cons))


def translated_marginal(mu: ProductMeasure, side: str, g: Elem, coords) -> Rad:
    """The marginal of the translated measure at a point.

    Pushing mu forward along the left translation gives the marginal
    p(g^-1 h) at h; along the right translation, p(h g).
    """
    ctx = mu.ctx
    e = Elem(ctx.group_id, ctx.canon_coords(coords))
    if side == "left":
        back = ctx.mul(ctx.inv(g), e)
    elif side == "right":
        back = ctx.mul(e, g)
    else:
        raise GroupError("side must be 'left' or 'right', got %r" % side)
    return mu.marginal(back.coords)


def pushforward_check(mu: ProductMeasure, side: str, g: Elem,
                      cyl: Cylinder) -> VerifyReport:
    """Exact equality of mu(pullback of C) with the translated-marginal product."""
    lhs = cylinder_prob(mu, cylinder_pullback(mu.ctx, side, g, cyl))
    rhs = RAD_ONE
    for c, b in cyl.constraints:
        p = translated_marginal(mu, side, g, c)
        rhs = rhs * (p if b else Rad.rational(1) - p)
    rep = VerifyReport(title="pushforward")
    rep.add("pushforward", "%s %s, %d pins" % (side, mu.ctx.elem_label(g),
                                               len(cyl.constraints)),
            "exact", (lhs - rhs).is_zero,
            lhs=str(float(lhs)), rhs=str(float(rhs)),
            witness="" if (lhs - rhs).is_zero else repr(cyl.constraints))
    return rep


def pushforward_window_check(mu: ProductMeasure, side: str, g: Elem,
                             window: list, max_atoms: int = 64) -> VerifyReport:
    """Exact coherence checks for the translated measure on a finite window.

    Verifies that atom masses over the window sum to one, that pulled-back
    cylinders multiply out to the translated marginals, that pullback
    composes along products, and that no atom has zero mass on either side.
    """
    ctx = mu.ctx
    ctx.check_member(g)
    rep = VerifyReport(title="pushforward-window")
    pts = [ctx.canon_coords(c) if not isinstance(c, Elem) else c.coords
           for c in window]
    if len(pts) > 16:
        raise SchemeError("window too large for atom enumeration")
    atoms = []
    for bits in iter_product((0, 1), repeat=len(pts)):
        atoms.append(Cylinder(ctx.group_id, tuple(zip(pts, bits))))
        if len(atoms) > max_atoms:
            raise SchemeError("too many atoms; shrink the window")
    total = RAD_ZERO
    moved_total = RAD_ZERO
    pos_ok = True
    prod_ok = True
    wit = ""
    for atom in atoms:
        m = cylinder_prob(mu, atom)
        pre = cylinder_pullback(ctx, side, g, atom)
        mp = cylinder_prob(mu, pre)
        total = total + m
        moved_total = moved_total + mp
        if not (RAD_ZERO < m and RAD_ZERO < mp):
            pos_ok = False
        # The pushforward marginal at w is the source marginal at the
        # pulled-back point; multiplying those must give the same mass.
        direct = RAD_ONE
        for c, b in atom.constraints:
            p = translated_marginal(mu, side, g, c)
            direct = direct * (p if b else Rad.rational(1) - p)
        if not (mp - direct).is_zero:
            prod_ok = False
            if not wit:
                wit = repr(atom.constraints)
    rep.add("mass", "sum over atoms", "exact", (total - RAD_ONE).is_zero,
            lhs=str(float(total)), rhs="1")
    rep.add("mass", "sum over pulled-back atoms", "exact",
            (moved_total - RAD_ONE).is_zero, lhs=str(float(moved_total)), rhs="1")
    rep.add("positivity", "all atoms", "exact", pos_ok,
            lhs="both mu and pullback masses", rhs="> 0")
    rep.add("product", "pullback multiplies translated marginals", "exact",
            prod_ok, witness=wit)
    h = ctx.s_o if ctx.s_o is not None else g
    comp_ok = True
    for atom in atoms[:8]:
        once = cylinder_pullback(ctx, side, h, cylinder_pullback(ctx, side, g, atom))
        both = cylinder_pullback(ctx, side, ctx.mul(g, h), atom)
        if once != both:
            comp_ok = False
    rep.add("composition", "pullback along a product", "exact", comp_ok,
            lhs="pullback(h, pullback(g, C))", rhs="pullback(g h, C)")
    return rep


# ---------------------------------------------------------------------------
# Hellinger sums and the Kakutani-type bounds
# ---------------------------------------------------------------------------


def hellinger_bracket(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Rational constants r1 <= r2 with r1 (p-q)^2 <= hell(p,q) <= r2 (p-q)^2.

    Uses (sqrt(p)+sqrt(q))^2 in [4 lo, 4 hi] for p, q in [lo, hi] (the lower
    end by AM-GM, the upper end by convexity), and the matching range for
    the complements.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if not 0 < lo <= hi < 1:
        raise SchemeError("need 0 < lo <= hi < 1")
    r1 = Fraction(1, 4) / hi + Fraction(1, 4) / (1 - lo)
    r2 = Fraction(1, 4) / lo + Fraction(1, 4) / (1 - hi)
    return r1, r2


@dataclass
class HellingerSum:
    """Grouped marginal pairs (p, q, multiplicity) with certified bounds."""

    pairs: list[tuple[Rad, Rad, int]]
    band: tuple[Fraction, Fraction]

    def sq_gap(self) -> Rad:
        """sum multiplicity * (p - q)^2, exact."""
        out = RAD_ZERO
        for p, q, cnt in self.pairs:
            d = p - q
            if not d.is_zero:
                out = out + d * d * Rad.rational(cnt)
        return out

    def lower(self) -> Rad:
        r1, _ = hellinger_bracket(*self.band)
        return Rad.rational(r1) * self.sq_gap()

    def upper(self) -> Rad:
        _, r2 = hellinger_bracket(*self.band)
        return Rad.rational(r2) * self.sq_gap()


def kakutani_pairs(mu: ProductMeasure, side: str, g: Elem,
                   restrict_to_domain: bool = False,
                   n_trunc: Optional[int] = None) -> HellingerSum:
    """Marginal pairs of mu against its g-translate, grouped by piece pair.

    For the left action the translated marginal at h is p(g^-1 h); for the
    right action it is p(h g). With restrict_to_domain only base points in
    the union of the first n_trunc pieces are counted (a lower-bound
    restriction, the ball of the displacement argument).
    """
    ctx = mu.ctx
    ctx.check_member(g)
    mul = ctx.mul_coords
    gi = ctx.inv_coords(g.coords)
    counts: dict = {}
    upto = len(mu.pieces) if n_trunc is None else n_trunc
    if not 0 <= upto <= len(mu.pieces):
        raise SchemeError("n_trunc beyond the measure's pieces")
    base_points: set = set()
    for f in mu.pieces[:upto]:
        base_points |= f.keys
    if not restrict_to_domain:
        # Points whose translated marginal is stepped also contribute.
        for c in list(base_points):
            if side == "left":
                back = mul(g.coords, c)
            else:
                back = mul(c, gi)
            base_points.add(back)
    for c in base_points:
        here = mu.piece_of(c)
        if side == "left":
            moved = mu.piece_of(mul(gi, c))
        else:
            moved = mu.piece_of(mul(c, g.coords))
        if here == moved:
            continue
        key = (here, moved)
        counts[key] = counts.get(key, 0) + 1
    vals = {None: Rad.rational(HALF)}
    for n in range(len(mu.pieces)):
        vals[n] = mu.marginal(next(iter(mu.pieces[n].keys)))
    pairs = [(vals[a], vals[b], cnt) for (a, b), cnt in sorted(
        counts.items(), key=lambda kv: (str(kv[0]), kv[1]))]
    return HellingerSum(pairs=pairs, band=(HALF, HALF + mu.eps))


def kakutani_sum(mu: ProductMeasure, side: str, g: Elem,
                 n_trunc: Optional[int] = None) -> HellingerSum:
    """Hellinger pairs of mu against its g-translate over a piece ball."""
    return kakutani_pairs(mu, side, g, restrict_to_domain=True, n_trunc=n_trunc)


def kakutani_report(mu: ProductMeasure, w: SchemeWindow) -> VerifyReport:
    """The two-sided contrast: right displacement mass vs left Phi control."""
    rep = VerifyReport(title="kakutani")
    ctx = mu.ctx
    n_pieces = len(mu.pieces)
    hs = kakutani_pairs(mu, "right", ctx.s_o, restrict_to_domain=True)
    floor = Rad.rational(Fraction(7, 8) * mu.eps ** 2 * n_pieces)
    rep.add("right-displacement", "s_o, domain restricted", "exact",
            floor <= hs.lower(),
            lhs="lower bound " + str(float(hs.lower())),
            rhs=">= 7/8 * eps^2 * N = " + str(float(floor)))
    exact_n = hs.sq_gap()
    rep.add("right-displacement", "squared gap", "exact",
            (exact_n - Rad.rational(mu.eps ** 2 * n_pieces)).is_zero,
            lhs=str(float(exact_n)), rhs="eps^2 * N exactly")
    for s in w.gens:
        hs = kakutani_pairs(mu, "left", s)
        phi = phi_partial(w, s)
        cap = Rad.rational(Fraction(5, 4) * mu.eps ** 2 * phi)
        rep.add("left-control", w.gen_label(s), "exact", hs.upper() <= cap,
                lhs="upper bound " + str(float(hs.upper())),
                rhs="<= 5/4 * eps^2 * Phi = " + str(float(cap)))
    return rep


# ---------------------------------------------------------------------------
# Conservativity diagnostic
# ---------------------------------------------------------------------------


def conservativity_diagnostic(w: SchemeWindow, eps: Fraction,
                              k_powers: Optional[list[int]] = None,
                              shift_bound: int = 8,
                              exp_terms: int = 24,
                              delta: Fraction = Fraction(1, 3)) -> VerifyReport:
    """Partial sums of sum_k exp(-16 eps^2 Phi(s_o^k)) at doubling cutoffs.

    Phi(s_o^k) is enumerated exactly for |k| <= shift_bound and continued by
    the verified level formula 2 sum_n min(|k|/A_n, 1) beyond; each increment
    is bounded below by certified exponential enclosures, so the reported
    growth is a true lower bound. Also records the two entrance gates: the
    step-size gate at the given delta and, when the window declares a
    recurrence exponent, the comparison 16 eps^2 < kappa.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise SchemeError("eps must be nonnegative")
    a_seq = w.a_seq()
    if a_seq is None:
        raise SchemeError("window lacks a level sequence; no shift formula")
    if k_powers is None:
        k_powers = [2 ** j for j in range(5, 13)]
    rep = VerifyReport(title="conservativity")
    rep.meta["eps"] = fmt_q(eps)
    coef = 16 * eps * eps

    gate_val, gate_ok = delta_gate(delta)
    rep.add("gate", "step constant at delta=" + fmt_q(delta), "exact", gate_ok,
            lhs=fmt_q(gate_val), rhs="< 16")
    if w.kappa is not None:
        if w.kappa.kind == "rational":
            rep.add("gate", "16 eps^2 < kappa", "exact", coef < w.kappa.value,
                    lhs=fmt_q(coef), rhs=fmt_q(w.kappa.value))
        else:
            # kappa = log(q)/2, so the gate reads exp(32 eps^2) < q,
            # trivially met at eps = 0.
            ok = eps == 0 or eps_gate(eps, w.kappa.value)
            rep.add("gate", "exp(32 eps^2) < q", "exact", ok,
                    lhs="exp(" + fmt_q(2 * coef) + ")", rhs=fmt_q(w.kappa.value))

    def phi_at(k: int) -> tuple[Fraction, str]:
        if abs(k) <= shift_bound:
            return phi_partial(w, w.ctx.power(w.s_o, k)), "enumerated"
        return phi_from_a(k, a_seq), "A-formula"

    def exp_neg(t: Fraction) -> tuple[Fraction, Fraction]:
        if t == 0:
            return Fraction(1), Fraction(1)
        lo, hi = exp_bounds(t, terms=exp_terms)
        return 1 / hi, 1 / lo

    lower = Fraction(0)
    upper = Fraction(0)
    order = [0]
    for j in range(1, max(k_powers) + 1):
        order += [j, -j]
    partials = []
    idx = 0
    prev_upper = None
    for cutoff in k_powers:
        while idx < len(order) and abs(order[idx]) <= cutoff:
            k = order[idx]
            phi, _ = phi_at(k)
            lo, hi = exp_neg(coef * phi)
            lower += lo
            upper += hi
            idx += 1
        delta_lower = None if prev_upper is None else lower - prev_upper
        partials.append((cutoff, lower, upper, delta_lower))
        rep.series.setdefault("exp_partial", []).append({
            "K": cutoff,
            "exp_sum": str(float(lower)),
            "exp_sum_upper": str(float(upper)),
            "delta": "" if delta_lower is None else str(float(delta_lower)),
        })
        prev_upper = upper
    for k1, k2, delta_lower in (
            (p1[0], p2[0], p2[3]) for p1, p2 in zip(partials, partials[1:])):
        # True increment between cutoffs is at least (lower at K2) - (upper at K1).
        rep.add("exp-growth", "K=%d -> %d" % (k1, k2), "exact",
                delta_lower >= 1,
                lhs="delta lower bound %.4f" % float(delta_lower),
                rhs=">= 1")
    sample = [0, 1, shift_bound, shift_bound + 1, 4 * max(a_seq)]
    for k in sample:
        phi, src = phi_at(k)
        rep.add("phi-source", "k=%d" % k, "info", None,
                lhs="Phi = " + fmt_q(phi), rhs=src)
    return rep


# ---------------------------------------------------------------------------
# Exact-threshold sampling
# ---------------------------------------------------------------------------


def sample(mu: ProductMeasure, window: FinSet, seed: int) -> Cylinder:
    """One deterministic configuration over the window, as a pinned cylinder.

    Each bit is u < p with u a 64-bit dyadic rational, decided exactly
    against the irrational marginal. Coordinates are drawn in sorted window
    order, so equal seeds give equal cylinders.
    """
    ctx = mu.ctx
    if window.group_id != ctx.group_id:
        raise GroupError("window from %s, measure on %s"
                         % (window.group_id, ctx.group_id))
    rng = Random(seed)
    pins = []
    for c in sorted(window.keys):
        u = Fraction(rng.getrandbits(64), 1 << 64)
        p = mu.marginal(c)
        pins.append((c, 1 if Rad.rational(u) < p else 0))
    return Cylinder(window.group_id, tuple(pins))


def sample_configs(mu: ProductMeasure, seed: int, count: int) -> list[dict]:
    """Deterministic samples of the coordinates over the measure's domain."""
    win = FinSet(mu.ctx.group_id, frozenset(mu.domain))
    return [dict(sample(mu, win, seed * 1000003 + j).constraints)
            for j in range(count)]
