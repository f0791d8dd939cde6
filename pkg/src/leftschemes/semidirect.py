"""Semidirect products H x| Z and the tower construction of left schemes.

The base group H is handled through a small oracle interface (multiplication,
inversion, powers of the defining automorphism phi). Tower windows are built
as E_n = union over levels l in [0, A_n) of phi^l(R_n) * s_o^l, and the
defining identities are re-verified exactly from the base sets R_n.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .groups import (
    Elem,
    FinSet,
    GroupCtx,
    GroupError,
    boundary_count,
    set_translate,
)
from .report import VerifyReport, fmt_q
from .scheme import KappaDecl, SchemeError, SchemeWindow

MAX_SET_SIZE = 2_000_000


class BaseOracle:
    """Abstract base-group handle: elements are canonical hashable keys."""

    group_id: str = "base"

    def identity(self):
        raise NotImplementedError

    def mul(self, h1, h2):
        raise NotImplementedError

    def inv(self, h):
        raise NotImplementedError

    def phi_pow(self, h, a: int):
        """Apply the defining automorphism a times (negative a inverts)."""
        raise NotImplementedError

    def canon(self, h):
        raise NotImplementedError

    def t_elems(self) -> list[tuple[str, object]]:
        """The finite symmetric subset T of H used as lamp/translation gens."""
        raise NotImplementedError

    def h_to_json(self, h):
        raise NotImplementedError

    def h_from_json(self, obj):
        raise NotImplementedError


class WreathBase(BaseOracle):
    """H = direct sum over Z of a lamp group A; keys are sorted support maps."""

    def __init__(self, lamp: GroupCtx):
        if not (lamp.is_finite() or lamp.kind == "zd"):
            raise GroupError("wreath lamp group must be finite or zd, got %s" % lamp.kind)
        self.lamp = lamp
        self.group_id = "wreathbase(%s)" % lamp.group_id

    def identity(self):
        return ()

    def canon(self, h):
        e = self.lamp.identity_coords()
        items = tuple(sorted((int(p), self.lamp.canon_coords(v)) for p, v in h if
                             self.lamp.canon_coords(v) != e))
        return items

    def mul(self, h1, h2):
        e = self.lamp.identity_coords()
        acc = dict(h1)
        for p, v in h2:
            cur = acc.get(p, e)
            nv = self.lamp.mul_coords(cur, v)
            if nv == e:
                acc.pop(p, None)
            else:
                acc[p] = nv
        return tuple(sorted(acc.items()))

    def inv(self, h):
        return tuple(sorted((p, self.lamp.inv_coords(v)) for p, v in h))

    def phi_pow(self, h, a):
        # phi shifts configurations so that phi^-l(delta_0) = delta_l.
        return tuple(sorted((p - a, v) for p, v in h))

    def t_elems(self):
        return [("lamp:" + lab, ((0, g.coords),))
                for lab, g in zip(self.lamp.gen_labels, self.lamp.gens)]

    def h_to_json(self, h):
        return [[p, list(v)] for p, v in h]

    def h_from_json(self, obj):
        return self.canon((p, tuple(v)) for p, v in obj)

    def delta(self, pos: int, val) -> tuple:
        return self.canon(((pos, val),))


class DyadicBase(BaseOracle):
    """H = Z[1/d] with phi(h) = d*h; keys are (num, exp) with d not dividing num."""

    def __init__(self, d: int):
        if d < 2:
            raise GroupError("baumslag_solitar needs d >= 2")
        self.d = d
        self.group_id = "dyadic:%d" % d

    def identity(self):
        return (0, 0)

    def canon(self, h):
        num, exp = int(h[0]), int(h[1])
        if num == 0:
            return (0, 0)
        while num % self.d == 0:
            num //= self.d
            exp += 1
        return (num, exp)

    def mul(self, h1, h2):
        n1, e1 = h1
        n2, e2 = h2
        if n1 == 0:
            return h2
        if n2 == 0:
            return h1
        m = min(e1, e2)
        num = n1 * self.d ** (e1 - m) + n2 * self.d ** (e2 - m)
        return self.canon((num, m))

    def inv(self, h):
        return (-h[0], h[1])

    def phi_pow(self, h, a):
        if h[0] == 0:
            return (0, 0)
        return (h[0], h[1] + a)

    def t_elems(self):
        return [("b", (1, 0)), ("b^-1", (-1, 0))]

    def h_to_json(self, h):
        return [h[0], h[1]]

    def h_from_json(self, obj):
        return self.canon((obj[0], obj[1]))


class SemidirectGroup(GroupCtx):
    """G = H x| Z with coords (h_key, shift) in the normal form h * s_o^shift."""

    kind = "semidirect"

    def __init__(self, base: BaseOracle, s_o_labels: tuple[str, str] = ("t", "t^-1")):
        super().__init__()
        self.base = base
        self.group_id = "sd(%s)" % base.group_id
        e = base.identity()
        pairs = [(s_o_labels[0], (e, 1)), (s_o_labels[1], (e, -1))]
        pairs += [(lab, (h, 0)) for lab, h in base.t_elems()]
        self._set_gens(pairs, s_o_label=s_o_labels[0])

    def identity_coords(self):
        return (self.base.identity(), 0)

    def mul_coords(self, a, b):
        # (h1 s^a1)(h2 s^a2) = h1 phi^a1(h2) s^(a1+a2) with phi = conj by s_o.
        h1, a1 = a
        h2, a2 = b
        return (self.base.mul(h1, self.base.phi_pow(h2, a1)), a1 + a2)

    def inv_coords(self, a):
        h, k = a
        return (self.base.phi_pow(self.base.inv(h), -k), -k)

    def canon_coords(self, a):
        if len(a) != 2:
            raise GroupError("semidirect coords are (h, shift)")
        return (self.base.canon(a[0]), int(a[1]))

    def gamma_level(self, g):
        self.check_member(g)
        return g.coords[1]

    def coords_to_json(self, coords):
        return [self.base.h_to_json(coords[0]), coords[1]]

    def coords_from_json(self, obj):
        return (self.base.h_from_json(obj[0]), int(obj[1]))

    def h_elem(self, h) -> Elem:
        return Elem(self.group_id, (self.base.canon(h), 0))


class WreathGroup(SemidirectGroup):
    """A wr Z for a finite or free-abelian lamp group A."""

    kind = "wreath"

    def __init__(self, lamp: GroupCtx):
        super().__init__(WreathBase(lamp))
        self.group_id = "wreath(%s)" % lamp.group_id
        self._rebind_ids()

    def _rebind_ids(self):
        self._gens = [Elem(self.group_id, g.coords) for g in self._gens]
        if self._s_o is not None:
            self._s_o = Elem(self.group_id, self._s_o.coords)

    @property
    def lamp(self) -> GroupCtx:
        return self.base.lamp  # type: ignore[attr-defined]

    def structure(self):
        return {"base": self.lamp.to_config()}


class BSGroup(SemidirectGroup):
    """BS(1,d) = <a, b | a b a^-1 = b^d> as Z[1/d] x| Z with s_o = a."""

    kind = "baumslag_solitar"

    def __init__(self, d: int):
        super().__init__(DyadicBase(d), s_o_labels=("a", "a^-1"))
        self.group_id = "bs:%d" % d
        self._rebind_ids()

    def _rebind_ids(self):
        self._gens = [Elem(self.group_id, g.coords) for g in self._gens]
        if self._s_o is not None:
            self._s_o = Elem(self.group_id, self._s_o.coords)

    @property
    def d(self) -> int:
        return self.base.d  # type: ignore[attr-defined]

    def structure(self):
        return {"d": self.d}


# ---------------------------------------------------------------------------
# Phi for shift powers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiPower:
    """Exact truncated Phi(s_o^k) with optional full-series value and bound."""

    partial: Fraction
    full: Optional[Fraction]
    log_bound: Optional[float]


def phi_power(k: int, a_family: dict, n_max: int) -> PhiPower:
    """Phi(s_o^k) = 2 sum_n min(|k|/A_n, 1) for a declared level family.

    a_family is {"kind": "geometric", "q": int} for A_n = q^n (the full
    series then has an exact closed form) or {"kind": "list", "A": [...]}.
    """
    k = abs(k)
    if a_family.get("kind") == "geometric":
        q = int(a_family["q"])
        if q < 2:
            raise SchemeError("geometric level family needs integer q >= 2")
        seq = [q ** n for n in range(1, n_max + 1)]
    elif a_family.get("kind") == "list":
        seq = [int(a) for a in a_family["A"][:n_max]]
        if len(seq) < n_max:
            raise SchemeError("level list shorter than n_max")
        if any(a < 1 for a in seq):
            raise SchemeError("levels A_n must be positive")
    else:
        raise SchemeError("unknown level family %r" % (a_family,))
    partial = 2 * sum((min(Fraction(k, a), Fraction(1)) for a in seq), start=Fraction(0))
    full = None
    log_bound = None
    if a_family.get("kind") == "geometric":
        q = int(a_family["q"])
        if k == 0:
            full = Fraction(0)
        else:
            nk = 0
            while q ** (nk + 1) <= k:
                nk += 1
            # sum_{n <= nk} 1 + k * sum_{n > nk} q^-n, a geometric tail.
            full = 2 * (Fraction(nk) + Fraction(k, q ** nk) * Fraction(1, q - 1))
            log_bound = 2 * math.log(k, q) + 2 * q / (q - 1)
    return PhiPower(partial=partial, full=full, log_bound=log_bound)


# ---------------------------------------------------------------------------
# R_n providers
# ---------------------------------------------------------------------------


def wreath_rn(group: WreathGroup, k_set: list[tuple], a_o, a_n: int) -> FinSet:
    """Marker-framed configurations: endpoints pinned to a_o, interior in K.

    R_n = {eta : supp(eta) in [-1, A_n], eta(-1) = eta(A_n) = a_o,
           eta(i) in K for 0 <= i < A_n}, so |R_n| = |K|^A_n.
    """
    base: WreathBase = group.base  # type: ignore[assignment]
    lamp = base.lamp
    a_o = lamp.canon_coords(a_o)
    if a_o == lamp.identity_coords():
        raise SchemeError("marker value a_o must differ from the identity")
    kvals = [lamp.canon_coords(v) for v in k_set]
    if len(set(kvals)) != len(kvals):
        raise SchemeError("K has repeated values")
    if len(kvals) ** a_n > MAX_SET_SIZE:
        raise SchemeError("wreath R_n would have %d elements, over the cap"
                          % len(kvals) ** a_n)
    keys = []
    for interior in itertools.product(kvals, repeat=a_n):
        cfg = [(-1, a_o), (a_n, a_o)]
        cfg += [(i, v) for i, v in enumerate(interior)]
        keys.append(base.canon(cfg))
    return FinSet(base.group_id, frozenset(keys))


def lamp_folner_set(lamp: GroupCtx, n: int) -> tuple[list[tuple], Fraction]:
    """A Folner set K of the lamp group with its exact worst boundary ratio."""
    if lamp.is_finite():
        kvals = [g.coords for g in lamp.elements()]
        return kvals, Fraction(0)
    if lamp.kind == "zd":
        side = 2 ** (n + 1)
        rng = range(side)
        kvals = [tuple(p) for p in itertools.product(rng, repeat=lamp.d)]
        keys = set(kvals)
        worst = Fraction(0)
        for g in lamp.gens:
            t = {lamp.mul_coords(g.coords, c) for c in keys}
            worst = max(worst, Fraction(len(t ^ keys), len(keys)))
        return kvals, worst
    raise SchemeError("no shipped lamp Folner family for %s" % lamp.kind)


def bs_schedule(d: int, a_seq: list[int]) -> list[int]:
    """Anchors a_n = smallest integer congruent to 1 mod d keeping the
    residue progressions I_n pairwise disjoint."""
    taken: list[tuple[int, int]] = []  # closed integer intervals
    out = []
    for a_n in a_seq:
        length = d ** (2 * a_n)
        cand = 1
        while True:
            lo, hi = cand, cand + d * (length - 1)
            clash = next((iv for iv in taken if not (hi < iv[0] or lo > iv[1])), None)
            if clash is None:
                break
            cand = clash[1] + d  # next candidate = 1 mod d past the blocker
            cand -= (cand - 1) % d
        taken.append((cand, cand + d * (length - 1)))
        out.append(cand)
    return out


def bs_rn(group: BSGroup, a_n: int, anchor: int) -> FinSet:
    """R_n = {r * d^-A_n : r in I_n}, I_n = {anchor + d*j : 0 <= j < d^(2 A_n)}."""
    base: DyadicBase = group.base  # type: ignore[assignment]
    d = base.d
    if anchor % d != 1 % d:
        raise SchemeError("anchor must be 1 mod d")
    count = d ** (2 * a_n)
    if count > MAX_SET_SIZE:
        raise SchemeError("bs R_n would have %d elements, over the cap" % count)
    keys = frozenset(base.canon((anchor + d * j, -a_n)) for j in range(count))
    if len(keys) != count:
        raise SchemeError("bs R_n lost elements under canonicalization")
    return FinSet(base.group_id, keys)


# ---------------------------------------------------------------------------
# Tower build and check
# ---------------------------------------------------------------------------


@dataclass
class TowerInput:
    """Levels, base sets and declared ratio budgets for one tower window."""

    sd: SemidirectGroup
    a_seq: list[int]
    r_sets: list[FinSet]
    eps: list[Fraction]
    eps_family: dict = field(default_factory=lambda: {"kind": "explicit"})
    q: Optional[Fraction] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.a_seq) == len(self.r_sets) == len(self.eps)):
            raise SchemeError("tower input sequences must share a length")
        for e in self.eps:
            if e <= 0:
                raise SchemeError("eps entries must be positive rationals")
        for r in self.r_sets:
            if r.group_id != self.sd.base.group_id:
                raise GroupError("R_n lives in %s, base is %s"
                                 % (r.group_id, self.sd.base.group_id))


def tower_build(inp: TowerInput) -> SchemeWindow:
    """Assemble E_n = union_l phi^l(R_n) s_o^l and declare its budgets."""
    sd = inp.sd
    base = sd.base
    sets = []
    for a_n, r in zip(inp.a_seq, inp.r_sets):
        if a_n < 1:
            raise SchemeError("levels A_n must be positive")
        if a_n * len(r) > MAX_SET_SIZE:
            raise SchemeError("tower E_n would have %d elements, over the cap"
                              % (a_n * len(r)))
        keys = set()
        for l in range(a_n):
            for h in r.keys:
                keys.add((base.phi_pow(h, l), l))
        e = FinSet(sd.group_id, frozenset(keys))
        if len(e) != a_n * len(r):
            raise SchemeError("tower levels collided; phi translates of R_n overlap")
        sets.append(e)
    budgets: dict[str, list[str]] = {}
    so_budget = [fmt_q(Fraction(2, a)) for a in inp.a_seq]
    labels = [sd.elem_label(s) for s in sd.gens]
    for lab in labels:
        if lab in (labels[0], labels[1]):  # s_o and its inverse
            budgets[lab] = so_budget
        else:
            budgets[lab] = [fmt_q(e) for e in inp.eps]
    params = dict(inp.params)
    params.update({
        "builder": "tower",
        "A": list(inp.a_seq),
        "eps": [fmt_q(e) for e in inp.eps],
        "eps_family": inp.eps_family,
        "budgets": budgets,
    })
    kappa = None
    if inp.q is not None:
        params["q"] = fmt_q(inp.q)
        kappa = KappaDecl("half_log", inp.q)
    return SchemeWindow(ctx=sd, s_o=sd.s_o, gens=sd.gens, sets=sets,
                        params=params, kappa=kappa)


def _eps_total_bound(family: dict, eps: list[Fraction]) -> Optional[Fraction]:
    """A certified bound for sum_n eps_n over all n, for shipped families.

    The bound only applies when every declared eps_n is dominated by the
    family term, which is verified exactly here.
    """
    kind = family.get("kind")
    if kind == "geometric":
        c = Fraction(family["c"])
        rho = Fraction(family["rho"])
        if not 0 < rho < 1:
            return None
        if any(e > c * rho ** n for n, e in enumerate(eps, start=1)):
            return None
        return c * rho / (1 - rho)
    if kind == "pseries":
        p = int(family["p"])
        if p < 2:
            return None
        if any(e > Fraction(1, n ** p) for n, e in enumerate(eps, start=1)):
            return None
        return Fraction(p, p - 1)
    return None


def tower_check(inp: TowerInput, shift_bound: int = 6) -> VerifyReport:
    """Re-verify the tower hypotheses and identities from the base sets."""
    sd = inp.sd
    base = sd.base
    rep = VerifyReport(title="tower-check")
    rep.meta["group"] = sd.group_id
    window = tower_build(inp)

    # Hypothesis: phi^m(R_n) pairwise disjoint across n and shifts.
    translates = {}
    for n, r in enumerate(inp.r_sets, start=1):
        for m in range(-shift_bound, shift_bound + 1):
            translates[(n, m)] = frozenset(base.phi_pow(h, m) for h in r.keys)
    keys = sorted(translates)
    for i, ka in enumerate(keys):
        for kb in keys[i + 1:]:
            inter = translates[ka] & translates[kb]
            if inter:
                rep.add("phi-disjoint", "n=%d,m=%d vs n=%d,m=%d" % (*ka, *kb),
                        "exact", False, lhs=str(len(inter)), rhs="0",
                        witness=repr(sorted(inter)[0]))
    rep.add("phi-disjoint", "all pairs |m|<=%d" % shift_bound, "exact",
            not any(r.passed is False and r.check == "phi-disjoint" for r in rep.rows),
            lhs="checked %d translates" % len(keys), rhs="pairwise disjoint")

    # Hypothesis: per-level ratios |phi^-l(t) R_n symdiff R_n| <= eps_n |R_n|.
    t_list = base.t_elems()
    for n, (a_n, r, eps_n) in enumerate(zip(inp.a_seq, inp.r_sets, inp.eps), start=1):
        worst = Fraction(0)
        ok = True
        wit = ""
        level_sums: dict[str, int] = {lab: 0 for lab, _ in t_list}
        for lab, t in t_list:
            for l in range(a_n):
                tl = base.phi_pow(t, -l)
                moved = frozenset(base.mul(tl, h) for h in r.keys)
                cnt = len(moved ^ r.keys)
                level_sums[lab] += cnt
                ratio = Fraction(cnt, len(r))
                worst = max(worst, ratio)
                if ratio > eps_n:
                    ok = False
                    if not wit:
                        wit = "t=%s,l=%d: %s > %s" % (lab, l, fmt_q(ratio), fmt_q(eps_n))
        rep.add("level-ratio", "n=%d" % n, "exact", ok,
                lhs="max ratio " + fmt_q(worst), rhs="<= " + fmt_q(eps_n), witness=wit)

        # Identity: |t E_n symdiff E_n| equals the sum of level counts.
        e = window.sets[n - 1]
        for lab, t in t_list:
            g = Elem(sd.group_id, (base.canon(t), 0))
            cnt = boundary_count(sd, "left", g, e)
            rep.add("tower-identity", "t=%s,n=%d" % (lab, n), "exact",
                    cnt == level_sums[lab],
                    lhs="|tE symdiff E| = %d" % cnt,
                    rhs="sum_l |phi^-l(t)R symdiff R| = %d" % level_sums[lab])

        # Identity: |s_o^k E_n symdiff E_n| = 2 min(|k|, A_n) |R_n|.
        ok = True
        wit = ""
        for k in range(1, shift_bound + 1):
            for kk in (k, -k):
                cnt = boundary_count(sd, "left", sd.power(sd.s_o, kk), e)
                want = 2 * min(abs(kk), a_n) * len(r)
                if cnt != want:
                    ok = False
                    wit = "k=%d: %d != %d" % (kk, cnt, want)
                    break
            if not ok:
                break
        rep.add("shift-count", "n=%d" % n, "exact", ok,
                lhs="|s_o^k E symdiff E|", rhs="2*min(|k|,A_n)*|R_n|", witness=wit)

        # Orbit structure: the truncated orbit difference is the union of
        # out-of-window levels phi^l(R_n) s_o^l.
        got = set()
        for k in range(-shift_bound, shift_bound + 1):
            if k == 0:
                continue
            t = set_translate(sd, "left", sd.power(sd.s_o, k), e)
            got |= t.keys
        got -= e.keys
        want_keys = set()
        for l in range(-shift_bound, a_n + shift_bound):
            if 0 <= l < a_n:
                continue
            for h in r.keys:
                want_keys.add((base.phi_pow(h, l), l))
        rep.add("orbit-structure", "n=%d" % n, "exact", got == want_keys,
                lhs="%d elements" % len(got), rhs="%d elements" % len(want_keys))

    # Summability of the declared eps sequence.
    partial = Fraction(0)
    for n, e in enumerate(inp.eps, start=1):
        partial += e
    bound = _eps_total_bound(inp.eps_family, inp.eps)
    if bound is not None:
        rep.add("eps-sum", "n<=%d" % len(inp.eps), "exact", partial <= bound,
                lhs=fmt_q(partial), rhs="<= " + fmt_q(bound) + " (certified family bound)")
    else:
        rep.add("eps-sum", "n<=%d" % len(inp.eps), "info", None,
                lhs=fmt_q(partial), rhs="partial sum only (explicit eps list)")

    # Observed constant for box towers that declare their side profile.
    _box_constant_row(rep, inp, window, t_list)
    return rep


def _box_constant_row(rep: VerifyReport, inp: TowerInput, window: SchemeWindow,
                      t_list: list[tuple[str, object]]) -> None:
    """For towers declaring box sides, record the observed ratio constant."""
    abc = inp.params.get("abc")
    if not abc:
        return
    base = inp.sd.base
    worst_k = Fraction(0)
    for n, (a_n, r) in enumerate(zip(inp.a_seq, inp.r_sets), start=1):
        a, b, c = (Fraction(v) for v in abc[n - 1])
        denom = 1 / a + 1 / b + a / c
        if denom <= 0:
            continue
        for _, t in t_list:
            for l in range(a_n):
                tl = base.phi_pow(t, -l)
                moved = frozenset(base.mul(tl, h) for h in r.keys)
                ratio = Fraction(len(moved ^ r.keys), len(r))
                worst_k = max(worst_k, ratio / denom)
    rep.add("box-constant", "window", "info", None,
            lhs="observed K = " + fmt_q(worst_k),
            rhs="ratio / (1/A + 1/B + A/C)")


# ---------------------------------------------------------------------------
# Ready-made inputs
# ---------------------------------------------------------------------------


def level_profile(profile: str, n_max: int) -> tuple[list[int], Fraction]:
    """Level sequence A_n and growth rate q for the two shipped profiles.

    'linear' uses A_n = 2n with q = 3/2, which the growth check certifies at
    small truncation; 'doubling' uses A_n = 2^n with q = 2.
    """
    if profile == "linear":
        return [2 * n for n in range(1, n_max + 1)], Fraction(3, 2)
    if profile == "doubling":
        return [2 ** n for n in range(1, n_max + 1)], Fraction(2)
    raise SchemeError("unknown level profile %r" % profile)


def wreath_input(group: WreathGroup, a_seq: list[int],
                 q: Optional[Fraction] = None) -> TowerInput:
    """Tower input for A wr Z with marker-framed R_n over lamp Folner sets."""
    lamp = group.lamp
    a_o = lamp.gens[0].coords
    r_sets = []
    eps = []
    for n, a_n in enumerate(a_seq, start=1):
        kvals, worst = lamp_folner_set(lamp, n)
        r_sets.append(wreath_rn(group, kvals, a_o, a_n))
        eps.append(worst if worst > 0 else Fraction(1, 2 ** n))
    return TowerInput(sd=group, a_seq=list(a_seq), r_sets=r_sets, eps=eps,
                      eps_family={"kind": "geometric", "c": "1", "rho": "1/2"},
                      q=q, params={"family": "wreath"})


def bs_input(group: BSGroup, a_seq: list[int], q: Optional[Fraction] = None,
             anchors: Optional[list[int]] = None) -> TowerInput:
    """Tower input for BS(1,d); pass explicit anchors only to build bad
    (deliberately overlapping) windows for negative tests."""
    d = group.d
    if anchors is None:
        anchors = bs_schedule(d, list(a_seq))
    r_sets = [bs_rn(group, a_n, anc) for a_n, anc in zip(a_seq, anchors)]
    eps = [Fraction(2, d ** a_n) for a_n in a_seq]
    return TowerInput(sd=group, a_seq=list(a_seq), r_sets=r_sets, eps=eps,
                      eps_family={"kind": "geometric", "c": "2",
                                  "rho": fmt_q(Fraction(1, d * d))},
                      q=q, params={"family": "baumslag_solitar",
                                   "anchors": list(anchors)})
