"""Scheme windows: finite truncations of left schemes, with exact verifiers.

A window holds sets E_1..E_N over one group together with declared budgets.
verify_scheme checks the defining conditions at the truncation: displacement
(E_n s_o disjoint from E_n), generator boundary ratios against declared
budgets, disjointness of the orbit-difference sets, and the divergence trend
of the exponential series. rearrange realizes the right-translation argument
that upgrades a raw window to one with globally disjoint differences.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .groups import (
    Elem,
    FinSet,
    GroupCtx,
    GroupError,
    boundary_count,
    boundary_ratio,
    finset_from_json,
    finset_to_json,
    set_algebra,
    set_translate,
)
from .report import VerifyReport, fmt_q, parse_q

REARRANGE_SEARCH_CAP = 4096


class SchemeError(Exception):
    """Construction or verification failure on a scheme window."""


@dataclass(frozen=True)
class KappaDecl:
    """A recurrence exponent: an exact rational or log(q)/2 for rational q."""

    kind: str  # "rational" | "half_log"
    value: Fraction

    def __post_init__(self):
        if self.kind not in ("rational", "half_log"):
            raise SchemeError("kappa kind must be rational or half_log")
        if self.value <= (1 if self.kind == "half_log" else 0):
            raise SchemeError("kappa must be positive (q must exceed 1)")

    def as_float(self) -> float:
        if self.kind == "rational":
            return float(self.value)
        return math.log(float(self.value)) / 2.0

    def to_obj(self) -> dict:
        return {"kind": self.kind, "value": fmt_q(self.value)}

    @staticmethod
    def from_obj(obj) -> Optional["KappaDecl"]:
        if obj is None:
            return None
        return KappaDecl(obj["kind"], parse_q(obj["value"]))


@dataclass
class SchemeWindow:
    """Sets E_1..E_N over ctx with the displacement generator s_o."""

    ctx: GroupCtx
    s_o: Elem
    gens: list[Elem]
    sets: list[FinSet]
    params: dict = field(default_factory=dict)
    kappa: Optional[KappaDecl] = None

    def __post_init__(self):
        self.ctx.check_member(self.s_o)
        for s in self.gens:
            self.ctx.check_member(s)
        for e in self.sets:
            if e.group_id != self.ctx.group_id:
                raise GroupError("window set from %s, ctx %s" % (e.group_id, self.ctx.group_id))
            if not e.keys:
                raise SchemeError("window sets must be nonempty")
        if self.s_o.coords not in {s.coords for s in self.gens}:
            raise SchemeError("s_o must be included in the generating list S")

    @property
    def n_max(self) -> int:
        return len(self.sets)

    def gen_label(self, s: Elem) -> str:
        return self.ctx.elem_label(s)

    def budget(self, label: str, n: int) -> Optional[Fraction]:
        """Declared bound for |sE_n symdiff E_n|/|E_n|, 1-based n."""
        b = self.params.get("budgets", {}).get(label)
        if b is None or n > len(b):
            return None
        return parse_q(b[n - 1])

    def a_seq(self) -> Optional[list[int]]:
        a = self.params.get("A")
        return list(a) if a else None

    def to_json_obj(self) -> dict:
        return {
            "group": self.ctx.to_config(),
            "s_o": self.ctx.coords_to_json(self.s_o.coords),
            "S": [self.ctx.coords_to_json(s.coords) for s in self.gens],
            "params": self.params,
            "sets": [finset_to_json(e) for e in self.sets],
            "kappa_hint": self.kappa.to_obj() if self.kappa else None,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)

    @staticmethod
    def from_json_obj(obj: dict, ctx_factory: Callable[[dict], GroupCtx]) -> "SchemeWindow":
        ctx = ctx_factory(obj["group"])
        s_o = Elem(ctx.group_id, ctx.coords_from_json(obj["s_o"]))
        gens = [Elem(ctx.group_id, ctx.coords_from_json(c)) for c in obj["S"]]
        sets = [finset_from_json(ctx, s) for s in obj["sets"]]
        return SchemeWindow(
            ctx=ctx,
            s_o=s_o,
            gens=gens,
            sets=sets,
            params=obj.get("params", {}),
            kappa=KappaDecl.from_obj(obj.get("kappa_hint")),
        )


def _ordered_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def phi_partial(w: SchemeWindow, g: Elem) -> Fraction:
    """Sum over the window of |gE_n symdiff E_n|/|E_n|, exactly."""
    return sum(
        (boundary_ratio(w.ctx, "left", g, e) for e in w.sets),
        start=Fraction(0),
    )


def phi_from_a(k: int, a_seq: list[int]) -> Fraction:
    """Truncated Phi(s_o^k) for a tower window: 2*sum_n min(|k|/A_n, 1)."""
    k = abs(k)
    return 2 * sum((min(Fraction(k, a), Fraction(1)) for a in a_seq), start=Fraction(0))


def _orbit_difference(w: SchemeWindow, e: FinSet, bound: int) -> FinSet:
    """(union of s_o^k E over |k| <= bound) minus E."""
    keys = set()
    for k in range(-bound, bound + 1):
        if k == 0:
            continue
        t = set_translate(w.ctx, "left", w.ctx.power(w.s_o, k), e)
        keys |= t.keys
    return FinSet(e.group_id, frozenset(keys - e.keys))


def verify_scheme(
    w: SchemeWindow,
    shift_bound: int = 8,
    exp_kmax: int = 4096,
    extra: Optional[list[tuple[Elem, list[Elem]]]] = None,
    jobs: int = 1,
) -> VerifyReport:
    """Check the defining conditions of a (recurrent) left scheme at truncation.

    extra entries are pairs (g, word) where word is a generator decomposition
    of g; the triangle bound Phi(g) <= sum Phi(s_i) is then certified exactly.
    """
    rep = VerifyReport(title="scheme-verify")
    rep.meta["group"] = w.ctx.group_id
    rep.meta["n_max"] = w.n_max
    rep.meta["shift_bound"] = shift_bound
    ctx = w.ctx

    # Condition (1): displacement. E_n s_o disjoint from E_n.
    for n, e in enumerate(w.sets, start=1):
        t = set_translate(ctx, "right", w.s_o, e)
        inter = t.keys & e.keys
        rep.add(
            "displacement", "n=%d" % n, "exact", not inter,
            lhs="|E s_o & E| = %d" % len(inter), rhs="0",
            witness="" if not inter else repr(sorted(inter)[0]),
        )

    # Condition (2): generator ratios against declared budgets.
    labels = [w.gen_label(s) for s in w.gens]
    ratio_jobs = [(lab, s, n, e) for lab, s in zip(labels, w.gens)
                  for n, e in enumerate(w.sets, start=1)]

    def _ratio(item):
        lab, s, n, e = item
        return lab, s, n, boundary_ratio(ctx, "left", s, e)

    ratios = _ordered_map(_ratio, ratio_jobs, jobs)
    totals: dict[str, Fraction] = {}
    for lab, s, n, r in ratios:
        totals[lab] = totals.get(lab, Fraction(0)) + r
        bud = w.budget(lab, n)
        if bud is None:
            rep.add("gen-ratio", "s=%s,n=%d" % (lab, n), "info", None, lhs=fmt_q(r))
        else:
            rep.add(
                "gen-ratio", "s=%s,n=%d" % (lab, n), "exact", r <= bud,
                lhs=fmt_q(r), rhs="<= " + fmt_q(bud),
            )
    for lab in dict.fromkeys(labels):
        rep.add("phi-partial", "s=%s" % lab, "info", None, lhs=fmt_q(totals[lab]))

    # Shift-power counts against the declared level structure, when present.
    a_seq = w.a_seq()
    if a_seq:
        for n, (e, a) in enumerate(zip(w.sets, a_seq), start=1):
            if len(e) % a:
                rep.add("shift-formula", "n=%d" % n, "exact", False,
                        lhs="|E_%d| = %d" % (n, len(e)), rhs="divisible by A_%d = %d" % (n, a),
                        witness="level size is not an integer")
                continue
            slab = len(e) // a
            ok = True
            wit = ""
            for k in range(1, shift_bound + 1):
                for kk in (k, -k):
                    cnt = boundary_count(ctx, "left", ctx.power(w.s_o, kk), e)
                    want = 2 * min(abs(kk), a) * slab
                    if cnt != want:
                        ok = False
                        wit = "k=%d: %d != %d" % (kk, cnt, want)
                        break
                if not ok:
                    break
            rep.add("shift-formula", "n=%d" % n, "exact", ok,
                    lhs="|s_o^k E symdiff E|", rhs="2*min(|k|,A_n)*|E_n|/A_n",
                    witness=wit)

    # Declared growth certificate A_n >= q^n at the truncation.
    q = w.params.get("q")
    if q is not None and a_seq:
        qf = parse_q(q)
        for n, a in enumerate(a_seq, start=1):
            ok = Fraction(a) >= qf ** n
            rep.add("growth", "n=%d" % n, "exact", ok,
                    lhs="A_%d = %d" % (n, a), rhs=">= q^%d = %s" % (n, fmt_q(qf ** n)))

    # Condition (3): orbit-difference sets pairwise disjoint.
    diffs = [_orbit_difference(w, e, shift_bound) for e in w.sets]
    for n in range(len(diffs)):
        for m in range(n + 1, len(diffs)):
            inter = diffs[n].keys & diffs[m].keys
            rep.add(
                "orbit-disjoint", "n=%d,m=%d" % (n + 1, m + 1), "exact", not inter,
                lhs="|X_%d & X_%d| = %d" % (n + 1, m + 1, len(inter)), rhs="0",
                witness="" if not inter else repr(sorted(inter)[0]),
            )

    # Condition (4): divergence trend of sum exp(-kappa Phi(s_o^k)).
    if w.kappa is not None:
        kappa = w.kappa.as_float()
        phi_rows = []
        exp_sum = 0.0
        kmax = exp_kmax if a_seq else shift_bound
        doubles = []
        k_sorted = [0]
        for k in range(1, kmax + 1):
            k_sorted += [k, -k]
        next_double = 1
        sums_at: dict[int, float] = {}
        for k in k_sorted:
            if abs(k) <= shift_bound:
                phi = phi_partial(w, ctx.power(w.s_o, k))
                src = "enumerated"
            else:
                phi = phi_from_a(k, a_seq)
                src = "A-formula"
            term = math.exp(-kappa * float(phi))
            exp_sum += term
            phi_rows.append({
                "k": k, "phi": fmt_q(phi), "phi_float": float(phi),
                "phi_source": src, "exp_sum": exp_sum,
            })
            if k < 0 and -k == next_double:
                sums_at[-k] = exp_sum
                next_double *= 2
        rep.series["phi_k"] = phi_rows
        prev = None
        drows = []
        for kk in sorted(sums_at):
            delta = None if prev is None else sums_at[kk] - sums_at[prev]
            drows.append({"K": kk, "exp_sum": sums_at[kk],
                          "delta": "" if delta is None else delta})
            if delta is not None:
                rep.add("exp-series", "K=%d" % kk, "trend", delta > 0,
                        lhs="delta = %.6g" % delta, rhs="> 0")
            prev = kk
        rep.series["exp_doubling"] = drows

    # Word certificates: Phi(g) <= sum_i Phi(s_i) for declared decompositions.
    for g, word in extra or []:
        prod = ctx.identity
        for s in word:
            prod = ctx.mul(prod, s)
        if prod.coords != g.coords:
            raise SchemeError("word does not multiply to the certified element")
        phi_g = phi_partial(w, g)
        bound = sum((phi_partial(w, s) for s in word), start=Fraction(0))
        rep.add("word-bound", "g=%s" % ctx.elem_label(g), "exact", phi_g <= bound,
                lhs=fmt_q(phi_g), rhs="<= " + fmt_q(bound))

    return rep


def _translate_keys(ctx: GroupCtx, keys: frozenset, gcoords: tuple) -> frozenset:
    mul = ctx.mul_coords
    return frozenset(mul(c, gcoords) for c in keys)


def rearrange(w: SchemeWindow, search_cap: int = REARRANGE_SEARCH_CAP) -> SchemeWindow:
    """Right-translate each E_n by a power of s_o so differences never meet.

    Follows the forbidden-set argument: gamma_n avoids, for every m < n and
    every generator s, translates that would let sF_n symdiff F_n touch
    sF_m symdiff F_m, or F_n touch F_m, F_m s_o^-1, F_m s_o. The search runs
    k = 0, 1, -1, 2, -2, ... and keeps the first admissible power.
    """
    ctx = w.ctx
    s_o = w.s_o
    f_sets: list[FinSet] = []
    f_diffs: list[dict[str, frozenset]] = []  # per chosen window: label -> sF symdiff F
    gammas: list[int] = []

    e_diffs = []
    for e in w.sets:
        d = {}
        for s in w.gens:
            t = set_translate(ctx, "left", s, e)
            d[w.gen_label(s)] = t.keys ^ e.keys
        e_diffs.append(d)

    for n, e in enumerate(w.sets):
        chosen = None
        k = 0
        tried = 0
        while tried <= 2 * search_cap:
            gam = ctx.power(s_o, k).coords
            ekeys = _translate_keys(ctx, e.keys, gam)
            ok = True
            so_keys = _translate_keys(ctx, ekeys, s_o.coords)
            so_inv_keys = _translate_keys(ctx, ekeys, ctx.inv_coords(s_o.coords))
            for m in range(n):
                fm = f_sets[m].keys
                if ekeys & fm or so_keys & fm or so_inv_keys & fm:
                    ok = False
                    break
                dn = e_diffs[n]
                dm = f_diffs[m]
                for lab in dn:
                    if _translate_keys(ctx, dn[lab], gam) & dm[lab]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                chosen = (k, ekeys)
                break
            tried += 1
            k = -k if k > 0 else -k + 1
        if chosen is None:
            raise SchemeError(
                "rearrangement search exhausted %d candidates at n=%d" % (2 * search_cap, n + 1)
            )
        k, ekeys = chosen
        gammas.append(k)
        fs = FinSet(ctx.group_id, ekeys)
        f_sets.append(fs)
        gam = ctx.power(s_o, k).coords
        f_diffs.append({lab: _translate_keys(ctx, d, gam) for lab, d in e_diffs[n].items()})

    params = dict(w.params)
    params["rearranged"] = {"gammas": gammas}
    out = SchemeWindow(ctx=ctx, s_o=s_o, gens=list(w.gens), sets=f_sets,
                       params=params, kappa=w.kappa)
    chk = leftsch_check(out, w)
    if not chk.all_exact_passed:
        raise SchemeError("rearranged window failed its own conclusions: %s"
                          % [r.to_obj() for r in chk.failures()][:3])
    out.params["leftsch_verified"] = True
    return out


def leftsch_check(fw: SchemeWindow, ew: Optional[SchemeWindow] = None,
                  shift_bound: int = 4) -> VerifyReport:
    """Exactly verify the rearrangement conclusions on a window.

    With the source window given, also checks that every tested translate has
    the same boundary count in both windows (the translation invariance that
    keeps Phi unchanged).
    """
    ctx = fw.ctx
    rep = VerifyReport(title="leftsch-check")
    n_sets = fw.sets
    # (1) pairwise disjoint.
    for n in range(len(n_sets)):
        for m in range(n + 1, len(n_sets)):
            inter = n_sets[n].keys & n_sets[m].keys
            rep.add("disjoint", "n=%d,m=%d" % (n + 1, m + 1), "exact", not inter,
                    lhs=str(len(inter)), rhs="0",
                    witness="" if not inter else repr(sorted(inter)[0]))
    # (2) F_n s_o disjoint from every F_m.
    for n, e in enumerate(n_sets, start=1):
        t = set_translate(ctx, "right", fw.s_o, e)
        for m, f in enumerate(n_sets, start=1):
            inter = t.keys & f.keys
            rep.add("displaced-disjoint", "n=%d,m=%d" % (n, m), "exact", not inter,
                    lhs=str(len(inter)), rhs="0",
                    witness="" if not inter else repr(sorted(inter)[0]))
    # (3) per-generator difference sets pairwise disjoint.
    for s in fw.gens:
        lab = fw.gen_label(s)
        diffs = []
        for e in n_sets:
            t = set_translate(ctx, "left", s, e)
            diffs.append(t.keys ^ e.keys)
        for n in range(len(diffs)):
            for m in range(n + 1, len(diffs)):
                inter = diffs[n] & diffs[m]
                rep.add("diff-disjoint", "s=%s,n=%d,m=%d" % (lab, n + 1, m + 1),
                        "exact", not inter, lhs=str(len(inter)), rhs="0",
                        witness="" if not inter else repr(sorted(inter)[0]))
    # (4) boundary counts match the source window.
    if ew is not None:
        tested = list(fw.gens) + [
            ctx.power(fw.s_o, k)
            for k in range(-shift_bound, shift_bound + 1)
            if k
        ]
        for g in tested:
            for n, (f, e) in enumerate(zip(n_sets, ew.sets), start=1):
                cf = boundary_count(ctx, "left", g, f)
                ce = boundary_count(ctx, "left", g, e)
                rep.add("count-invariance", "g=%s,n=%d" % (ctx.elem_label(g), n),
                        "exact", cf == ce, lhs=str(cf), rhs=str(ce))
    return rep


def require_leftsch(w: SchemeWindow) -> None:
    if not w.params.get("leftsch_verified"):
        raise SchemeError(
            "window has not passed the rearrangement conclusions; "
            "run rearrange() (or leftsch_check) and verify_scheme first"
        )
