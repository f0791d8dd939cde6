"""Two-sided Folner families and exact disjointification.

A family hands out nested candidate sets S_1 subset S_2 subset ... together
with exact predicted sizes. The disjointification scan picks, for each n,
the smallest index whose set is almost invariant on both sides below the
strict threshold 1/(4n^2) and large enough against everything already
chosen; the leftovers F_n = S_m minus (previous choices) are pairwise
disjoint and still almost invariant below 1/n^2 on both sides.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .cocycle import StepVector
from .groups import FinSet, GroupCtx, GroupError, set_translate
from .radicals import Rad
from .report import VerifyReport, fmt_q
from .scheme import SchemeError

FOLNER_SIZE_CAP = 2_000_000


class FolnerSearchError(SchemeError):
    """The scan ran out of candidates; carries the best ratios seen."""

    def __init__(self, msg: str, best: dict):
        super().__init__(msg)
        self.best = best


@dataclass
class FolnerFamily:
    """Nested candidates S_m with exact size prediction and a hard index cap."""

    ctx: GroupCtx
    name: str
    build: Callable[[int], FinSet]
    size: Callable[[int], int]
    max_index: int

    def __post_init__(self):
        if self.ctx.s_o is None:
            raise GroupError("family group needs a displacement generator")


def z_boxes(ctx: GroupCtx, max_index: int = 100_000) -> FolnerFamily:
    """S_m = [0, m)^d in the free abelian group."""
    if ctx.kind != "zd":
        raise GroupError("z_boxes builds on zd groups, got %s" % ctx.kind)
    d = ctx.d  # type: ignore[attr-defined]

    def build(m: int) -> FinSet:
        return FinSet(ctx.group_id,
                      frozenset(itertools.product(range(m), repeat=d)))

    return FolnerFamily(ctx=ctx, name="zd-boxes", build=build,
                        size=lambda m: m ** d, max_index=max_index)


def heisenberg_boxes(ctx: GroupCtx, max_index: int = 64) -> FolnerFamily:
    """S_m = {a, b in [0, m), c in [0, m^2)}, almost invariant on both sides."""
    if ctx.kind != "heisenberg":
        raise GroupError("heisenberg_boxes builds on the heisenberg group")

    def build(m: int) -> FinSet:
        keys = frozenset(
            (a, b, c) for a in range(m) for b in range(m) for c in range(m * m)
        )
        return FinSet(ctx.group_id, keys)

    return FolnerFamily(ctx=ctx, name="heisenberg-boxes", build=build,
                        size=lambda m: m ** 4, max_index=max_index)


def wreath_rectangles(group, max_index: int = 10) -> FolnerFamily:
    """S_m = {(eta, k): supp(eta) in (-m, 0], k in [0, m)} for a finite lamp.

    Right translations behave well on these rectangles but left translation
    by the shift moves a constant fraction of the mass; the scan documents
    that failure instead of producing a family.
    """
    lamp = group.lamp
    if not lamp.is_finite():
        raise GroupError("rectangles need a finite lamp group")
    base = group.base
    vals = [g.coords for g in lamp.elements()]
    e_val = lamp.identity_coords()

    def build(m: int) -> FinSet:
        keys = set()
        positions = list(range(-(m - 1), 1))
        for assignment in itertools.product(vals, repeat=m):
            cfg = base.canon(
                (p, v) for p, v in zip(positions, assignment) if v != e_val
            )
            for k in range(m):
                keys.add((cfg, k))
        return FinSet(group.group_id, frozenset(keys))

    return FolnerFamily(ctx=group, name="wreath-rectangles", build=build,
                        size=lambda m: len(vals) ** m * m, max_index=max_index)


def worst_ratios(ctx: GroupCtx, e: FinSet) -> dict[str, Fraction]:
    """Exact worst boundary ratio over the generating set, per side."""
    out = {}
    for side in ("left", "right"):
        worst = Fraction(0)
        for s in ctx.gens:
            t = set_translate(ctx, side, s, e)
            worst = max(worst, Fraction(len(t.keys ^ e.keys), len(e)))
        out[side] = worst
    return out


def disjointify(fam: FolnerFamily, n_max: int,
                size_cap: int = FOLNER_SIZE_CAP) -> tuple[list[FinSet], VerifyReport]:
    """Carve pairwise disjoint two-sided almost invariant sets from a family.

    For each n the scan takes the smallest index m (above the previous one)
    with both worst ratios < 1/(4n^2), |S_m| > 4 n^2 |union so far|,
    |S_m| > n, and a leftover bigger than the previous piece. The leftover
    F_n = S_m minus the earlier pieces then has both worst ratios <= 1/n^2.
    """
    ctx = fam.ctx
    rep = VerifyReport(title="disjointify")
    rep.meta["family"] = fam.name
    chosen: list[FinSet] = []
    used: set = set()
    best = {"m": None, "left": None, "right": None}
    m = 0
    for n in range(1, n_max + 1):
        thresh = Fraction(1, 4 * n * n)
        found = None
        while True:
            m += 1
            if m > fam.max_index:
                raise FolnerSearchError(
                    "no candidate below index cap %d for n=%d (best ratios "
                    "left=%s right=%s at m=%s)"
                    % (fam.max_index, n,
                       fmt_q(best["left"]) if best["left"] is not None else "-",
                       fmt_q(best["right"]) if best["right"] is not None else "-",
                       best["m"]),
                    best=best,
                )
            size = fam.size(m)
            if size > size_cap:
                raise FolnerSearchError(
                    "candidate S_%d would have %d elements, over the cap %d "
                    "(best ratios left=%s right=%s at m=%s)"
                    % (m, size, size_cap,
                       fmt_q(best["left"]) if best["left"] is not None else "-",
                       fmt_q(best["right"]) if best["right"] is not None else "-",
                       best["m"]),
                    best=best,
                )
            # Cheap exact preconditions first; the family is nested, so the
            # overlap with already chosen pieces is their full size.
            if size <= n or size <= 4 * n * n * len(used):
                continue
            if chosen and size - len(used) <= len(chosen[-1]):
                continue
            s = fam.build(m)
            if len(s) != size:
                raise SchemeError("family size prediction failed at m=%d" % m)
            if not used <= s.keys:
                raise SchemeError("family is not nested at m=%d" % m)
            ratios = worst_ratios(ctx, s)
            if best["left"] is None or max(ratios.values()) < max(best["left"], best["right"]):
                best = {"m": m, "left": ratios["left"], "right": ratios["right"]}
            if ratios["left"] < thresh and ratios["right"] < thresh:
                found = s
                break
        f = FinSet(ctx.group_id, found.keys - frozenset(used))
        post = worst_ratios(ctx, f)
        bound = Fraction(1, n * n)
        rep.add("post-ratio", "n=%d left" % n, "exact", post["left"] <= bound,
                lhs=fmt_q(post["left"]), rhs="<= " + fmt_q(bound))
        rep.add("post-ratio", "n=%d right" % n, "exact", post["right"] <= bound,
                lhs=fmt_q(post["right"]), rhs="<= " + fmt_q(bound))
        rep.add("disjoint", "n=%d" % n, "exact", not (f.keys & frozenset(used)),
                lhs="|F_n| = %d" % len(f), rhs="disjoint from earlier pieces")
        if chosen:
            rep.add("increasing", "n=%d" % n, "exact", len(f) > len(chosen[-1]),
                    lhs="|F_%d| = %d" % (n, len(f)),
                    rhs="> |F_%d| = %d" % (n - 1, len(chosen[-1])))
        rep.series.setdefault("folner", []).append({
            "n": n,
            "m": m,
            "size": len(f),
            "left": fmt_q(post["left"]),
            "right": fmt_q(post["right"]),
        })
        chosen.append(f)
        used |= f.keys
    return chosen, rep


def symmetric_vector(ctx: GroupCtx, sets: list[FinSet]) -> StepVector:
    """sum_n |F_n|^(-1/2) 1_(F_n) over a disjointified two-sided family."""
    return StepVector(ctx=ctx, pieces=[(f, Rad.inv_sqrt(len(f))) for f in sets])
