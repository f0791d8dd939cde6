"""Torsion-free 2-step nilpotent groups in Malcev coordinates.

A presentation lists free generators x_1..x_r over a central lattice
z_1..z_s with commutators [x_i, x_j] = prod_k z_k^comm(i,j)_k for i > j.
This module finds an adapted generating direction (x, y with [y, x] = z^mu
for a primitive central z), builds the box windows of left schemes on the
discrete Heisenberg groups and the displaced-interval data feeding the
generic tower construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .groups import Elem, FinSet, GroupCtx, GroupError, boundary_count
from .report import VerifyReport, fmt_q
from .scheme import KappaDecl, SchemeError, SchemeWindow
from .semidirect import BaseOracle, SemidirectGroup, TowerInput

MAX_BOX_ELEMS = 2_000_000


# ---------------------------------------------------------------------------
# Presentations and the group law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MalcevPresentation:
    """r free directions over s central directions with integer commutators."""

    r: int
    s: int
    comm: dict  # (i, j) with i > j  ->  tuple of s ints
    labels: tuple = ()
    z_labels: tuple = ()

    def __post_init__(self):
        if self.r < 1 or self.s < 1:
            raise GroupError("presentation needs r >= 1 and s >= 1")
        for (i, j), v in self.comm.items():
            if not (1 <= j < i <= self.r):
                raise GroupError("commutator index (%d,%d) out of range" % (i, j))
            if len(v) != self.s:
                raise GroupError("commutator value needs %d components" % self.s)
        if not self.labels:
            object.__setattr__(self, "labels",
                               tuple("x%d" % i for i in range(1, self.r + 1)))
        if not self.z_labels:
            object.__setattr__(self, "z_labels",
                               tuple("z%d" % k for k in range(1, self.s + 1)))
        if len(self.labels) != self.r or len(self.z_labels) != self.s:
            raise GroupError("label count does not match rank")

    def pair(self, i: int, j: int) -> tuple:
        """B(e_i, e_j), the signed commutator vector for any i, j."""
        if i == j:
            return (0,) * self.s
        if i > j:
            return tuple(self.comm.get((i, j), (0,) * self.s))
        v = self.comm.get((j, i), (0,) * self.s)
        return tuple(-c for c in v)

    def bilinear(self, a: tuple, b: tuple) -> tuple:
        """B(a, b) extended bilinearly to integer vectors."""
        out = [0] * self.s
        for i in range(1, self.r + 1):
            if a[i - 1] == 0:
                continue
            for j in range(1, self.r + 1):
                if b[j - 1] == 0 or i == j:
                    continue
                v = self.pair(i, j)
                for k in range(self.s):
                    out[k] += a[i - 1] * b[j - 1] * v[k]
        return tuple(out)

    def is_abelian(self) -> bool:
        return all(all(c == 0 for c in v) for v in self.comm.values())

    def to_obj(self) -> dict:
        return {
            "r": self.r,
            "s": self.s,
            "comm": {"%d,%d" % ij: list(v) for ij, v in sorted(self.comm.items())},
            "labels": list(self.labels),
            "z_labels": list(self.z_labels),
        }

    @staticmethod
    def from_obj(obj: dict) -> "MalcevPresentation":
        comm = {}
        for key, v in obj.get("comm", {}).items():
            i, j = (int(t) for t in key.split(","))
            comm[(i, j)] = tuple(int(c) for c in v)
        return MalcevPresentation(
            r=int(obj["r"]), s=int(obj["s"]), comm=comm,
            labels=tuple(obj.get("labels", ())),
            z_labels=tuple(obj.get("z_labels", ())),
        )


def heisenberg_presentation(mu: int = 1) -> MalcevPresentation:
    """[y, x] = z^mu over generators (x, y)."""
    if mu < 1:
        raise GroupError("mu must be a positive integer")
    return MalcevPresentation(r=2, s=1, comm={(2, 1): (mu,)},
                              labels=("x", "y"), z_labels=("z",))


def h5_presentation() -> MalcevPresentation:
    """Rank-4 example with [y1, x1] = [y2, x2] = z."""
    return MalcevPresentation(
        r=4, s=1, comm={(3, 1): (1,), (4, 2): (1,)},
        labels=("x1", "x2", "y1", "y2"), z_labels=("z",),
    )


class Nil2Group(GroupCtx):
    """Group of a Malcev presentation; coords ((a_1..a_r), (c_1..c_s)).

    The product twists only the central block:
    (a, c)(b, d) = (a + b, c + d + B(a, b)|_{i>j}), an exact polynomial law.
    """

    kind = "nil2"

    def __init__(self, pres: MalcevPresentation):
        super().__init__()
        self.pres = pres
        self.group_id = "nil2(r=%d,s=%d,%s)" % (
            pres.r, pres.s,
            ";".join("%d,%d:%s" % (i, j, ",".join(str(c) for c in v))
                     for (i, j), v in sorted(pres.comm.items())),
        )
        pairs = []
        for i, lab in enumerate(pres.labels, start=1):
            e = self._unit(i, 1)
            pairs.append((lab, e))
            pairs.append((lab + "^-1", self._unit(i, -1)))
        self._set_gens(pairs, s_o_label=pres.labels[0])

    def _unit(self, i: int, sign: int) -> tuple:
        a = tuple(sign if t == i else 0 for t in range(1, self.pres.r + 1))
        return (a, (0,) * self.pres.s)

    def identity_coords(self):
        return ((0,) * self.pres.r, (0,) * self.pres.s)

    def mul_coords(self, x, y):
        a, c = x
        b, d = y
        tw = [0] * self.pres.s
        for (i, j), v in self.pres.comm.items():
            f = a[i - 1] * b[j - 1]
            if f:
                for k in range(self.pres.s):
                    tw[k] += f * v[k]
        return (
            tuple(p + q for p, q in zip(a, b)),
            tuple(p + q + t for p, q, t in zip(c, d, tw)),
        )

    def inv_coords(self, x):
        a, c = x
        tw = [0] * self.pres.s
        for (i, j), v in self.pres.comm.items():
            f = a[i - 1] * a[j - 1]
            if f:
                for k in range(self.pres.s):
                    tw[k] += f * v[k]
        return (tuple(-p for p in a), tuple(-p + t for p, t in zip(c, tw)))

    def canon_coords(self, x):
        if len(x) != 2:
            raise GroupError("nil2 coords are (a_vec, c_vec)")
        a = tuple(int(v) for v in x[0])
        c = tuple(int(v) for v in x[1])
        if len(a) != self.pres.r or len(c) != self.pres.s:
            raise GroupError("nil2 coords need %d + %d integers"
                             % (self.pres.r, self.pres.s))
        return (a, c)

    def gamma_level(self, g):
        self.check_member(g)
        return g.coords[0][0]

    def central(self, c_vec) -> Elem:
        return Elem(self.group_id, ((0,) * self.pres.r, tuple(int(v) for v in c_vec)))

    def structure(self):
        return {"presentation": self.pres.to_obj()}


# ---------------------------------------------------------------------------
# Smith normal form over the integers
# ---------------------------------------------------------------------------


def int_det(m: list[list[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for t in range(n - 1):
        if a[t][t] == 0:
            swap = next((i for i in range(t + 1, n) if a[i][t] != 0), None)
            if swap is None:
                return 0
            a[t], a[swap] = a[swap], a[t]
            sign = -sign
        for i in range(t + 1, n):
            for j in range(t + 1, n):
                a[i][j] = (a[i][j] * a[t][t] - a[i][t] * a[t][j]) // prev
        prev = a[t][t]
    return sign * a[n - 1][n - 1]


def smith_normal_form(m: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """U, D, V with U m V = D diagonal, d_1 | d_2 | ..., all d_t >= 0.

    U and V are unimodular; the classic pivot-and-reduce algorithm over Z.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [row[:] for row in m]
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_op(i, j, q):  # row_i -= q * row_j
        d[i] = [x - q * y for x, y in zip(d[i], d[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):  # col_i -= q * col_j
        for row in d:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    for t in range(min(rows, cols)):
        while True:
            # Move a nonzero entry of minimal magnitude to the pivot.
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if d[i][j] != 0 and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            if best[0] != t:
                swap_rows(t, best[0])
            if best[1] != t:
                swap_cols(t, best[1])
            for i in range(t + 1, rows):
                if d[i][t] != 0:
                    row_op(i, t, d[i][t] // d[t][t])
            for j in range(t + 1, cols):
                if d[t][j] != 0:
                    col_op(j, t, d[t][j] // d[t][t])
            if any(d[i][t] != 0 for i in range(t + 1, rows)):
                continue
            if any(d[t][j] != 0 for j in range(t + 1, cols)):
                continue
            # Enforce divisibility of the remaining block by the pivot.
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if d[i][j] % d[t][t] != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, -1)  # fold the offending row into the pivot row
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def snf_check(m, u, d, v) -> bool:
    """U m V == D, diagonal, nonneg, divisibility chain, U and V unimodular."""
    rows, cols = len(m), len(m[0]) if m else 0
    um = [[sum(u[i][k] * m[k][j] for k in range(rows)) for j in range(cols)]
          for i in range(rows)]
    umv = [[sum(um[i][k] * v[k][j] for k in range(cols)) for j in range(cols)]
           for i in range(rows)]
    if umv != d:
        return False
    diag = []
    for i in range(rows):
        for j in range(cols):
            if i == j:
                diag.append(d[i][j])
            elif d[i][j] != 0:
                return False
    if any(x < 0 for x in diag):
        return False
    nz = [x for x in diag if x != 0]
    if diag[:len(nz)] != nz:  # zeros must trail
        return False
    for a, b in zip(nz, nz[1:]):
        if b % a != 0:
            return False
    return abs(int_det(u)) == 1 and abs(int_det(v)) == 1


# ---------------------------------------------------------------------------
# Adapted directions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Direction:
    """An adapted presentation: gen 1 is x, gen r is y, [y, x] = z_1^mu."""

    pres: MalcevPresentation      # the transformed presentation
    source: MalcevPresentation
    mu: int
    basis: tuple                  # columns: new free gens in old coordinates
    center_u: tuple               # rows of U: new central coords = U * old


def _matvec(m, x):
    return tuple(sum(row[k] * x[k] for k in range(len(x))) for row in m)


def transform_presentation(pres: MalcevPresentation, basis, center_u,
                           labels=(), z_labels=()) -> MalcevPresentation:
    """Recompute commutators for a new free basis and central basis."""
    r, s = pres.r, pres.s
    comm = {}
    for i in range(1, r + 1):
        for j in range(1, i):
            bv = pres.bilinear(basis[i - 1], basis[j - 1])
            nv = _matvec(center_u, bv)
            if any(nv):
                comm[(i, j)] = nv
    return MalcevPresentation(r=r, s=s, comm=comm,
                              labels=tuple(labels), z_labels=tuple(z_labels))


def find_heisenberg_direction(pres: MalcevPresentation) -> Direction:
    """Choose x, y with [y, x] = z_1^mu, z_1 primitive, mu minimal for x.

    x is the first original generator that fails to be central. The pairing
    beta(v) = B(v, x) on the complementary lattice is put in Smith normal
    form; the first elementary divisor is mu and the matching new central
    basis vector is z_1.
    """
    if pres.is_abelian():
        raise GroupError("presentation is abelian; no adapted direction exists")
    r, s = pres.r, pres.s
    j = next(jj for jj in range(1, r + 1)
             if any(any(pres.pair(ii, jj)) for ii in range(1, r + 1)))
    others = [k for k in range(1, r + 1) if k != j]
    mbeta = [[pres.pair(k, j)[row] for k in others] for row in range(s)]
    u, d, v = smith_normal_form(mbeta)
    mu = d[0][0]
    if mu <= 0:
        raise GroupError("pairing with the chosen direction is identically zero")
    # New free basis in old coordinates: x first, middle directions, then y.
    def lift(col):
        vec = [0] * r
        for t, k in enumerate(others):
            vec[k - 1] = v[t][col]
        return tuple(vec)

    ex = tuple(1 if t == j else 0 for t in range(1, r + 1))
    basis = [ex] + [lift(c) for c in range(1, len(others))] + [lift(0)]
    labels = ["x"] + ["w%d" % t for t in range(2, r)] + ["y"]
    z_labels = ["z"] + ["v%d" % t for t in range(2, s + 1)]
    new = transform_presentation(pres, basis, u, labels, z_labels)
    return Direction(pres=new, source=pres, mu=mu,
                     basis=tuple(basis), center_u=tuple(tuple(row) for row in u))


def direction_check(dirn: Direction) -> VerifyReport:
    """Exactly verify the adapted-direction properties and the change of basis."""
    rep = VerifyReport(title="direction-check")
    new, old = dirn.pres, dirn.source
    r, s = new.r, new.s
    mu_vec = new.pair(r, 1)
    rep.add("adapted", "[y,x] = z^mu", "exact",
            mu_vec == (dirn.mu,) + (0,) * (s - 1),
            lhs=repr(mu_vec), rhs=repr((dirn.mu,) + (0,) * (s - 1)))
    rep.add("adapted", "mu positive", "exact", dirn.mu >= 1, lhs=str(dirn.mu), rhs=">= 1")
    ok = all(new.pair(p, 1)[0] == 0 for p in range(2, r))
    rep.add("adapted", "middle gens commute with x into z-complement", "exact", ok,
            lhs="z_1-components " + repr([new.pair(p, 1)[0] for p in range(2, r)]),
            rhs="all zero")
    # The new basis must be unimodular in both blocks.
    rep.add("adapted", "free basis unimodular", "exact",
            abs(int_det([list(b) for b in dirn.basis])) == 1,
            lhs="det = %d" % int_det([list(b) for b in dirn.basis]), rhs="+-1")
    rep.add("adapted", "central basis unimodular", "exact",
            abs(int_det([list(rw) for rw in dirn.center_u])) == 1,
            lhs="det = %d" % int_det([list(rw) for rw in dirn.center_u]), rhs="+-1")
    # Relation check inside the source group: commutators of the new basis
    # elements equal the central elements named by the new presentation.
    g_old = Nil2Group(old)
    uinv_cols = _unimodular_inverse([list(rw) for rw in dirn.center_u])
    ok = True
    wit = ""
    for i in range(1, r + 1):
        for j in range(1, i):
            gi = g_old.make((dirn.basis[i - 1], (0,) * s))
            gj = g_old.make((dirn.basis[j - 1], (0,) * s))
            w = g_old.mul(g_old.mul(gi, gj), g_old.mul(g_old.inv(gi), g_old.inv(gj)))
            target = new.pair(i, j)
            old_c = tuple(sum(uinv_cols[t][k] * target[k] for k in range(s))
                          for t in range(s))
            if w.coords != ((0,) * r, old_c):
                ok = False
                if not wit:
                    wit = "(%d,%d): %r != %r" % (i, j, w.coords, ((0,) * r, old_c))
    rep.add("adapted", "relations hold in the source group", "exact", ok, witness=wit)
    return rep


def _unimodular_inverse(m: list[list[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix (still integral)."""
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)] +
           [Fraction(1 if j == i else 0) for j in range(n)] for i in range(n)]
    for t in range(n):
        p = next(i for i in range(t, n) if aug[i][t] != 0)
        aug[t], aug[p] = aug[p], aug[t]
        aug[t] = [x / aug[t][t] for x in aug[t]]
        for i in range(n):
            if i != t and aug[i][t] != 0:
                f = aug[i][t]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[t])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise GroupError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


# ---------------------------------------------------------------------------
# Box windows on Heisenberg groups
# ---------------------------------------------------------------------------


@dataclass
class BoxParams:
    """Box sides A_n, B_n, C_n and the displaced y-intervals they force.

    The y-offsets satisfy mu * b_n > C_n (so right displacement by x leaves
    the box) and b_(n+1) >= b_n + B_n + 1 (so the displaced intervals stay
    separated); both are recomputed and validated here.
    """

    a: list[int]
    b_w: list[int]
    c_h: list[int]
    mu: int = 1
    offsets: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.a) == len(self.b_w) == len(self.c_h)) or not self.a:
            raise SchemeError("box side lists must be nonempty, equal length")
        if self.mu < 1:
            raise SchemeError("mu must be a positive integer")
        if any(v < 1 for v in self.a + self.b_w + self.c_h):
            raise SchemeError("box sides must be positive")
        if not self.offsets:
            offs = []
            for n, c in enumerate(self.c_h):
                lo = -(-(c + 1) // self.mu)  # ceil((C_n + 1) / mu)
                if n > 0:
                    lo = max(lo, offs[-1] + self.b_w[n - 1] + 1)
                offs.append(lo)
            self.offsets = offs
        for n, (b0, c) in enumerate(zip(self.offsets, self.c_h)):
            if self.mu * b0 <= c:
                raise SchemeError("offset %d violates mu*b_n > C_n at n=%d" % (b0, n + 1))
            if n > 0 and b0 < self.offsets[n - 1] + self.b_w[n - 1] + 1:
                raise SchemeError("y-intervals touch at n=%d" % (n + 1))

    @property
    def n_max(self) -> int:
        return len(self.a)

    def interval(self, n: int) -> range:
        """The displaced y-interval I_n, 1-based n."""
        return range(self.offsets[n - 1], self.offsets[n - 1] + self.b_w[n - 1])


def heisenberg_box_profile(n_max: int = 4, mu: int = 1) -> BoxParams:
    """Doubling profile A = 2^n, B = n^2, C = n^2 2^n."""
    ns = range(1, n_max + 1)
    return BoxParams(a=[2 ** n for n in ns], b_w=[n * n for n in ns],
                     c_h=[n * n * 2 ** n for n in ns], mu=mu)


def window_example_box(mu: int = 1) -> BoxParams:
    """The one-window example with A=2, B=2, C=3."""
    return BoxParams(a=[2], b_w=[2], c_h=[3], mu=mu)


def _pack_heis(ctx: GroupCtx, a: int, b: int, c: int) -> tuple:
    if ctx.kind == "heisenberg":
        return (a, b, c)
    if ctx.kind == "nil2":
        pres = ctx.pres  # type: ignore[attr-defined]
        if pres.r != 2 or pres.s != 1:
            raise SchemeError("box windows need a rank-2 presentation")
        return ((a, b), (c,))
    raise SchemeError("box windows build on heisenberg or nil2 groups")


def build_heisenberg_scheme(ctx: GroupCtx, box: BoxParams,
                            q: Optional[Fraction] = None) -> SchemeWindow:
    """E_n = [0,A_n) x I_n x [0,C_n) in coordinates x^a y^b z^c."""
    if ctx.kind == "nil2":
        mu_vec = ctx.pres.pair(2, 1)  # type: ignore[attr-defined]
        if mu_vec != (box.mu,):
            raise SchemeError("box mu=%d does not match presentation %r"
                              % (box.mu, mu_vec))
    elif ctx.kind == "heisenberg":
        if box.mu != 1:
            raise SchemeError("the plain heisenberg context has mu = 1")
    sets = []
    for n in range(1, box.n_max + 1):
        an, bw, ch = box.a[n - 1], box.b_w[n - 1], box.c_h[n - 1]
        if an * bw * ch > MAX_BOX_ELEMS:
            raise SchemeError("box E_%d would have %d elements, over the cap"
                              % (n, an * bw * ch))
        keys = frozenset(
            _pack_heis(ctx, a, b, c)
            for a in range(an)
            for b in box.interval(n)
            for c in range(ch)
        )
        sets.append(FinSet(ctx.group_id, keys))
    so_budget = [fmt_q(Fraction(2, a)) for a in box.a]
    y_budget = [
        fmt_q(Fraction(2, bw) + Fraction(box.mu * an, ch))
        for an, bw, ch in zip(box.a, box.b_w, box.c_h)
    ]
    labels = ctx.gen_labels
    budgets = {labels[0]: so_budget, labels[1]: so_budget,
               labels[2]: y_budget, labels[3]: y_budget}
    params = {
        "builder": "box",
        "A": list(box.a),
        "B": list(box.b_w),
        "C": list(box.c_h),
        "mu": box.mu,
        "offsets": list(box.offsets),
        "budgets": budgets,
    }
    kappa = None
    if q is not None:
        params["q"] = fmt_q(q)
        kappa = KappaDecl("half_log", q)
    return SchemeWindow(ctx=ctx, s_o=ctx.s_o, gens=ctx.gens, sets=sets,
                        params=params, kappa=kappa)


def z_word_certificate(ctx: GroupCtx) -> tuple[Elem, list[Elem]]:
    """The central element z^mu as the length-4 word y^-1 x^-1 y x."""
    labs = ctx.gen_labels
    by_label = dict(zip(labs, ctx.gens))
    word = [by_label[labs[3]], by_label[labs[1]], by_label[labs[2]], by_label[labs[0]]]
    g = ctx.identity
    for w in word:
        g = ctx.mul(g, w)
    return g, word


def box_count_checks(w: SchemeWindow, shift_bound: int = 6) -> VerifyReport:
    """Exact count identities for box windows.

    |x E_n symdiff E_n| = 2 B_n C_n and |x^k E_n symdiff E_n|
    = 2 min(|k|, A_n) B_n C_n; the y budget 2/B_n + mu A_n / C_n is already
    enforced by the generic verifier.
    """
    rep = VerifyReport(title="box-counts")
    ctx = w.ctx
    box_a = w.params["A"]
    box_b = w.params["B"]
    box_c = w.params["C"]
    for n, e in enumerate(w.sets, start=1):
        bc = box_b[n - 1] * box_c[n - 1]
        ok = True
        wit = ""
        for k in range(1, shift_bound + 1):
            for kk in (k, -k):
                cnt = boundary_count(ctx, "left", ctx.power(ctx.s_o, kk), e)
                want = 2 * min(abs(kk), box_a[n - 1]) * bc
                if cnt != want:
                    ok = False
                    wit = "k=%d: %d != %d" % (kk, cnt, want)
                    break
            if not ok:
                break
        rep.add("box-shift-count", "n=%d" % n, "exact", ok,
                lhs="|x^k E symdiff E|", rhs="2*min(|k|,A_n)*B_n*C_n", witness=wit)
    return rep


# ---------------------------------------------------------------------------
# The tower base N = {x-exponent 0} with phi = conjugation by x
# ---------------------------------------------------------------------------


class Nil2Base(BaseOracle):
    """The complement N of the adapted direction inside a nil2 group.

    Keys are ((a_2..a_r), (c_1..c_s)); phi is conjugation by x, which only
    shears the central block: c -> c - m * sum_i a_i comm(i, 1).
    """

    def __init__(self, pres: MalcevPresentation):
        self.pres = pres
        self.group_id = "nil2base(r=%d,s=%d)" % (pres.r, pres.s)

    def identity(self):
        return ((0,) * (self.pres.r - 1), (0,) * self.pres.s)

    def canon(self, h):
        a = tuple(int(v) for v in h[0])
        c = tuple(int(v) for v in h[1])
        if len(a) != self.pres.r - 1 or len(c) != self.pres.s:
            raise GroupError("nil2 base coords need %d + %d integers"
                             % (self.pres.r - 1, self.pres.s))
        return (a, c)

    def mul(self, h1, h2):
        a, c = h1
        b, d = h2
        tw = [0] * self.pres.s
        for (i, j), v in self.pres.comm.items():
            if i < 2 or j < 2:
                continue  # the x direction never appears inside N
            f = a[i - 2] * b[j - 2]
            if f:
                for k in range(self.pres.s):
                    tw[k] += f * v[k]
        return (
            tuple(p + q for p, q in zip(a, b)),
            tuple(p + q + t for p, q, t in zip(c, d, tw)),
        )

    def inv(self, h):
        a, c = h
        tw = [0] * self.pres.s
        for (i, j), v in self.pres.comm.items():
            if i < 2 or j < 2:
                continue
            f = a[i - 2] * a[j - 2]
            if f:
                for k in range(self.pres.s):
                    tw[k] += f * v[k]
        return (tuple(-p for p in a), tuple(-p + t for p, t in zip(c, tw)))

    def phi_pow(self, h, m):
        a, c = h
        shear = [0] * self.pres.s
        for i in range(2, self.pres.r + 1):
            v = self.pres.pair(i, 1)
            f = a[i - 2]
            if f:
                for k in range(self.pres.s):
                    shear[k] += f * v[k]
        return (a, tuple(cc - m * sh for cc, sh in zip(c, shear)))

    def t_elems(self):
        out = []
        for i in range(2, self.pres.r + 1):
            lab = self.pres.labels[i - 1]
            a_pos = tuple(1 if t == i else 0 for t in range(2, self.pres.r + 1))
            a_neg = tuple(-1 if t == i else 0 for t in range(2, self.pres.r + 1))
            out.append((lab, (a_pos, (0,) * self.pres.s)))
            out.append((lab + "^-1", (a_neg, (0,) * self.pres.s)))
        return out

    def h_to_json(self, h):
        return [list(h[0]), list(h[1])]

    def h_from_json(self, obj):
        return self.canon((tuple(obj[0]), tuple(obj[1])))


class Nil2TowerGroup(SemidirectGroup):
    """A nil2 group presented as N x| <x> for the tower construction."""

    kind = "nil2sd"

    def __init__(self, pres: MalcevPresentation):
        first = pres.labels[0]
        super().__init__(Nil2Base(pres), s_o_labels=(first, first + "^-1"))
        self.pres = pres
        self.group_id = "nil2sd(r=%d,s=%d)" % (pres.r, pres.s)
        self._gens = [Elem(self.group_id, e.coords) for e in self._gens]
        self._s_o = Elem(self.group_id, self._s_o.coords)

    def structure(self):
        return {"presentation": self.pres.to_obj()}


def nil2_semidirect(pres: MalcevPresentation) -> SemidirectGroup:
    """The same nil2 group presented as N x| <x> for the tower construction."""
    return Nil2TowerGroup(pres)


def nil2_split(ctx: Nil2Group, g: Elem) -> tuple:
    """Coordinates of g in the semidirect picture: ((N-part key), level)."""
    ctx.check_member(g)
    a, c = g.coords
    lvl = a[0]
    x_back = ((-lvl,) + (0,) * (ctx.pres.r - 1), (0,) * ctx.pres.s)
    na, nc = ctx.mul_coords(g.coords, x_back)
    return ((na[1:], nc), lvl)


def nil2_tower_eps(pres: MalcevPresentation, widths: dict, heights: list[int],
                   a_n: int) -> Fraction:
    """A sound per-level ratio bound for box-shaped R_n in N.

    For each generator at position p, left multiplication shifts coordinate
    p by one and shears each central coordinate by at most
    sum_j |comm(p,j)_k| (W_j - 1) + (A_n - 1)|comm(p,1)_k|.
    """
    worst = Fraction(0)
    for p in range(2, pres.r + 1):
        total = Fraction(2, widths[p])
        for k in range(pres.s):
            shear = (a_n - 1) * abs(pres.pair(p, 1)[k])
            for j in range(2, p):
                shear += abs(pres.pair(p, j)[k]) * (widths[j] - 1)
            if shear:
                total += Fraction(2 * shear, heights[k])
        worst = max(worst, total)
    return worst


def nil2_tower_input(pres: MalcevPresentation, box: BoxParams,
                     q: Optional[Fraction] = None,
                     eps_family: Optional[dict] = None) -> TowerInput:
    """Tower input over N with R_n = (middle box) x I_n x [0, C_n)^s.

    Middle directions reuse the width B_n. The presentation must be adapted
    (generator 1 is x, generator r is y with [y, x] = z_1^mu).
    """
    if pres.pair(pres.r, 1) != (box.mu,) + (0,) * (pres.s - 1):
        raise SchemeError("presentation is not adapted to mu=%d" % box.mu)
    sd = nil2_semidirect(pres)
    base: Nil2Base = sd.base  # type: ignore[assignment]
    r_sets = []
    eps = []
    for n in range(1, box.n_max + 1):
        bw, ch = box.b_w[n - 1], box.c_h[n - 1]
        widths = {p: bw for p in range(2, pres.r + 1)}
        heights = [ch] * pres.s
        count = bw ** (pres.r - 1) * ch ** pres.s
        if count > MAX_BOX_ELEMS:
            raise SchemeError("tower R_%d would have %d elements, over the cap"
                              % (n, count))
        ranges = []
        for p in range(2, pres.r):
            ranges.append(range(bw))
        ranges.append(box.interval(n))  # the y coordinate, displaced
        for k in range(pres.s):
            ranges.append(range(ch))
        keys = set()
        for tup in itertools.product(*ranges):
            a = tup[:pres.r - 1]
            c = tup[pres.r - 1:]
            keys.add((tuple(a), tuple(c)))
        r_sets.append(FinSet(base.group_id, frozenset(keys)))
        eps.append(nil2_tower_eps(pres, widths, heights, box.a[n - 1]))
    fam = eps_family if eps_family is not None else {"kind": "explicit"}
    params = {"family": "nil2", "mu": box.mu,
              "abc": [[box.a[n - 1], box.b_w[n - 1], box.c_h[n - 1]]
                      for n in range(1, box.n_max + 1)]}
    return TowerInput(sd=sd, a_seq=list(box.a), r_sets=r_sets, eps=eps,
                      eps_family=fam, q=q, params=params)
