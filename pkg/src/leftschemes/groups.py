"""Group elements in canonical coordinates and exact finite-set algebra.

Every group context normalizes elements to a unique coordinate tuple, so
element equality is tuple equality and finite sets are plain frozensets of
coordinate keys. All set sizes and boundary ratios are exact integers and
fractions; nothing here is floating point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional

INFINITE_ORDER_CHECK = 64
WORD_STATE_CAP = 500_000


class GroupError(Exception):
    """Domain, membership or mismatch failure in exact group computations."""


class RadiusExceededError(GroupError):
    """BFS word search ran out of radius or state budget."""


@dataclass(frozen=True)
class Elem:
    """A group element: an owning group id plus canonical coordinates."""

    group_id: str
    coords: tuple

    def __repr__(self):
        return "Elem(%s, %r)" % (self.group_id, self.coords)


class GroupCtx:
    """Base class for concrete groups with canonical normal forms."""

    kind: str = "abstract"

    def __init__(self):
        self.group_id: str = self.kind
        self._gens: list[Elem] = []
        self._gen_labels: list[str] = []
        self._s_o: Optional[Elem] = None

    # -- coordinate level ---------------------------------------------------

    def identity_coords(self) -> tuple:
        raise NotImplementedError

    def mul_coords(self, a: tuple, b: tuple) -> tuple:
        raise NotImplementedError

    def inv_coords(self, a: tuple) -> tuple:
        raise NotImplementedError

    def canon_coords(self, a) -> tuple:
        """Normalize arbitrary nested-list input into canonical coords."""
        raise NotImplementedError

    # -- element level ------------------------------------------------------

    def make(self, coords) -> Elem:
        return Elem(self.group_id, self.canon_coords(coords))

    @property
    def identity(self) -> Elem:
        return Elem(self.group_id, self.identity_coords())

    def check_member(self, g: Elem) -> None:
        if g.group_id != self.group_id:
            raise GroupError(
                "group mismatch: element of %s used in %s" % (g.group_id, self.group_id)
            )

    def mul(self, g: Elem, h: Elem) -> Elem:
        self.check_member(g)
        self.check_member(h)
        return Elem(self.group_id, self.mul_coords(g.coords, h.coords))

    def inv(self, g: Elem) -> Elem:
        self.check_member(g)
        return Elem(self.group_id, self.inv_coords(g.coords))

    def power(self, g: Elem, k: int) -> Elem:
        self.check_member(g)
        if k < 0:
            return self.power(self.inv(g), -k)
        acc = self.identity_coords()
        base = g.coords
        while k:
            if k & 1:
                acc = self.mul_coords(acc, base)
            base = self.mul_coords(base, base)
            k >>= 1
        return Elem(self.group_id, acc)

    def conjugate(self, g: Elem, by: Elem) -> Elem:
        """by * g * by^-1."""
        return self.mul(self.mul(by, g), self.inv(by))

    # -- structure ----------------------------------------------------------

    @property
    def gens(self) -> list[Elem]:
        return list(self._gens)

    @property
    def gen_labels(self) -> list[str]:
        return list(self._gen_labels)

    @property
    def s_o(self) -> Optional[Elem]:
        return self._s_o

    def is_fc(self) -> bool:
        """Whether every conjugacy class is finite (abelian and finite kinds)."""
        return False

    def is_finite(self) -> bool:
        return False

    def elements(self) -> list[Elem]:
        raise GroupError("cannot enumerate elements of infinite group %s" % self.group_id)

    def gamma_level(self, g: Elem) -> int:
        """An integer level with gamma_level(s_o^k * g) == k + gamma_level(g)."""
        raise GroupError("no s_o level map for %s" % self.group_id)

    def elem_label(self, g: Elem) -> str:
        self.check_member(g)
        for e, lab in zip(self._gens, self._gen_labels):
            if e.coords == g.coords:
                return lab
        if g.coords == self.identity_coords():
            return "e"
        return json.dumps(self.coords_to_json(g.coords))

    def _set_gens(self, pairs: list[tuple[str, tuple]], s_o_label: Optional[str]) -> None:
        self._gens = [Elem(self.group_id, c) for _, c in pairs]
        self._gen_labels = [lab for lab, _ in pairs]
        if s_o_label is not None:
            idx = self._gen_labels.index(s_o_label)
            self._s_o = self._gens[idx]
            self._check_infinite_order(self._s_o)

    def _check_infinite_order(self, g: Elem) -> None:
        acc = g.coords
        e = self.identity_coords()
        for k in range(1, INFINITE_ORDER_CHECK + 1):
            if acc == e:
                raise GroupError(
                    "s_o has finite order: s_o^%d = e in %s" % (k, self.group_id)
                )
            acc = self.mul_coords(acc, g.coords)

    # -- serialization ------------------------------------------------------

    def coords_to_json(self, coords: tuple):
        return _tuples_to_lists(coords)

    def coords_from_json(self, obj) -> tuple:
        return self.canon_coords(_lists_to_tuples(obj))

    def structure(self) -> dict:
        return {}

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "structure": self.structure()}
        cfg["gens"] = [self.coords_to_json(g.coords) for g in self._gens]
        cfg["gen_labels"] = self.gen_labels
        cfg["s_o"] = self.coords_to_json(self._s_o.coords) if self._s_o else None
        return cfg


def _tuples_to_lists(x):
    if isinstance(x, tuple):
        return [_tuples_to_lists(v) for v in x]
    return x


def _lists_to_tuples(x):
    if isinstance(x, (list, tuple)):
        return tuple(_lists_to_tuples(v) for v in x)
    return x


def _as_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise GroupError("expected integer coordinate, got %r" % (v,))
    return v


# ---------------------------------------------------------------------------
# Concrete groups
# ---------------------------------------------------------------------------


class HeisenbergGroup(GroupCtx):
    """H3(Z) in normal form x^a y^b z^c with coords (a, b, c).

    Multiplication follows x^a y^b z^c * x^a' y^b' z^c'
    = x^(a+a') y^(b+b') z^(c+c'+b*a').
    """

    kind = "heisenberg"

    def __init__(self):
        super().__init__()
        self._set_gens(
            [
                ("x", (1, 0, 0)),
                ("x^-1", (-1, 0, 0)),
                ("y", (0, 1, 0)),
                ("y^-1", (0, -1, 0)),
            ],
            s_o_label="x",
        )

    def identity_coords(self):
        return (0, 0, 0)

    def mul_coords(self, a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[1] * b[0])

    def inv_coords(self, a):
        return (-a[0], -a[1], -a[2] + a[0] * a[1])

    def canon_coords(self, a):
        a = _lists_to_tuples(a)
        if len(a) != 3:
            raise GroupError("heisenberg coords need 3 integers, got %r" % (a,))
        return tuple(_as_int(v) for v in a)

    def gamma_level(self, g):
        self.check_member(g)
        return g.coords[0]


class DihedralGroup(GroupCtx):
    """The infinite dihedral group <r, s | s^2, s r s = r^-1>, coords (m, flip)."""

    kind = "dihedral"

    def __init__(self):
        super().__init__()
        self._set_gens(
            [("r", (1, 0)), ("r^-1", (-1, 0)), ("s", (0, 1))],
            s_o_label="r",
        )

    def identity_coords(self):
        return (0, 0)

    def mul_coords(self, a, b):
        m1, f1 = a
        m2, f2 = b
        return (m1 + (m2 if f1 == 0 else -m2), f1 ^ f2)

    def inv_coords(self, a):
        m, f = a
        return (m, 1) if f else (-m, 0)

    def canon_coords(self, a):
        a = _lists_to_tuples(a)
        if len(a) != 2 or a[1] not in (0, 1):
            raise GroupError("dihedral coords are (m, flip in {0,1}), got %r" % (a,))
        return (_as_int(a[0]), a[1])

    def gamma_level(self, g):
        self.check_member(g)
        return g.coords[0]


class ZdGroup(GroupCtx):
    """Free abelian Z^d with coordinatewise addition."""

    kind = "zd"

    def __init__(self, d: int):
        if d < 1:
            raise GroupError("zd needs d >= 1")
        super().__init__()
        self.d = d
        self.group_id = "zd:%d" % d
        pairs = []
        for i in range(d):
            e = tuple(1 if j == i else 0 for j in range(d))
            ne = tuple(-1 if j == i else 0 for j in range(d))
            pairs.append(("t%d" % (i + 1), e))
            pairs.append(("t%d^-1" % (i + 1), ne))
        self._set_gens(pairs, s_o_label="t1")

    def identity_coords(self):
        return (0,) * self.d

    def mul_coords(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv_coords(self, a):
        return tuple(-x for x in a)

    def canon_coords(self, a):
        a = _lists_to_tuples(a)
        if len(a) != self.d:
            raise GroupError("zd:%d coords need %d integers" % (self.d, self.d))
        return tuple(_as_int(v) for v in a)

    def is_fc(self):
        return True

    def gamma_level(self, g):
        self.check_member(g)
        return g.coords[0]

    def structure(self):
        return {"d": self.d}


class CyclicGroup(GroupCtx):
    """Z/m with coords (v,), 0 <= v < m."""

    kind = "cyclic"

    def __init__(self, m: int):
        if m < 2:
            raise GroupError("cyclic group needs modulus >= 2")
        super().__init__()
        self.m = m
        self.group_id = "cyclic:%d" % m
        pairs = [("u", (1 % m,))]
        if m > 2:
            pairs.append(("u^-1", ((m - 1) % m,)))
        self._set_gens(pairs, s_o_label=None)

    def identity_coords(self):
        return (0,)

    def mul_coords(self, a, b):
        return ((a[0] + b[0]) % self.m,)

    def inv_coords(self, a):
        return ((-a[0]) % self.m,)

    def canon_coords(self, a):
        a = _lists_to_tuples(a)
        if len(a) != 1:
            raise GroupError("cyclic coords are a single residue")
        return (_as_int(a[0]) % self.m,)

    def is_fc(self):
        return True

    def is_finite(self):
        return True

    def elements(self):
        return [Elem(self.group_id, (v,)) for v in range(self.m)]

    def structure(self):
        return {"m": self.m}


class DirectProductGroup(GroupCtx):
    """Direct product of two contexts, coords are pairs of factor coords."""

    kind = "direct_product"

    def __init__(self, left: GroupCtx, right: GroupCtx):
        super().__init__()
        self.left = left
        self.right = right
        self.group_id = "dp(%s,%s)" % (left.group_id, right.group_id)
        e1 = left.identity_coords()
        e2 = right.identity_coords()
        pairs = [
            ("L." + lab, (g.coords, e2))
            for lab, g in zip(left.gen_labels, left.gens)
        ]
        pairs += [
            ("R." + lab, (e1, g.coords))
            for lab, g in zip(right.gen_labels, right.gens)
        ]
        s_o_label = None
        if left.s_o is not None:
            idx = left.gens.index(left.s_o)
            s_o_label = "L." + left.gen_labels[idx]
        self._set_gens(pairs, s_o_label=s_o_label)

    def identity_coords(self):
        return (self.left.identity_coords(), self.right.identity_coords())

    def mul_coords(self, a, b):
        return (
            self.left.mul_coords(a[0], b[0]),
            self.right.mul_coords(a[1], b[1]),
        )

    def inv_coords(self, a):
        return (self.left.inv_coords(a[0]), self.right.inv_coords(a[1]))

    def canon_coords(self, a):
        a = _lists_to_tuples(a)
        if len(a) != 2:
            raise GroupError("direct product coords are pairs")
        return (self.left.canon_coords(a[0]), self.right.canon_coords(a[1]))

    def is_fc(self):
        return self.left.is_fc() and self.right.is_fc()

    def is_finite(self):
        return self.left.is_finite() and self.right.is_finite()

    def elements(self):
        return [
            Elem(self.group_id, (g.coords, h.coords))
            for g in self.left.elements()
            for h in self.right.elements()
        ]

    def gamma_level(self, g):
        self.check_member(g)
        return self.left.gamma_level(Elem(self.left.group_id, g.coords[0]))

    def project_left(self, g: Elem) -> Elem:
        self.check_member(g)
        return Elem(self.left.group_id, g.coords[0])

    def embed_left(self, g: Elem) -> Elem:
        self.left.check_member(g)
        return Elem(self.group_id, (g.coords, self.right.identity_coords()))

    def embed_right(self, h: Elem) -> Elem:
        self.right.check_member(h)
        return Elem(self.group_id, (self.left.identity_coords(), h.coords))

    def structure(self):
        return {"factors": [self.left.to_config(), self.right.to_config()]}


# ---------------------------------------------------------------------------
# Finite sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinSet:
    """A finite subset of one group, stored as a frozenset of coord keys."""

    group_id: str
    keys: frozenset

    def __len__(self):
        return len(self.keys)

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted(self.keys))

    def __contains__(self, item):
        if isinstance(item, Elem):
            return item.group_id == self.group_id and item.coords in self.keys
        return item in self.keys

    def elems(self, ctx: GroupCtx) -> list[Elem]:
        if ctx.group_id != self.group_id:
            raise GroupError("group mismatch: set of %s vs ctx %s" % (self.group_id, ctx.group_id))
        return [Elem(self.group_id, c) for c in self]


def finset(ctx: GroupCtx, items: Iterable) -> FinSet:
    keys = set()
    for it in items:
        if isinstance(it, Elem):
            ctx.check_member(it)
            keys.add(it.coords)
        else:
            keys.add(ctx.canon_coords(it))
    return FinSet(ctx.group_id, frozenset(keys))


def _check_same_group(a: FinSet, b: FinSet) -> None:
    if a.group_id != b.group_id:
        raise GroupError("group mismatch: %s vs %s" % (a.group_id, b.group_id))


def set_algebra(a: FinSet, b: FinSet, op: str) -> FinSet:
    _check_same_group(a, b)
    if op == "union":
        keys = a.keys | b.keys
    elif op == "intersect":
        keys = a.keys & b.keys
    elif op == "symdiff":
        keys = a.keys ^ b.keys
    elif op == "minus":
        keys = a.keys - b.keys
    else:
        raise GroupError("unknown set operation %r" % op)
    return FinSet(a.group_id, keys)


def set_translate(ctx: GroupCtx, side: str, g: Elem, e: FinSet) -> FinSet:
    """gE for side 'left', Eg for side 'right'."""
    ctx.check_member(g)
    if e.group_id != ctx.group_id:
        raise GroupError("group mismatch: set of %s vs ctx %s" % (e.group_id, ctx.group_id))
    gc = g.coords
    mul = ctx.mul_coords
    if side == "left":
        keys = frozenset(mul(gc, c) for c in e.keys)
    elif side == "right":
        keys = frozenset(mul(c, gc) for c in e.keys)
    else:
        raise GroupError("side must be 'left' or 'right', got %r" % side)
    return FinSet(ctx.group_id, keys)


def set_invert(ctx: GroupCtx, e: FinSet) -> FinSet:
    """Pointwise inverse E^-1; plumbing for forbidden-set computations."""
    if e.group_id != ctx.group_id:
        raise GroupError("group mismatch: set of %s vs ctx %s" % (e.group_id, ctx.group_id))
    inv = ctx.inv_coords
    return FinSet(ctx.group_id, frozenset(inv(c) for c in e.keys))


def boundary_count(ctx: GroupCtx, side: str, g: Elem, e: FinSet) -> int:
    """|gE symdiff E| (or right version), exactly."""
    t = set_translate(ctx, side, g, e)
    return len(t.keys ^ e.keys)


def boundary_ratio(ctx: GroupCtx, side: str, g: Elem, e: FinSet) -> Fraction:
    if not e.keys:
        raise GroupError("boundary ratio of the empty set is undefined")
    return Fraction(boundary_count(ctx, side, g, e), len(e))


def word_decompose(ctx: GroupCtx, g: Elem, max_len: int = 12) -> list[Elem]:
    """A minimal generator word for g, found by breadth-first search.

    Returns a list (s_1, ..., s_k) of generators with s_1 * ... * s_k == g.
    Raises RadiusExceededError when g is not within max_len or when the
    search ball exceeds the state cap.
    """
    ctx.check_member(g)
    target = g.coords
    e = ctx.identity_coords()
    if target == e:
        return []
    gens = ctx.gens
    parent: dict[tuple, tuple] = {e: None}  # coords -> (prev coords, gen index)
    frontier = [e]
    for _ in range(max_len):
        nxt = []
        for cur in frontier:
            for i, s in enumerate(gens):
                new = ctx.mul_coords(cur, s.coords)
                if new in parent:
                    continue
                parent[new] = (cur, i)
                if new == target:
                    word = []
                    c = new
                    while parent[c] is not None:
                        prev, gi = parent[c]
                        word.append(gens[gi])
                        c = prev
                    word.reverse()
                    return word
                nxt.append(new)
        if len(parent) > WORD_STATE_CAP:
            raise RadiusExceededError(
                "word search state cap exceeded for %r" % (target,)
            )
        frontier = nxt
    raise RadiusExceededError(
        "radius exceeded: no word of length <= %d reaches %r" % (max_len, target)
    )


def conjugacy_class(ctx: GroupCtx, g: Elem, cap: int = 10_000) -> FinSet:
    """Closure of {g} under conjugation by generators; error beyond cap."""
    ctx.check_member(g)
    seen = {g.coords}
    frontier = [g.coords]
    while frontier:
        nxt = []
        for c in frontier:
            for s in ctx.gens:
                cc = ctx.mul_coords(ctx.mul_coords(s.coords, c), ctx.inv_coords(s.coords))
                if cc not in seen:
                    seen.add(cc)
                    nxt.append(cc)
                    if len(seen) > cap:
                        raise GroupError("conjugacy class exceeds cap %d" % cap)
        frontier = nxt
    return FinSet(ctx.group_id, frozenset(seen))


def ball(ctx: GroupCtx, radius: int, cap: int = WORD_STATE_CAP) -> FinSet:
    """The generator-word ball of the given radius around the identity."""
    e = ctx.identity_coords()
    seen = {e}
    frontier = [e]
    for _ in range(radius):
        nxt = []
        for cur in frontier:
            for s in ctx.gens:
                new = ctx.mul_coords(cur, s.coords)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
                    if len(seen) > cap:
                        raise GroupError("ball exceeds cap %d" % cap)
        frontier = nxt
    return FinSet(ctx.group_id, frozenset(seen))


def finset_to_json(e: FinSet) -> list:
    return [_tuples_to_lists(c) for c in sorted(e.keys)]


def finset_from_json(ctx: GroupCtx, obj: list) -> FinSet:
    return finset(ctx, (_lists_to_tuples(c) for c in obj))
