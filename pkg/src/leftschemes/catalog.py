"""Config-driven construction of groups, windows and extensions.

Every context the package ships can be rebuilt from the dict its
to_config() emits, so windows and reports round-trip through JSON. The
builders here also centralize which groups refuse window construction
and why.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .groups import (
    CyclicGroup,
    DihedralGroup,
    DirectProductGroup,
    GroupCtx,
    GroupError,
    HeisenbergGroup,
    ZdGroup,
)
from .lifting import ExtensionData, direct_product_extension, heis_center_extension
from .nilpotent import (
    MalcevPresentation,
    Nil2Group,
    Nil2TowerGroup,
    build_heisenberg_scheme,
    heisenberg_box_profile,
    heisenberg_presentation,
)
from .scheme import SchemeError, SchemeWindow
from .semidirect import BSGroup, WreathGroup, bs_input, tower_build, wreath_input


class ConfigError(Exception):
    """A malformed, inconsistent or unsupported configuration."""


def group_from_config(cfg: dict) -> GroupCtx:
    """Rebuild a context from the dict shape emitted by to_config()."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("group config needs a 'kind' key")
    kind = cfg["kind"]
    st = cfg.get("structure", {}) or {}
    try:
        if kind == "heisenberg":
            return HeisenbergGroup()
        if kind == "dihedral":
            return DihedralGroup()
        if kind == "zd":
            return ZdGroup(int(st["d"]))
        if kind == "cyclic":
            return CyclicGroup(int(st["m"]))
        if kind == "direct_product":
            factors = st["factors"]
            if len(factors) != 2:
                raise ConfigError("direct_product needs exactly two factors")
            return DirectProductGroup(group_from_config(factors[0]),
                                      group_from_config(factors[1]))
        if kind == "wreath":
            return WreathGroup(group_from_config(st["base"]))
        if kind == "baumslag_solitar":
            return BSGroup(int(st["d"]))
        if kind == "nil2":
            return Nil2Group(MalcevPresentation.from_obj(st["presentation"]))
        if kind == "nil2sd":
            return Nil2TowerGroup(MalcevPresentation.from_obj(st["presentation"]))
    except KeyError as exc:
        raise ConfigError("group config for %r is missing %s" % (kind, exc))
    except (GroupError, ValueError, TypeError) as exc:
        raise ConfigError("bad group config for %r: %s" % (kind, exc))
    raise ConfigError("unknown group kind %r" % kind)


def load_window(obj: dict) -> SchemeWindow:
    """A SchemeWindow from its JSON object, contexts resolved by kind."""
    try:
        return SchemeWindow.from_json_obj(obj, group_from_config)
    except (KeyError, TypeError) as exc:
        raise ConfigError("malformed window JSON: %r" % (exc,))


def refusal_reason(ctx: GroupCtx) -> Optional[str]:
    """Why no displaced window is constructed on this context, or None.

    FC contexts (abelian and finite kinds, and their products) cannot carry
    a displaced window with summable class boundaries; the dihedral group
    and its finite extensions have the left-overlap obstruction instead.
    """
    if ctx.is_fc():
        return ("every conjugacy class of %s is finite; no displacement "
                "generator admits summable boundary ratios" % ctx.group_id)
    if ctx.kind == "dihedral" or (
            ctx.kind == "direct_product" and ctx.left.kind == "dihedral"
            and ctx.right.is_finite()):
        return ("%s is a finite extension of the infinite dihedral group; "
                "displaced sets force left overlaps through the kernel"
                % ctx.group_id)
    return None


DESK_N_MAX = {"heisenberg": 4, "wreath": 3, "bs": 3}


def desk_levels(n_max: int) -> tuple[list[int], Fraction]:
    """The doubling level sequence A_n = 2^n with growth rate q = 2."""
    return [2 ** n for n in range(1, n_max + 1)], Fraction(2)


def build_window(group: str, profile: str = "desk",
                 n_max: Optional[int] = None, d: int = 2,
                 mu: int = 1) -> SchemeWindow:
    """The shipped construction for one of the named groups.

    Groups without a construction (abelian, finite, dihedral-like) raise
    ConfigError with the obstruction spelled out.
    """
    if profile != "desk":
        raise ConfigError("unknown profile %r (only 'desk' is shipped)" % profile)
    if n_max is None:
        n_max = DESK_N_MAX.get(group, 3)
    if n_max < 1:
        raise ConfigError("n_max must be at least 1")
    try:
        if group == "heisenberg":
            box = heisenberg_box_profile(n_max, mu=mu)
            if mu == 1:
                ctx: GroupCtx = HeisenbergGroup()
            else:
                ctx = Nil2Group(heisenberg_presentation(mu))
            return build_heisenberg_scheme(ctx, box, q=Fraction(2))
        if group == "wreath":
            a_seq, q = desk_levels(n_max)
            return tower_build(wreath_input(WreathGroup(CyclicGroup(2)), a_seq, q=q))
        if group == "bs":
            a_seq, q = desk_levels(n_max)
            return tower_build(bs_input(BSGroup(d), a_seq, q=q))
    except (SchemeError, GroupError) as exc:
        raise ConfigError("cannot build %s window: %s" % (group, exc))
    probe = {"zd": ZdGroup(max(d, 1)), "cyclic": CyclicGroup(max(d, 2)),
             "dihedral": DihedralGroup()}.get(group)
    if probe is not None:
        reason = refusal_reason(probe)
        if reason:
            raise ConfigError("refusing to build on %s: %s" % (group, reason))
    raise ConfigError("unknown group %r; shipped builders: heisenberg, "
                      "wreath, bs" % group)


def extension_from_config(cfg: dict) -> ExtensionData:
    """An extension from {"Q": group config, "N": {kind, params}, "twist"?: seed}.

    The named form {"name": "heisenberg/center"} selects the central
    extension of the integer Heisenberg group instead of a product.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("extension config must be an object")
    name = cfg.get("name")
    if name is not None:
        if name != "heisenberg/center":
            raise ConfigError("unknown extension name %r" % name)
        if "Q" in cfg or "N" in cfg:
            raise ConfigError("a named extension does not take Q/N factors")
        return heis_center_extension()
    if "Q" not in cfg or "N" not in cfg:
        raise ConfigError("extension config needs Q and N (or a name)")
    q_ctx = group_from_config(cfg["Q"])
    n_cfg = cfg["N"]
    if not isinstance(n_cfg, dict) or "kind" not in n_cfg:
        raise ConfigError("extension N needs a 'kind'")
    n_ctx = group_from_config(
        {"kind": n_cfg["kind"], "structure": n_cfg.get("params", {})})
    twist = cfg.get("twist")
    if twist is not None and not isinstance(twist, str):
        raise ConfigError("twist must be a string seed")
    try:
        return direct_product_extension(q_ctx, n_ctx, twist_seed=twist)
    except (SchemeError, GroupError) as exc:
        raise ConfigError("cannot assemble extension: %s" % exc)
