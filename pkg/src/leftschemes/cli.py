"""Command-line front end: build, verify, analyze and emit reports.

Subcommands consume and produce JSON (CSV for series); outputs are
deterministic for a fixed config and seed. Exit codes: 0 when every exact
check passes, 1 when a check fails, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from random import Random
from typing import Optional

import jsonschema

from .bernoulli import (
    ProductMeasure,
    conservativity_diagnostic,
    cylinder,
    kakutani_report,
    pushforward_check,
)
from .catalog import (
    ConfigError,
    build_window,
    extension_from_config,
    load_window,
)
from .cocycle import (
    cocycle_norm_report,
    dihedral_left_partial,
    dihedral_right_partial,
    dinf_no_scheme_check,
)
from .groups import DihedralGroup, GroupError, finset, set_translate
from .lifting import lift_scheme
from .nilpotent import smith_normal_form, snf_check
from .report import VerifyReport, fmt_q
from .scheme import (
    SchemeError,
    leftsch_check,
    phi_from_a,
    phi_partial,
    rearrange,
    verify_scheme,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


class _StageFailed(Exception):
    """Internal marker: a pipeline stage had a failing exact row."""


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("%s is not valid JSON: %s" % (path, exc))


def _load_window_file(path: str):
    obj = _read_json(path)
    try:
        return load_window(obj)
    except (GroupError, SchemeError) as exc:
        raise ConfigError("bad window file %s: %s" % (path, exc))


def config_schema() -> dict:
    text = (resources.files("leftschemes") / "schema" /
            "config.schema.json").read_text()
    return json.loads(text)


def validate_config(cfg) -> dict:
    try:
        jsonschema.validate(cfg, config_schema())
    except jsonschema.exceptions.ValidationError as exc:
        raise ConfigError("config rejected: %s" % exc.message)
    return cfg


def _build_from_group_cfg(gcfg: dict):
    opts = dict(gcfg)
    name = opts.pop("name")
    return build_window(name, **opts)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    if args.config:
        cfg = validate_config(_read_json(args.config))
        w = _build_from_group_cfg(cfg["group"])
        out = args.output if args.output != "-" else cfg.get("out", "-")
    else:
        if not args.group:
            raise ConfigError("build needs --group or --config")
        w = build_window(args.group, profile=args.profile, n_max=args.n_max,
                         d=args.d, mu=args.mu)
        out = args.output
    _emit(out, w.dumps() + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    w = _load_window_file(args.scheme)
    rep = verify_scheme(w, shift_bound=args.shift_bound, jobs=args.jobs)
    if args.emit_csv:
        _emit(args.emit_csv, rep.series_csv("phi_k"))
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


def cmd_rearrange(args) -> int:
    w = _load_window_file(args.scheme)
    try:
        out = rearrange(w)
    except SchemeError as exc:
        _emit(args.output, _dumps({"title": "rearrange", "passed": False,
                                   "error": str(exc)}))
        return EXIT_FAIL
    if args.report:
        _emit(args.report, _dumps(leftsch_check(out, w).to_obj()))
    _emit(args.output, out.dumps() + "\n")
    return EXIT_OK


def cmd_phi(args) -> int:
    w = _load_window_file(args.scheme)
    rep = VerifyReport(title="phi")
    rep.meta["group"] = w.ctx.group_id
    a_seq = w.a_seq()
    rows = []
    for k in range(0, args.max_power + 1):
        phi = phi_partial(w, w.ctx.power(w.s_o, k))
        row = {"k": k, "phi": fmt_q(phi), "phi_float": float(phi)}
        if a_seq:
            formula = phi_from_a(k, a_seq)
            row["formula"] = fmt_q(formula)
            rep.add("phi-formula", "k=%d" % k, "exact", phi == formula,
                    lhs=fmt_q(phi), rhs=fmt_q(formula))
        else:
            rep.add("phi", "k=%d" % k, "info", None, lhs=fmt_q(phi))
        rows.append(row)
    rep.series["phi_power"] = rows
    for s in w.gens:
        rep.add("phi-gen", "s=%s" % w.gen_label(s), "info", None,
                lhs=fmt_q(phi_partial(w, s)))
    if args.emit_csv:
        _emit(args.emit_csv, rep.series_csv("phi_power"))
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


def cmd_cocycle(args) -> int:
    w = _load_window_file(args.scheme)
    try:
        rep = cocycle_norm_report(w)
    except SchemeError as exc:
        _emit(args.output, _dumps({"title": "cocycle-norms", "passed": False,
                                   "error": str(exc)}))
        return EXIT_FAIL
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


def _bernoulli_report(w, eps: Fraction, seed: int, samples: int,
                      k_powers: Optional[list[int]]) -> VerifyReport:
    if not w.params.get("leftsch_verified"):
        w = rearrange(w)
    mu = ProductMeasure.from_window(w, eps)
    rep = VerifyReport(title="bernoulli")
    rep.meta["eps"] = fmt_q(eps)
    rep.meta["seed"] = seed
    rep.extend(mu.band_check())
    rep.extend(kakutani_report(mu, w))
    rep.extend(conservativity_diagnostic(w, eps, k_powers=k_powers))
    ctx = w.ctx
    rng = Random(seed)
    atoms = sorted(mu.domain)
    for s in w.gens:
        lab = w.gen_label(s)
        for j in range(samples):
            pts = rng.sample(atoms, k=min(len(atoms), rng.randrange(1, 9)))
            cyl = cylinder(ctx, [(c, rng.randrange(2)) for c in pts])
            for side in ("left", "right"):
                sub = pushforward_check(mu, side, s, cyl)
                for row in sub.rows:
                    rep.add(row.check, "s=%s #%d %s %s" % (lab, j, side,
                                                           row.subject),
                            row.kind, row.passed, lhs=row.lhs, rhs=row.rhs,
                            witness=row.witness)
    return rep


def cmd_bernoulli(args) -> int:
    w = _load_window_file(args.scheme)
    try:
        eps = Fraction(args.eps)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError("bad eps %r: %s" % (args.eps, exc))
    try:
        rep = _bernoulli_report(w, eps, args.seed, args.samples,
                                args.k_powers)
    except SchemeError as exc:
        _emit(args.output, _dumps({"title": "bernoulli", "passed": False,
                                   "error": str(exc)}))
        return EXIT_FAIL
    if args.emit_csv:
        _emit(args.emit_csv, rep.series_csv("exp_partial"))
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


def cmd_lift(args) -> int:
    w = _load_window_file(args.scheme)
    ext = extension_from_config(_read_json(args.extension))
    try:
        lifted, rep = lift_scheme(ext, w)
    except (SchemeError, GroupError) as exc:
        _emit(args.output, _dumps({"title": "lift", "passed": False,
                                   "error": str(exc)}))
        return EXIT_FAIL
    if args.out_scheme:
        _emit(args.out_scheme, lifted.dumps() + "\n")
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


def cmd_snf(args) -> int:
    rep = VerifyReport(title="snf")
    if args.matrix:
        try:
            m = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise ConfigError("bad --matrix JSON: %s" % exc)
        if (not isinstance(m, list) or not m
                or any(not isinstance(r, list) or len(r) != len(m[0])
                       or not all(isinstance(x, int) for x in r) for r in m)):
            raise ConfigError("--matrix must be a rectangular integer matrix")
        mats = [m]
    else:
        rng = Random(args.seed)
        mats = []
        for _ in range(args.count):
            rows = rng.randrange(1, args.size + 1)
            cols = rng.randrange(1, args.size + 1)
            mats.append([[rng.randrange(-args.bound, args.bound + 1)
                          for _ in range(cols)] for _ in range(rows)])
    for i, m in enumerate(mats):
        u, d, v = smith_normal_form(m)
        ok = snf_check(m, u, d, v)
        diag = [d[t][t] for t in range(min(len(d), len(d[0])))]
        rep.add("snf", "matrix %d (%dx%d)" % (i, len(m), len(m[0])), "exact",
                ok, lhs="diag " + repr(diag), rhs="U m V = D, U,V unimodular")
    _emit(args.output, _dumps(rep.to_obj()))
    return EXIT_OK if rep.all_exact_passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def _dihedral_pipeline(cfg: dict, stages: list) -> None:
    m_max = cfg.get("dihedral_m_max", 2000)
    n_sets = cfg.get("dihedral_sets", 50)
    seed = cfg.get("seed", 0)

    rep = VerifyReport(title="dihedral-contrast")
    right = dihedral_right_partial(m_max)
    harmonic = sum((Fraction(1, m) for m in range(1, m_max + 1)),
                   start=Fraction(0))
    rep.add("right-partial", "M=%d" % m_max, "exact",
            right >= 4 * harmonic - 8,
            lhs=fmt_q(right), rhs=">= 4H(M) - 8 = " + fmt_q(4 * harmonic - 8))
    left, majorant, dominated = dihedral_left_partial(m_max)
    rep.add("left-partial", "M=%d" % m_max, "exact",
            dominated and majorant < 1,
            lhs=str(left), rhs="<= %s < 1 (telescoping)" % fmt_q(majorant))
    stages.append(_stage_obj("contrast", rep))
    if not rep.all_exact_passed:
        raise _StageFailed("contrast")

    ctx = DihedralGroup()
    rng = Random(seed)
    rep2 = VerifyReport(title="dihedral-no-scheme")
    for i in range(n_sets):
        keys: set = set()
        target = rng.randrange(1, 13)
        while len(keys) < target:
            c = (rng.randrange(-20, 21), rng.randrange(2))
            e = finset(ctx, list(keys | {c}))
            moved = set_translate(ctx, "right", ctx.s_o, e)
            if not (moved.keys & e.keys):
                keys.add(c)
        sub = dinf_no_scheme_check(ctx, finset(ctx, sorted(keys)))
        for row in sub.rows:
            rep2.add(row.check, "set %d: %s" % (i, row.subject), row.kind,
                     row.passed, lhs=row.lhs, rhs=row.rhs, witness=row.witness)
    stages.append(_stage_obj("no-scheme", rep2))
    if not rep2.all_exact_passed:
        raise _StageFailed("no-scheme")


def _stage_obj(name: str, rep: VerifyReport) -> dict:
    obj = rep.to_obj()
    obj["stage"] = name
    return obj


def run_pipeline(cfg: dict, jobs: int = 1) -> tuple[dict, Optional[str]]:
    """All stages for one config; returns (report object, bernoulli CSV)."""
    out: dict = {"config": cfg, "stages": [], "failed_stage": None,
                 "passed": True}
    stages = out["stages"]
    csv_text: Optional[str] = None
    gcfg = cfg["group"]
    try:
        if gcfg["name"] == "dihedral":
            _dihedral_pipeline(cfg, stages)
            return out, None

        def run(name, fn):
            rep = fn()
            stages.append(_stage_obj(name, rep))
            if not rep.all_exact_passed:
                raise _StageFailed(name)
            return rep

        w = _build_from_group_cfg(gcfg)
        shift_bound = cfg.get("shift_bound", 6)
        run("build", lambda: verify_scheme(w, shift_bound=shift_bound,
                                           jobs=jobs))
        rearranged = rearrange(w)
        run("rearrange", lambda: leftsch_check(rearranged, w))
        run("cocycle", lambda: cocycle_norm_report(rearranged))
        eps = Fraction(cfg.get("eps", "1/8"))
        bern = _bernoulli_report(rearranged, eps, cfg.get("seed", 0),
                                 cfg.get("cylinder_samples", 3),
                                 cfg.get("k_powers"))
        stages.append(_stage_obj("bernoulli", bern))
        csv_text = bern.series_csv("exp_partial")
        if not bern.all_exact_passed:
            raise _StageFailed("bernoulli")
        if "lift" in cfg:
            ext = extension_from_config(cfg["lift"])
            mp = tuple(cfg.get("marker_powers", (1, 2, 4, 8, 16)))
            run("lift", lambda: lift_scheme(ext, rearranged,
                                            marker_powers=mp)[1])
    except _StageFailed as exc:
        out["failed_stage"] = str(exc)
        out["passed"] = False
    except (SchemeError, GroupError) as exc:
        # A construction-time violation, reported as a failure with witness.
        out["failed_stage"] = "error"
        out["passed"] = False
        out["error"] = str(exc)
    return out, csv_text


def cmd_pipeline(args) -> int:
    cfg = validate_config(_read_json(args.config))
    out_obj, csv_text = run_pipeline(cfg, jobs=args.jobs)
    dest = args.output if args.output != "-" else cfg.get("out", "-")
    _emit(dest, _dumps(out_obj))
    csv_dest = args.emit_csv or cfg.get("emit_csv")
    if csv_dest and csv_text is not None:
        _emit(csv_dest, csv_text)
    return EXIT_OK if out_obj["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="leftschemes",
        description="Exact construction and verification of displaced "
                    "window schemes, their step-vector norms, and the "
                    "derived Bernoulli diagnostics.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a window and write its JSON")
    b.add_argument("--group", help="heisenberg, wreath or bs")
    b.add_argument("--config", help="run config JSON (overrides flags)")
    b.add_argument("--profile", default="desk")
    b.add_argument("--n-max", type=int, default=None, dest="n_max")
    b.add_argument("--d", type=int, default=2, help="BS parameter d")
    b.add_argument("--mu", type=int, default=1,
                   help="commutator multiplier for the heisenberg box")
    b.add_argument("-o", "--output", default="-")
    b.set_defaults(fn=cmd_build)

    v = sub.add_parser("verify", help="check the window axioms exactly")
    v.add_argument("scheme")
    v.add_argument("--shift-bound", type=int, default=8, dest="shift_bound")
    v.add_argument("--emit-csv", dest="emit_csv",
                   help="write the (k, phi, exp-sum) series CSV here")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("-o", "--output", default="-")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("rearrange",
                       help="shift levels into a nested disjoint family")
    r.add_argument("scheme")
    r.add_argument("--report", help="write the conclusion rows here")
    r.add_argument("-o", "--output", default="-")
    r.set_defaults(fn=cmd_rearrange)

    f = sub.add_parser("phi", help="marker-power boundary sums")
    f.add_argument("scheme")
    f.add_argument("--max-power", type=int, default=8, dest="max_power")
    f.add_argument("--emit-csv", dest="emit_csv")
    f.add_argument("-o", "--output", default="-")
    f.set_defaults(fn=cmd_phi)

    c = sub.add_parser("cocycle", help="translate-difference norms")
    c.add_argument("scheme")
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(fn=cmd_cocycle)

    n = sub.add_parser("bernoulli", help="product-measure diagnostics")
    n.add_argument("scheme")
    n.add_argument("--eps", default="1/8", help="marginal step, a rational")
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--samples", type=int, default=3,
                   help="random cylinders per generator")
    n.add_argument("--k-powers", type=int, nargs="+", default=None,
                   dest="k_powers")
    n.add_argument("--emit-csv", dest="emit_csv",
                   help="write the (K, exp-sum, delta) series CSV here")
    n.add_argument("-o", "--output", default="-")
    n.set_defaults(fn=cmd_bernoulli)

    l = sub.add_parser("lift", help="lift a window through an extension")
    l.add_argument("scheme")
    l.add_argument("--extension", required=True,
                   help="extension config JSON file")
    l.add_argument("--out-scheme", dest="out_scheme",
                   help="write the lifted window JSON here")
    l.add_argument("-o", "--output", default="-")
    l.set_defaults(fn=cmd_lift)

    s = sub.add_parser("snf", help="Smith normal forms with exact checks")
    s.add_argument("--matrix", help="one matrix as JSON")
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--size", type=int, default=6)
    s.add_argument("--bound", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(fn=cmd_snf)

    q = sub.add_parser("pipeline", help="chain build, rearrange, cocycle, "
                                        "bernoulli and optional lift")
    q.add_argument("config")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--emit-csv", dest="emit_csv")
    q.add_argument("-o", "--output", default="-")
    q.set_defaults(fn=cmd_pipeline)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
