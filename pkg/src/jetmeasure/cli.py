"""Command-line entry point.

Output is deterministic for a fixed configuration: enumeration orders are
fixed, rationals print as a/b, classes print in their canonical text form.
``--machine`` switches every command to one key=value line per quantity.

Exit codes: 0 success, 1 usage or data errors, 2 a checked identity failed,
3 inconclusive (unresolved lifting verdicts).
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .errors import InconclusiveError, JetMeasureError
from .grothendieck import parse_class, specialize_count
from .growth import ChartLocus, growth_check, nu_of_component
from .jets import (
    Budget,
    MixedMode,
    SeriesMode,
    count_jets,
    fibration_check,
    image_count,
)
from .measure import (
    Count,
    CylinderSpec,
    Stability,
    Symbolic,
    additivity_check,
    calabi_yau_class,
    change_of_variables_check,
    cylinder_measure,
    integral_of_order,
    load_presentation,
    neron_integral,
    parse_condition,
    serre_invariant,
)
from .models import load_model_file
from .padic import compare_motivic, cylinder_volume, padic_integral
from .poly import parse_poly
from .rings import PrimeField, is_prime
from .witt import WittVector, structure_polys, witt_add, witt_mul, witt_to_residue

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT = 2
EXIT_INCONCLUSIVE = 3


class Output:
    def __init__(self, machine: bool):
        self.machine = machine

    def human(self, text: str):
        if not self.machine:
            print(text)

    def kv(self, key: str, value):
        if self.machine:
            print(f"{key}={value}")

    def both(self, key: str, text: str, value=None):
        if self.machine:
            print(f"{key}={text if value is None else value}")
        else:
            print(text)


def _budget(args) -> Budget:
    limit = args.budget or int(os.environ.get("GREENBERG_BUDGET", 10 ** 8))
    return Budget(limit)


def _field_for(q: int) -> PrimeField:
    if not is_prime(q):
        raise JetMeasureError(
            f"q={q}: prime powers with exponent > 1 need a modulus polynomial; "
            "construct an ExtensionField through the library API"
        )
    return PrimeField(q)


def _base_for(q: int, mixed: bool):
    if mixed:
        return MixedMode(q)
    return SeriesMode(_field_for(q))


def _pick_model(spec: str):
    path, _, name = spec.partition(":")
    mf = load_model_file(path)
    if name:
        if name not in mf.models:
            raise JetMeasureError(f"no model named '{name}' in {path}")
        return mf.models[name]
    return mf.only_model()


def _pick_morphism(spec: str):
    path, _, name = spec.partition(":")
    mf = load_model_file(path)
    if name:
        if name not in mf.morphisms:
            raise JetMeasureError(f"no morphism named '{name}' in {path}")
        return mf.morphisms[name]
    if len(mf.morphisms) != 1:
        raise JetMeasureError(f"{path} defines {len(mf.morphisms)} morphisms; name one")
    return next(iter(mf.morphisms.values()))


def _pick_cover(spec: str):
    path, _, name = spec.partition(":")
    mf = load_model_file(path)
    if name:
        return mf.covers[name]
    if len(mf.covers) != 1:
        raise JetMeasureError(f"{path} defines {len(mf.covers)} covers; name one")
    return next(iter(mf.covers.values()))


def _locus_polys(text: str, variables):
    polys = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if chunk.endswith("=0"):
            chunk = chunk[:-2].strip()
        elif chunk.endswith("= 0"):
            chunk = chunk[:-3].strip()
        polys.append(parse_poly(chunk, variables))
    return tuple(polys)


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# --- subcommands ------------------------------------------------------------


def cmd_jets_count(args, out: Output) -> int:
    model = _pick_model(args.model)
    base = _base_for(args.q, args.mixed)
    n = count_jets(model, args.level, base, _budget(args))
    out.both("count", str(n))
    return EXIT_OK


def cmd_jets_image(args, out: Output) -> int:
    model = _pick_model(args.model)
    base = _base_for(args.q, args.mixed)
    rep = image_count(model, args.level, base, args.depth, _budget(args))
    out.human(rep.interval_text())
    out.kv("lower", rep.lower)
    out.kv("upper", rep.upper)
    out.kv("unknown", rep.unknown)
    return EXIT_INCONCLUSIVE if rep.unknown else EXIT_OK


def cmd_jets_fibration(args, out: Output) -> int:
    model = _pick_model(args.model)
    base = _base_for(args.q, args.mixed)
    rep = fibration_check(model, args.n, args.m, base, _budget(args))
    (n, cn), (nm, cnm) = rep.level_counts
    out.human(f"count({n}) = {cn}")
    out.human(f"count({nm}) = {cnm}")
    out.human(f"fibre factor q^(d*m) = {rep.expected_ratio}")
    out.human(f"fibration holds: {str(rep.ok).lower()}")
    out.kv("count_n", cn)
    out.kv("count_nm", cnm)
    out.kv("factor", rep.expected_ratio)
    out.kv("ok", str(rep.ok).lower())
    return EXIT_OK if rep.ok else EXIT_VERDICT


def cmd_measure_cylinder(args, out: Output) -> int:
    model = _pick_model(args.model)
    cond = parse_condition(args.where, model.variables)
    stability = Stability(args.stability) if args.stability != "inside-gr-e" else Stability(
        args.stability, args.gr_level
    )
    spec = CylinderSpec(model, args.level, cond, stability)
    coherent = True
    symbolic = None
    if args.cls:
        symbolic = cylinder_measure(spec, Symbolic(parse_class(args.cls)))
        out.both("class", f"class = {symbolic.to_text()}", symbolic.to_text())
    for q in args.q:
        val = cylinder_measure(spec, Count(_base_for(q, args.mixed), _budget(args)))
        out.both(f"measure_q{q}", f"measure at q={q}: {_frac(val)}", _frac(val))
        if symbolic is not None and specialize_count(symbolic, q) != val:
            coherent = False
    if symbolic is not None:
        out.both("coherent", f"backends agree: {str(coherent).lower()}", str(coherent).lower())
    return EXIT_OK if coherent else EXIT_VERDICT


def cmd_measure_integral(args, out: Output) -> int:
    model = _pick_model(args.model)
    f = parse_poly(args.f, model.variables)
    for q in args.q:
        res = integral_of_order(
            model,
            f,
            Count(_base_for(q, args.mixed), _budget(args)),
            cutoff=args.cutoff,
            unit=args.unit,
        )
        if res.exact:
            out.both(f"integral_q{q}", f"integral at q={q}: {_frac(res.value)} (exact)", _frac(res.value))
        else:
            out.both(
                f"integral_q{q}",
                f"integral at q={q}: {_frac(res.value)} (tail <= {_frac(res.tail_bound)})",
                _frac(res.value),
            )
            out.kv(f"tail_q{q}", _frac(res.tail_bound))
    return EXIT_OK


def cmd_neron(args, out: Output) -> int:
    pres = load_presentation(args.components)
    total = neron_integral(pres)
    out.both("integral", f"integral = {total.to_text()}", total.to_text())
    for q in args.q:
        val = specialize_count(total, q)
        out.both(f"value_q{q}", f"at q={q}: {_frac(val)}", _frac(val))
    return EXIT_OK


def cmd_serre(args, out: Output) -> int:
    pres = load_presentation(args.components)
    lam, residues = serre_invariant(pres, tuple(args.q))
    parts = [f"lambda = {lam.to_text()}"]
    for q in args.q:
        parts.append(f"s mod (q-1) = {residues[q]}")
    out.human(" ; ".join(parts))
    out.kv("lambda", lam.to_text())
    for q in args.q:
        out.kv(f"s_q{q}", residues[q])
    return EXIT_OK


def cmd_cy(args, out: Output) -> int:
    pres = load_presentation(args.components)
    cls = calabi_yau_class(pres)
    out.both("class", f"class = {cls.to_text()}", cls.to_text())
    return EXIT_OK


def cmd_cov_verify(args, out: Output) -> int:
    h = _pick_morphism(args.morphism)
    cond = parse_condition(args.B, h.source.variables)
    base = _base_for(args.q, False)
    rep = change_of_variables_check(h, cond, args.level, base, _budget(args), depth=args.depth)
    out.human(f"image side    = {_frac(rep.lhs)}")
    out.human(f"weighted side = {_frac(rep.rhs)}")
    out.human(f"jacobian orders: {rep.orders}")
    out.human(f"fibres are q^e: {str(rep.fibre_ok).lower()}")
    out.human(f"shifted injectivity: {str(rep.shift_ok).lower()}")
    out.human(f"change of variables holds: {str(rep.ok).lower()}")
    out.kv("lhs", _frac(rep.lhs))
    out.kv("rhs", _frac(rep.rhs))
    out.kv("fibre_ok", str(rep.fibre_ok).lower())
    out.kv("shift_ok", str(rep.shift_ok).lower())
    out.kv("ok", str(rep.ok).lower())
    return EXIT_OK if rep.ok and rep.fibre_ok and rep.shift_ok else EXIT_VERDICT


def cmd_cov_additivity(args, out: Output) -> int:
    cover = _pick_cover(args.cover)
    f = parse_poly(args.f, cover.total.variables)
    rep = additivity_check(cover, f, _base_for(args.q, False), _budget(args))
    out.human(f"total side = {_frac(rep.lhs)}")
    out.human(f"inclusion-exclusion side = {_frac(rep.rhs)}")
    out.human(f"additivity holds: {str(rep.ok).lower()}")
    out.kv("lhs", _frac(rep.lhs))
    out.kv("rhs", _frac(rep.rhs))
    out.kv("ok", str(rep.ok).lower())
    return EXIT_OK if rep.ok else EXIT_VERDICT


def cmd_padic_volume(args, out: Output) -> int:
    model = _pick_model(args.model)
    cond = parse_condition(args.where, model.variables)
    spec = CylinderSpec(model, args.level, cond, Stability("smooth-model"))
    vol = cylinder_volume(spec, _base_for(args.q, args.mixed), _budget(args))
    out.both("volume", _frac(vol.value))
    return EXIT_OK


def cmd_padic_integral(args, out: Output) -> int:
    model = _pick_model(args.model)
    f = parse_poly(args.f, model.variables)
    rep = padic_integral(model, f, _base_for(args.q, args.mixed), args.cutoff, _budget(args))
    out.human(f"partial = {_frac(rep.partial)}")
    out.human(f"tail <= {_frac(rep.tail_bound)}")
    out.kv("partial", _frac(rep.partial))
    out.kv("tail", _frac(rep.tail_bound))
    return EXIT_OK


def cmd_padic_compare(args, out: Output) -> int:
    model = _pick_model(args.model)
    f = parse_poly(args.f, model.variables)
    base = _base_for(args.q, args.mixed)
    budget = _budget(args)
    rep = compare_motivic(model, f, base, args.cutoff, budget=budget)
    if rep.ok:
        out.human(f"motivic = padic = {_frac(rep.motivic)} (tail <= {_frac(rep.tail_bound)})")
    else:
        out.human(f"motivic = {_frac(rep.motivic)}")
        out.human(f"padic   = {_frac(rep.padic)}")
        out.human("MISMATCH")
    out.kv("motivic", _frac(rep.motivic))
    out.kv("padic", _frac(rep.padic))
    out.kv("tail", _frac(rep.tail_bound))
    out.kv("ok", str(rep.ok).lower())
    if args.plot:
        from .plotting import convergence_figure

        partials = {}
        for m in range(args.cutoff + 1):
            sub = compare_motivic(model, f, base, m, budget=budget)
            partials[m] = (sub.motivic, sub.padic)
        convergence_figure(partials, None, args.plot, args.q)
        out.both("figure", f"figure written to {args.plot}", args.plot)
    return EXIT_OK if rep.ok else EXIT_VERDICT


def cmd_witt_table(args, out: Output) -> int:
    p, length = args.p, args.len
    field = PrimeField(p)
    structure_polys(p, length)
    vectors = []

    def all_vectors(prefix):
        if len(prefix) == length:
            vectors.append(WittVector(p, tuple(prefix), field))
            return
        for c in range(p):
            all_vectors(prefix + [c])

    all_vectors([])
    vectors.sort(key=witt_to_residue)
    out.human(f"W_{length}(F_{p})  (residue identification with Z/{p ** length})")
    for w in vectors:
        out.human(f"  {w.comps} <-> {witt_to_residue(w)}")
        out.kv(f"residue_{w.comps}", witt_to_residue(w))
    for opname, op in (("+", witt_add), ("*", witt_mul)):
        out.human(f"table for {opname}:")
        for a in vectors:
            row = []
            for b in vectors:
                c = op(a, b)
                row.append(str(witt_to_residue(c)))
                out.kv(f"op{opname}_{witt_to_residue(a)}_{witt_to_residue(b)}", witt_to_residue(c))
            out.human("  " + " ".join(row))
    return EXIT_OK


def cmd_nash_nu(args, out: Output) -> int:
    h = _pick_morphism(args.morphism)
    locus = _locus_polys(args.locus, h.source.variables)
    nu = nu_of_component(ChartLocus(h, locus), _base_for(args.q, False), budget=_budget(args))
    out.both("nu", f"nu = {nu}", nu)
    return EXIT_OK


def cmd_nash_growth(args, out: Output) -> int:
    if len(args.morphism) != len(args.locus):
        raise JetMeasureError("--morphism and --locus must be paired")
    charts = []
    for mspec, ltext in zip(args.morphism, args.locus):
        h = _pick_morphism(mspec)
        charts.append(ChartLocus(h, _locus_polys(ltext, h.source.variables)))
    lo, _, hi = args.range.partition("..")
    levels = range(int(lo), int(hi) + 1)
    rep = growth_check(charts, _base_for(args.q, False), levels, contact=args.contact, budget=_budget(args))
    for n in sorted(rep.counts):
        out.human(f"count({n}) = {rep.counts[n]}   predicted dim = {rep.predicted[n]}")
        out.kv(f"count_{n}", rep.counts[n])
        out.kv(f"predicted_{n}", rep.predicted[n])
    out.human(f"nu = {rep.nu}")
    out.human(f"stabilization level: {rep.stabilization_level}")
    out.human(f"growth law holds: {str(rep.verdict).lower()}")
    out.kv("nu", rep.nu)
    out.kv("stabilization", rep.stabilization_level)
    out.kv("ok", str(rep.verdict).lower())
    if args.plot:
        from .plotting import growth_figure

        growth_figure(rep, args.plot)
        out.both("figure", f"figure written to {args.plot}", args.plot)
    return EXIT_OK if rep.verdict else EXIT_VERDICT


def cmd_models_check(args, out: Output) -> int:
    path, _, _ = args.model.partition(":")
    mf = load_model_file(path)
    fields = [_field_for(q) for q in args.q]
    ok = True
    for name, model in mf.models.items():
        good = model.verify_smooth_flag(fields)
        ok = ok and good
        out.both(f"model_{name}", f"model {name}: smooth flag ok: {str(good).lower()}", str(good).lower())
    for name, h in mf.morphisms.items():
        good = h.validate_on_points(fields)
        ok = ok and good
        out.both(f"morphism_{name}", f"morphism {name}: relations hold: {str(good).lower()}", str(good).lower())
    for name, cov in mf.covers.items():
        good = cov.verify_covering(fields)
        ok = ok and good
        out.both(f"cover_{name}", f"cover {name}: covers: {str(good).lower()}", str(good).lower())
    return EXIT_OK if ok else EXIT_VERDICT


# --- wiring -----------------------------------------------------------------


def _add_common(p, model=True):
    if model:
        p.add_argument("--model", required=True, help="model file path, optionally :name")
    p.add_argument("--budget", type=int, default=None, help="max candidate tuples examined")
    p.add_argument("--machine", action="store_true", help="key=value output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jetmeasure",
        description="exact jet counts, motivic measures and p-adic comparisons",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    jets = sub.add_parser("jets", help="jet-space enumeration").add_subparsers(
        dest="sub", required=True
    )
    p = jets.add_parser("count", help="count level-n jets")
    _add_common(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--mixed", action="store_true", help="use Z/p^(n+1) instead of series")
    p.set_defaults(func=cmd_jets_count)

    p = jets.add_parser("image", help="bounds on jets that lift to arcs")
    _add_common(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_jets_image)

    p = jets.add_parser("fibration", help="level n+m over level n fibre count")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_jets_fibration)

    measure = sub.add_parser("measure", help="motivic measures and integrals").add_subparsers(
        dest="sub", required=True
    )
    p = measure.add_parser("cylinder", help="measure of a level-n cylinder")
    _add_common(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, action="append", required=True)
    p.add_argument("--where", default="true", help="condition, e.g. 'ord x = 2'")
    p.add_argument("--class", dest="cls", default=None, help="supplied class of the base")
    p.add_argument("--stability", default="smooth-model",
                   choices=["smooth-model", "inside-gr-e", "declared"])
    p.add_argument("--gr-level", type=int, default=None)
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_measure_cylinder)

    p = measure.add_parser("integral", help="integral of L^(-ord f)")
    _add_common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--q", type=int, action="append", required=True)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--unit", action="store_true", help="f is a unit on the generic fibre")
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_measure_integral)

    p = sub.add_parser("neron", help="weak Neron integral formula")
    _add_common(p, model=False)
    p.add_argument("--components", required=True)
    p.add_argument("--q", type=int, action="append", default=[])
    p.set_defaults(func=cmd_neron)

    p = sub.add_parser("serre", help="special fibre class mod (L-1) and its residue")
    _add_common(p, model=False)
    p.add_argument("--components", required=True)
    p.add_argument("--q", type=int, action="append", required=True)
    p.set_defaults(func=cmd_serre)

    p = sub.add_parser("cy", help="order-normalized class of the special fibre")
    _add_common(p, model=False)
    p.add_argument("--components", required=True)
    p.set_defaults(func=cmd_cy)

    cov = sub.add_parser("cov", help="change of variables and cover identities").add_subparsers(
        dest="sub", required=True
    )
    p = cov.add_parser("verify", help="image measure vs Jacobian-weighted source")
    _add_common(p, model=False)
    p.add_argument("--morphism", required=True)
    p.add_argument("--B", required=True, help="condition on source jets")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(func=cmd_cov_verify)

    p = cov.add_parser("additivity", help="inclusion-exclusion over a cover")
    _add_common(p, model=False)
    p.add_argument("--cover", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_cov_additivity)

    padic = sub.add_parser("padic", help="p-adic volumes and comparisons").add_subparsers(
        dest="sub", required=True
    )
    p = padic.add_parser("volume", help="volume of a cylinder")
    _add_common(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--where", default="true")
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_padic_volume)

    p = padic.add_parser("integral", help="integral of q^(-ord f)")
    _add_common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_padic_integral)

    p = padic.add_parser("compare", help="motivic against p-adic, stratum by stratum")
    _add_common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--plot", default=None, help="write a convergence figure (png)")
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_padic_compare)

    witt = sub.add_parser("witt", help="Witt vector tables").add_subparsers(
        dest="sub", required=True
    )
    p = witt.add_parser("table", help="addition/multiplication tables and residues")
    _add_common(p, model=False)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--len", type=int, required=True)
    p.set_defaults(func=cmd_witt_table)

    nash = sub.add_parser("nash", help="dimension growth diagnostics").add_subparsers(
        dest="sub", required=True
    )
    p = nash.add_parser("nu", help="Jacobian multiplicity along a locus")
    _add_common(p, model=False)
    p.add_argument("--morphism", required=True)
    p.add_argument("--locus", required=True, help="e.g. 'u=0'")
    p.add_argument("--q", type=int, default=3)
    p.set_defaults(func=cmd_nash_nu)

    p = nash.add_parser("growth", help="image-jet counts against (n+1)d - nu")
    _add_common(p, model=False)
    p.add_argument("--morphism", action="append", required=True)
    p.add_argument("--locus", action="append", required=True)
    p.add_argument("--range", required=True, help="e.g. 1..4")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--contact", default="touch", choices=["touch", "transverse"])
    p.add_argument("--plot", default=None, help="write a growth figure (png)")
    p.set_defaults(func=cmd_nash_growth)

    p = sub.add_parser("models", help="file integrity checks").add_subparsers(
        dest="sub", required=True
    )
    pc = p.add_parser("check", help="verify smooth flags, morphisms and covers")
    _add_common(pc)
    pc.add_argument("--q", type=int, action="append", required=True)
    pc.set_defaults(func=cmd_models_check)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = Output(getattr(args, "machine", False))
    try:
        return args.func(args, out)
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except JetMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
