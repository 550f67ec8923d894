"""Cylinders, the motivic measure, integrals of order functions, and the
weak-Neron integral formulas with their invariants.

The measure of a stable level-n cylinder is the class of its level-n base
times L^{-(n+1)d}.  Two backends are kept deliberately separate: a symbolic
backend that manipulates classes, and a counting backend that produces exact
rationals over a chosen finite residue field.  Wherever both apply they must
agree under point-count specialization, and the checks in this module treat
that agreement as part of the contract, not as a rounding question.

Stability is justified, never assumed: every cylinder carries a tag saying
why its measure formula applies (smooth ambient model, containment in the
locus separated from the singular jets, or an explicit declaration that the
caller takes responsibility for).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import (
    ContractViolationError,
    InconclusiveError,
    ModelDataError,
    PolyParseError,
    UnstableCylinderError,
)
from .grothendieck import (
    VarietyAtom,
    VirtualClass,
    mod_L_minus_1,
    parse_class,
    residue_mod_q_minus_1,
    specialize_count,
    sum_to_tolerance,
    virtual_dim,
    zero_class,
)
from .jets import (
    Base,
    Budget,
    JetPoint,
    apply_morphism,
    default_budget,
    enumerate_jets,
    eval_on_jet,
    ord_function,
    ord_jacobian,
)
from .models import AffineModel, CoverPresentation, ModelMorphism, product_model, lift_poly, split_blocks
from .poly import MultiPoly, parse_poly
from .rings import rational_pow

__all__ = [
    "Vanishes",
    "NotVanishes",
    "OrdEq",
    "OrdGe",
    "And",
    "Or",
    "Not",
    "TRUE",
    "parse_condition",
    "Stability",
    "CylinderSpec",
    "Count",
    "Symbolic",
    "cylinder_measure",
    "SymbolicStrata",
    "RationalIntegral",
    "residual_order_count",
    "integral_of_order",
    "WeakNeronPresentation",
    "load_presentation",
    "neron_integral",
    "serre_invariant",
    "calabi_yau_class",
    "AdditivityReport",
    "additivity_check",
    "ProductReport",
    "product_check",
    "CovReport",
    "change_of_variables_check",
]


# --- constructible conditions at a finite level ----------------------------


@dataclass(frozen=True)
class Vanishes:
    poly: MultiPoly


@dataclass(frozen=True)
class NotVanishes:
    poly: MultiPoly


@dataclass(frozen=True)
class OrdEq:
    poly: MultiPoly
    k: int


@dataclass(frozen=True)
class OrdGe:
    poly: MultiPoly
    k: int


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Not:
    part: object


TRUE = And(())


def holds(cond, jet: JetPoint) -> bool:
    """Evaluate a condition on one jet."""
    if isinstance(cond, Vanishes):
        return jet.ring.is_zero(eval_on_jet(cond.poly, jet))
    if isinstance(cond, NotVanishes):
        return not jet.ring.is_zero(eval_on_jet(cond.poly, jet))
    if isinstance(cond, OrdEq):
        return ord_function(cond.poly, jet) == cond.k
    if isinstance(cond, OrdGe):
        v = ord_function(cond.poly, jet)
        return v is None or v >= cond.k
    if isinstance(cond, And):
        return all(holds(p, jet) for p in cond.parts)
    if isinstance(cond, Or):
        return any(holds(p, jet) for p in cond.parts)
    if isinstance(cond, Not):
        return not holds(cond.part, jet)
    raise ModelDataError(f"unknown condition node {cond!r}")


def required_level(cond) -> int:
    """Smallest jet level at which the condition is decidable by evaluation."""
    if isinstance(cond, (Vanishes, NotVanishes)):
        return 0
    if isinstance(cond, OrdEq):
        return cond.k
    if isinstance(cond, OrdGe):
        return max(cond.k - 1, 0)
    if isinstance(cond, (And, Or)):
        return max((required_level(p) for p in cond.parts), default=0)
    if isinstance(cond, Not):
        return required_level(cond.part)
    raise ModelDataError(f"unknown condition node {cond!r}")


def parse_condition(text: str, variables) -> object:
    """Parse 'ord u = 1 and x != 0' style conjunctions.

    Atoms: ``ord EXPR = k``, ``ord EXPR >= k``, ``EXPR = 0``, ``EXPR != 0``,
    ``true``.  The expression after ``ord`` may be parenthesized.
    """
    parts = []
    for chunk in text.split(" and "):
        chunk = chunk.strip()
        if not chunk or chunk == "true":
            continue
        parts.append(_parse_atom_condition(chunk, variables))
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def _parse_atom_condition(chunk: str, variables):
    if chunk.startswith("ord"):
        body = chunk[3:].strip()
        if ">=" in body:
            expr, _, k = body.partition(">=")
            ctor, k = OrdGe, int(k)
        elif "=" in body:
            expr, _, k = body.partition("=")
            ctor, k = OrdEq, int(k)
        else:
            raise PolyParseError(f"order condition needs '=' or '>=': {chunk!r}", 0)
        expr = expr.strip()
        if expr.startswith("(") and expr.endswith(")"):
            expr = expr[1:-1]
        return ctor(parse_poly(expr, variables), k)
    if "!=" in chunk:
        expr, _, rhs = chunk.partition("!=")
        if rhs.strip() != "0":
            raise PolyParseError(f"only comparisons with 0 are supported: {chunk!r}", 0)
        return NotVanishes(parse_poly(expr.strip(), variables))
    if "=" in chunk:
        expr, _, rhs = chunk.partition("=")
        if rhs.strip() != "0":
            raise PolyParseError(f"only comparisons with 0 are supported: {chunk!r}", 0)
        return Vanishes(parse_poly(expr.strip(), variables))
    raise PolyParseError(f"cannot parse condition atom {chunk!r}", 0)


# --- cylinders and their measures ------------------------------------------


@dataclass(frozen=True)
class Stability:
    """Why the measure formula applies to this cylinder.

    ``smooth-model``: every cylinder over a smooth model is stable.
    ``inside-gr-e``: the cylinder avoids the level-e jets of the singular
    locus (parameter ``e``).
    ``declared``: the caller vouches; recorded, not verified.
    """

    tag: str
    e: Optional[int] = None

    def __post_init__(self):
        if self.tag not in ("smooth-model", "inside-gr-e", "declared"):
            raise ModelDataError(f"unknown stability tag {self.tag!r}")
        if self.tag == "inside-gr-e" and (self.e is None or self.e < 0):
            raise ModelDataError("inside-gr-e stability needs a level e >= 0")


@dataclass(frozen=True)
class CylinderSpec:
    """A level-n constructible condition defining a cylinder."""

    model: AffineModel
    level: int
    condition: object = TRUE
    stability: Optional[Stability] = None

    def __post_init__(self):
        if required_level(self.condition) > self.level:
            raise ModelDataError(
                f"condition needs level >= {required_level(self.condition)}, "
                f"cylinder has level {self.level}"
            )
        if self.stability is not None and self.stability.tag == "smooth-model":
            if not self.model.smooth:
                raise ModelDataError(
                    "smooth-model stability tag on a model not flagged smooth"
                )

    def require_stable(self):
        if self.stability is None:
            raise UnstableCylinderError(
                f"cylinder on {self.model.name} carries no stability justification"
            )


@dataclass(frozen=True)
class Count:
    """Counting backend over one finite residue ring."""

    base: Base
    budget: Optional[Budget] = None


@dataclass(frozen=True)
class Symbolic:
    """Symbolic backend: the class of the level-n base is supplied."""

    image_class: VirtualClass


def _satisfying_count(spec: CylinderSpec, base: Base, budget) -> int:
    total = 0
    for j in enumerate_jets(spec.model, spec.level, base, budget):
        if holds(spec.condition, j):
            total += 1
    return total


def cylinder_measure(spec: CylinderSpec, backend):
    """Measure of a stable cylinder: [base] . L^{-(n+1)d}, or its count value.

    Counting backend: |satisfying level-n jets| . q^{-(n+1)d} as an exact
    rational.  Symbolic backend: supplied class times L^{-(n+1)d}.  The two
    agree under point-count specialization; tests enforce that coherence.
    """
    spec.require_stable()
    d = spec.model.rel_dim
    shift = -(spec.level + 1) * d
    if isinstance(backend, Symbolic):
        return backend.image_class.times_L(shift)
    if isinstance(backend, Count):
        budget = backend.budget or default_budget()
        count = _satisfying_count(spec, backend.base, budget)
        return count * rational_pow(backend.base.q, shift)
    raise ModelDataError(f"unknown backend {backend!r}")


# --- integrals of order functions -------------------------------------------


def _stratum_count(model, f, v: int, base, budget, base_filter=None) -> int:
    total = 0
    for j in enumerate_jets(model, v, base, budget, base_filter):
        if ord_function(f, j) == v:
            total += 1
    return total


def residual_order_count(model, f, level: int, base, budget, base_filter=None) -> int:
    """Jets at the given level along which f vanishes to truncation order."""
    total = 0
    for j in enumerate_jets(model, level, base, budget, base_filter):
        if ord_function(f, j) is None:
            total += 1
    return total


@dataclass(frozen=True)
class RationalIntegral:
    """Counting-backend value of an integral of q^{-ord f}.

    ``exact`` marks certified finiteness (the residual stratum emptied);
    otherwise ``value`` is the partial sum to the cutoff and ``tail_bound``
    dominates everything beyond it.
    """

    value: Fraction
    exact: bool
    tail_bound: Optional[Fraction]
    strata: dict


@dataclass(frozen=True)
class SymbolicStrata:
    """Supplied classes of the order strata, with counting verification.

    ``classes[v]`` is the class of the level-v base of {ord f = v}.  Each
    verification base checks two things: the supplied class counts correctly
    stratum by stratum, and beyond the top stratum nothing survives (the
    residual stratum is empty), which certifies the finite-value claim.
    """

    classes: dict
    verify: tuple = ()


def integral_of_order(
    model: AffineModel,
    f: MultiPoly,
    backend,
    cutoff: Optional[int] = None,
    unit: bool = False,
    budget: Optional[Budget] = None,
    base_filter=None,
):
    """The integral of L^{-ord f} over the jets of a smooth model.

    With ``unit=True`` the caller asserts f vanishes nowhere on the generic
    fibre, so only finitely many orders occur; the claim is certified by an
    emptied residual stratum before the integral is reported exact, and
    refused otherwise.  Without the flag a cutoff is required and the result
    carries an explicit tail bound (counting) or tail level (symbolic).
    """
    if not model.smooth:
        raise ModelDataError(f"integral requires a smooth model, not {model.name}")
    d = model.rel_dim
    if isinstance(backend, Count):
        bud = backend.budget or budget or default_budget()
        base = backend.base
        q = base.q
        if unit:
            limit = cutoff if cutoff is not None else 4 * (d + 1)
            strata = {}
            for v in range(limit + 1):
                c = _stratum_count(model, f, v, base, bud, base_filter)
                if c:
                    strata[v] = c
                if residual_order_count(model, f, v, base, bud, base_filter) == 0:
                    value = sum(
                        (cnt * rational_pow(q, -v - (v + 1) * d) for v, cnt in strata.items()),
                        Fraction(0),
                    )
                    return RationalIntegral(value, True, None, strata)
            raise ContractViolationError(
                f"order strata of {f} did not terminate by level {limit}; "
                "the unit assertion cannot be certified"
            )
        if cutoff is None:
            raise ModelDataError("a cutoff is required without the unit flag")
        strata = {}
        for v in range(cutoff + 1):
            strata[v] = _stratum_count(model, f, v, base, bud, base_filter)
        residual = residual_order_count(model, f, cutoff, base, bud, base_filter)
        value = sum(
            (cnt * rational_pow(q, -v - (v + 1) * d) for v, cnt in strata.items()),
            Fraction(0),
        )
        tail = residual * rational_pow(q, -(cutoff + 1) * d) * rational_pow(q, -(cutoff + 1))
        return RationalIntegral(value, False, tail, strata)
    if isinstance(backend, SymbolicStrata):
        for v, cls in backend.classes.items():
            dim = virtual_dim(cls)
            if dim is not None and dim > (v + 1) * d:
                raise ContractViolationError(
                    f"stratum {v} class has virtual dimension {dim} > {(v + 1) * d}"
                )
        top = max(backend.classes, default=-1)
        for vb in backend.verify:
            bud = budget or default_budget()
            for v, cls in backend.classes.items():
                expected = _stratum_count(model, f, v, vb, bud, base_filter)
                got = specialize_count(cls, vb.q)
                if got != expected:
                    raise ContractViolationError(
                        f"stratum {v} class counts {got} at q={vb.q}, enumeration says {expected}"
                    )
            if unit and residual_order_count(model, f, top, vb, bud, base_filter) != 0:
                raise ContractViolationError(
                    f"jets beyond the top declared stratum survive at q={vb.q}; "
                    "finiteness cannot be certified"
                )
        terms = [
            cls.times_L(-v - (v + 1) * d) for v, cls in sorted(backend.classes.items())
        ]
        if unit:
            total = zero_class()
            for t in terms:
                total = total + t
            return total
        if cutoff is None:
            raise ModelDataError("a cutoff is required without the unit flag")
        kept = [
            cls.times_L(-v - (v + 1) * d)
            for v, cls in sorted(backend.classes.items())
            if v <= cutoff
        ]
        return sum_to_tolerance(kept, cutoff + 1)
    raise ModelDataError(f"unknown backend {backend!r}")


# --- weak Neron presentations and invariants ---------------------------------


@dataclass(frozen=True)
class WeakNeronPresentation:
    """Component data of a weak Neron model: (class, form order) pairs.

    The weak-Neron property of the underlying model is declared trust; the
    artifact cannot check it and every consumer of this type inherits that
    assumption.
    """

    components: tuple
    rel_dim: int
    name: str = ""
    atoms: dict = field(default_factory=dict)

    def __post_init__(self):
        for cls, ordv in self.components:
            dim = virtual_dim(cls)
            if dim is not None and dim > self.rel_dim:
                raise ModelDataError(
                    f"component class of virtual dimension {dim} exceeds fibre dimension {self.rel_dim}"
                )
            if not isinstance(ordv, int):
                raise ModelDataError("component orders must be integers")


def neron_integral(pres: WeakNeronPresentation) -> VirtualClass:
    """L^{-d} . sum over components of [U_i] . L^{-ord_i}."""
    total = zero_class()
    for cls, ordv in pres.components:
        total = total + cls.times_L(-pres.rel_dim - ordv)
    return total


def serre_invariant(pres: WeakNeronPresentation, qs=()):
    """Class of the special fibre modulo (L - 1), with point-count residues.

    Returns the normal form of sum [U_i] in the quotient and, per requested
    prime power, its point count reduced modulo q - 1 (the classical
    invariant of the underlying compact analytic variety).
    """
    total = zero_class()
    for cls, _ in pres.components:
        total = total + cls
    lam = mod_L_minus_1(total)
    residues = {}
    for q in qs:
        residues[q] = residue_mod_q_minus_1(specialize_count(lam, q), q)
    return lam, residues


def calabi_yau_class(pres: WeakNeronPresentation) -> VirtualClass:
    """sum [U_i] . L^{alpha - ord_i} with alpha the least component order.

    Subtracting alpha makes the class invariant under the uniformizer
    rescalings of the gauge form, which shift every order by the same
    constant.
    """
    if not pres.components:
        raise ModelDataError("empty weak Neron presentation has no class")
    alpha = min(ordv for _, ordv in pres.components)
    total = zero_class()
    for cls, ordv in pres.components:
        total = total + cls.times_L(alpha - ordv)
    return total


def load_presentation(path: str, name: Optional[str] = None) -> WeakNeronPresentation:
    """Read a weak Neron presentation block from a file.

    Block format::

        neron ball
          dim 1
          atom E dim 1 count q^2 + 1
          component 0 L
        end

    A component line is the form order followed by the class expression.
    Atom count rules are polynomials in q, evaluated exactly.
    """
    text = None
    for candidate in (path, path + ".wnm"):
        try:
            with open(candidate, "r", encoding="utf-8") as fh:
                text = fh.read()
            break
        except FileNotFoundError:
            continue
    if text is None:
        raise ModelDataError(f"no presentation file at '{path}'")
    found = []
    for kind, block_name, body in split_blocks(text):
        if kind != "neron":
            continue
        if name is None or block_name == name:
            found.append((block_name, body))
    if not found:
        raise ModelDataError(f"no matching neron block in '{path}'")
    if len(found) > 1:
        raise ModelDataError(f"several neron blocks in '{path}'; name one")
    block_name, body = found[0]
    dim = None
    atoms: dict = {}
    components: list = []
    for lineno, line in body:
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "dim":
            dim = int(rest)
        elif key == "atom":
            atoms.update(_parse_atom_line(rest, lineno))
        elif key == "component":
            ord_txt, _, cls_txt = rest.partition(" ")
            components.append((parse_class(cls_txt.strip(), atoms), int(ord_txt)))
        else:
            raise ModelDataError(f"line {lineno}: unknown neron field '{key}'")
    if dim is None:
        raise ModelDataError(f"neron block {block_name}: missing dim")
    return WeakNeronPresentation(tuple(components), dim, block_name, atoms)


def _parse_atom_line(rest: str, lineno: int) -> dict:
    tokens = rest.split()
    if not tokens:
        raise ModelDataError(f"line {lineno}: atom needs a name")
    name = tokens[0]
    fields = {}
    key = None
    buf: list = []
    for tok in tokens[1:]:
        if tok in ("dim", "count", "euler"):
            if key:
                fields[key] = " ".join(buf)
            key, buf = tok, []
        else:
            buf.append(tok)
    if key:
        fields[key] = " ".join(buf)
    if "dim" not in fields:
        raise ModelDataError(f"line {lineno}: atom {name} needs a dimension")
    counter = None
    if "count" in fields:
        count_poly = parse_poly(fields["count"], ("q",))

        def counter(q, _poly=count_poly):
            from .rings import ZZ as _zz

            return _poly.evaluate(_zz, (q,))

    euler = int(fields["euler"]) if "euler" in fields else None
    return {name: VarietyAtom(name, int(fields["dim"]), counter, euler)}


# --- identity checks ---------------------------------------------------------


@dataclass(frozen=True)
class AdditivityReport:
    lhs: Fraction
    rhs: Fraction
    by_subset: dict
    ok: bool


def additivity_check(
    cover: CoverPresentation,
    f: MultiPoly,
    base: Base,
    budget: Optional[Budget] = None,
    unit: bool = True,
    cutoff: Optional[int] = None,
) -> AdditivityReport:
    """Inclusion-exclusion of integrals over a finite open cover.

    The integral over the total model must equal the alternating sum over
    nonempty piece subsets, each piece cut out by its gates not vanishing at
    the base point.  Exact rational equality is required.
    """
    budget = budget or default_budget()
    res_field = base.field
    if not cover.verify_covering([res_field]):
        raise ModelDataError(f"cover {cover.name} does not cover its model over q={base.q}")
    model = cover.total

    def piece_filter(gates):
        if not gates:
            return None

        def flt(pt):
            return all(not res_field.is_zero(g.evaluate(res_field, pt)) for g in gates)

        return flt

    lhs = integral_of_order(
        model, f, Count(base, budget), cutoff=cutoff, unit=unit
    ).value
    names = cover.piece_names()
    rhs = Fraction(0)
    by_subset = {}
    for r in range(1, len(names) + 1):
        for subset in itertools.combinations(names, r):
            gates = cover.gates_for(set(subset))
            val = integral_of_order(
                model,
                f,
                Count(base, budget),
                cutoff=cutoff,
                unit=unit,
                base_filter=piece_filter(gates),
            ).value
            sign = 1 if r % 2 == 1 else -1
            rhs += sign * val
            by_subset[subset] = val
    return AdditivityReport(lhs, rhs, by_subset, lhs == rhs)


@dataclass(frozen=True)
class ProductReport:
    lhs: Fraction
    rhs: Fraction
    factors: tuple
    ok: bool


def product_check(
    x: AffineModel,
    xp: AffineModel,
    f: MultiPoly,
    fp: MultiPoly,
    base: Base,
    budget: Optional[Budget] = None,
    unit: bool = True,
    cutoff: Optional[int] = None,
) -> ProductReport:
    """Integral over a product model against the product of integrals."""
    budget = budget or default_budget()
    prod = product_model(x, xp)
    integrand = lift_poly(f, prod.variables) * lift_poly(fp, prod.variables)
    lhs = integral_of_order(prod, integrand, Count(base, budget), cutoff=cutoff, unit=unit).value
    vx = integral_of_order(x, f, Count(base, budget), cutoff=cutoff, unit=unit).value
    vy = integral_of_order(xp, fp, Count(base, budget), cutoff=cutoff, unit=unit).value
    return ProductReport(lhs, vx * vy, (vx, vy), lhs == vx * vy)


@dataclass(frozen=True)
class CovReport:
    """Both sides of the change-of-variables identity, with fibre diagnostics."""

    lhs: Fraction
    rhs: Fraction
    ok: bool
    fibre_ok: bool
    shift_ok: bool
    image_jets: int
    source_jets: int
    orders: dict


def change_of_variables_check(
    h: ModelMorphism,
    condition,
    level: int,
    base: Base,
    budget: Optional[Budget] = None,
    depth: int = 2,
) -> CovReport:
    """Compare the measure of an image cylinder with the weighted source side.

    The left side counts distinct images of the source jets satisfying the
    condition; the right side weights each source jet by q^{-ord Jac}.  Also
    verified fibre by fibre: images have exactly q^e preimages at the working
    level, and preimages of one image agree once truncated e levels down (the
    injectivity shift).  Jets whose Jacobian order stays undetermined at the
    searched depth make the test inconclusive rather than silently wrong.
    """
    budget = budget or default_budget()
    if not h.source.smooth:
        raise ModelDataError("change of variables needs a smooth source model")
    d = h.target.rel_dim
    if h.source.rel_dim != d:
        raise ModelDataError("source and target relative dimensions differ")
    if required_level(condition) > level:
        raise ModelDataError("condition is not decidable at the working level")
    q = base.q
    images: dict = {}
    n_source = 0
    orders: dict = {}
    rhs = Fraction(0)
    scale = rational_pow(q, -(level + 1) * d)
    for j in enumerate_jets(h.source, level, base, budget):
        if not holds(condition, j):
            continue
        n_source += 1
        e = ord_jacobian(h, j, depth=depth, budget=budget)
        if e is None:
            raise InconclusiveError(
                f"Jacobian order undetermined at depth {depth} for jet {j.pretty()}"
            )
        orders[e] = orders.get(e, 0) + 1
        rhs += rational_pow(q, -e) * scale
        image = apply_morphism(h, j)
        images.setdefault(image.coords, []).append((j, e))
    lhs = len(images) * scale
    fibre_ok = True
    shift_ok = True
    for coords, fibre in images.items():
        es = {e for _, e in fibre}
        if len(es) != 1:
            fibre_ok = False
            continue
        e = es.pop()
        if len(fibre) != q ** e:
            fibre_ok = False
        m = level - e
        shadows = {tuple(c[: m + 1] for c in j.coords) if isinstance(j.coords[0], tuple)
                   else tuple(c % (base.p ** (m + 1)) for c in j.coords)
                   for j, _ in fibre}
        if len(shadows) != 1:
            shift_ok = False
    return CovReport(
        lhs, rhs, lhs == rhs, fibre_ok, shift_ok, len(images), n_source, orders
    )
