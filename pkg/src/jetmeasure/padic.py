"""Exact p-adic volumes and integrals, and the comparison with the motivic side.

Over a smooth model the p-adic volume of a level-n cylinder is the number of
satisfying level-n jets times q^{-d(n+1)}: the integral points fibre over the
jets in balls of exactly that volume.  Integrals of q^{-ord f} are summed
stratum by stratum with an explicit tail bound.  The comparison with the
motivic side runs the same strata through two independent assemblies, one
with rationals here and one with classes in the measure module, and demands
exact agreement; no tolerance enters anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ModelDataError
from .grothendieck import VirtualClass, specialize_count, zero_class
from .jets import Base, Budget, default_budget, enumerate_jets, ord_function
from .measure import Count, CylinderSpec, holds, integral_of_order, residual_order_count
from .models import AffineModel
from .poly import MultiPoly
from .rings import rational_pow

__all__ = [
    "PadicVolume",
    "cylinder_volume",
    "PadicIntegral",
    "padic_integral",
    "ComparisonReport",
    "compare_motivic",
]


@dataclass(frozen=True)
class PadicVolume:
    """An exact volume with the level it was computed at."""

    value: Fraction
    level: int

    def __post_init__(self):
        if self.value < 0:
            raise ModelDataError("volumes are non-negative")


def cylinder_volume(spec: CylinderSpec, base: Base, budget: Optional[Budget] = None) -> PadicVolume:
    """|satisfying level-n jets| . q^{-d(n+1)} for a smooth model."""
    if not spec.model.smooth:
        raise ModelDataError(
            f"p-adic volumes need a smooth model, not {spec.model.name}"
        )
    budget = budget or default_budget()
    count = 0
    for j in enumerate_jets(spec.model, spec.level, base, budget):
        if holds(spec.condition, j):
            count += 1
    d = spec.model.rel_dim
    return PadicVolume(count * rational_pow(base.q, -d * (spec.level + 1)), spec.level)


@dataclass(frozen=True)
class PadicIntegral:
    """Partial sum of q^{-n} vol(ord f = n) with a certified tail bound.

    Every point beyond the cutoff contributes at most q^{-(M+1)} times its
    volume, so the tail is at most vol(ord >= M+1) . q^{-(M+1)}.
    """

    partial: Fraction
    tail_bound: Fraction
    strata: dict
    cutoff: int


def padic_integral(
    model: AffineModel,
    f: MultiPoly,
    base: Base,
    cutoff: int,
    budget: Optional[Budget] = None,
) -> PadicIntegral:
    if not model.smooth:
        raise ModelDataError(f"p-adic integrals need a smooth model, not {model.name}")
    budget = budget or default_budget()
    q = base.q
    d = model.rel_dim
    strata: dict = {}
    partial = Fraction(0)
    for v in range(cutoff + 1):
        count = 0
        for j in enumerate_jets(model, v, base, budget):
            if ord_function(f, j) == v:
                count += 1
        vol = count * rational_pow(q, -d * (v + 1))
        strata[v] = vol
        partial += vol * rational_pow(q, -v)
    residual = 0
    for j in enumerate_jets(model, cutoff, base, budget):
        if ord_function(f, j) is None:
            residual += 1
    tail = residual * rational_pow(q, -d * (cutoff + 1)) * rational_pow(q, -(cutoff + 1))
    return PadicIntegral(partial, tail, strata, cutoff)


@dataclass(frozen=True)
class ComparisonReport:
    """Stratum-by-stratum agreement of the two integration pipelines."""

    motivic: Fraction
    padic: Fraction
    strata: dict  # n -> (motivic value, p-adic volume-weighted value)
    tails_match: bool
    ok: bool
    tail_bound: Fraction = Fraction(0)
    motivic_class: Optional[VirtualClass] = None


def compare_motivic(
    model: AffineModel,
    f: MultiPoly,
    base: Base,
    cutoff: int,
    strata_classes: Optional[dict] = None,
    budget: Optional[Budget] = None,
) -> ComparisonReport:
    """Point counting of the motivic integral against the p-adic integral.

    Both sides see the same strata; their values are assembled by independent
    code paths (class arithmetic specialized at q, versus direct rational
    accumulation).  When stratum classes are supplied, each one is also
    checked against the enumerated stratum count before use, and the partial
    motivic class is reported.
    """
    budget = budget or default_budget()
    q = base.q
    d = model.rel_dim
    pint = padic_integral(model, f, base, cutoff, budget)
    motivic_class = None
    strata: dict = {}
    if strata_classes is not None:
        partial_class = zero_class()
        for v in sorted(strata_classes):
            if v > cutoff:
                continue
            cls = strata_classes[v]
            term = cls.times_L(-v - (v + 1) * d)
            partial_class = partial_class + term
            strata[v] = (
                specialize_count(term, q),
                pint.strata.get(v, Fraction(0)) * rational_pow(q, -v),
            )
        motivic_class = partial_class
        motivic = specialize_count(partial_class, q)
    else:
        rint = integral_of_order(model, f, Count(base, budget), cutoff=cutoff, unit=False)
        motivic = rint.value
        for v, cnt in rint.strata.items():
            strata[v] = (
                cnt * rational_pow(q, -v - (v + 1) * d),
                pint.strata.get(v, Fraction(0)) * rational_pow(q, -v),
            )
    per_stratum_ok = all(a == b for a, b in strata.values())
    # both tails bound the same residual set; recount it through the measure
    # module's path and compare with the p-adic bound
    residual = residual_order_count(model, f, cutoff, base, budget)
    motivic_tail = residual * rational_pow(q, -d * (cutoff + 1) - (cutoff + 1))
    tails_match = motivic_tail == pint.tail_bound
    ok = motivic == pint.partial and per_stratum_ok and tails_match
    return ComparisonReport(
        motivic, pint.partial, strata, tails_match, ok, pint.tail_bound, motivic_class
    )
