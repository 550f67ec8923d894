"""Dimension-growth diagnostics for images of jets along exceptional loci.

For a morphism with hand-authored charts and a divisor E on a smooth source,
the jets based on E map to a constructible set whose dimension grows linearly
in the level, with slope the relative dimension and offset controlled by the
Jacobian multiplicity nu(E) = 1 + (generic Jacobian order along E).  Counts
over F_q proxy dimensions: the verdict demands that counts(n) divided by
q^{(n+1)d - nu} is exactly constant from some sampled level on, and reports
that stabilization level rather than asserting the law below it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InconclusiveError, ModelDataError
from .jets import (
    Base,
    Budget,
    apply_morphism,
    default_budget,
    enumerate_jets,
    ord_jacobian,
)
from .measure import And, OrdEq, OrdGe, holds, required_level
from .models import ModelMorphism
from .poly import MultiPoly
from .rings import rational_pow

__all__ = [
    "ChartLocus",
    "nu_of_component",
    "GrowthReport",
    "growth_check",
]


@dataclass(frozen=True)
class ChartLocus:
    """One chart of a modification: a morphism and the equations of the
    exceptional locus E inside its source."""

    morphism: ModelMorphism
    locus: tuple  # MultiPoly equations of E in source variables

    def contact_condition(self, contact: str):
        """Jets meeting E: 'touch' wants base point on E, 'transverse'
        demands first-order contact with every locus equation."""
        if contact == "touch":
            return And(tuple(OrdGe(g, 1) for g in self.locus))
        if contact == "transverse":
            return And(tuple(OrdEq(g, 1) for g in self.locus))
        raise ModelDataError(f"unknown contact kind {contact!r}")


def nu_of_component(
    chart: ChartLocus,
    base: Base,
    level: int = 2,
    max_level: int = 8,
    budget: Optional[Budget] = None,
) -> int:
    """1 + the common Jacobian order at jets leaving E transversally.

    Samples every level-n jet with first-order contact along E and reads off
    the Jacobian order.  A token order (vanishing to the truncation level)
    next to an exact one already disagrees with it, so the locus is reported
    non-equimultiple; only when every sample is a token is the level raised.
    """
    budget = budget or default_budget()
    h = chart.morphism
    res_field = base.field

    def on_locus(pt):
        return all(res_field.is_zero(g.evaluate(res_field, pt)) for g in chart.locus)

    while level <= max_level:
        cond = chart.contact_condition("transverse")
        level = max(level, required_level(cond))
        values = set()
        tokens = 0
        seen = 0
        for j in enumerate_jets(h.source, level, base, budget, base_filter=on_locus):
            if not holds(cond, j):
                continue
            seen += 1
            v = ord_jacobian(h, j, depth=0, budget=budget)
            if v is None:
                tokens += 1
            else:
                values.add(v)
        if seen == 0:
            raise ModelDataError("the locus has no transverse jets at this level")
        if len(values) > 1 or (values and tokens):
            # a token means order > level >= any exact value seen
            raise InconclusiveError(
                f"Jacobian orders disagree along the locus at level {level} "
                f"(exact {sorted(values)}, {tokens} deeper); "
                "it is not equimultiple in this chart"
            )
        if values:
            return 1 + values.pop()
        level += 1
    raise InconclusiveError(
        f"Jacobian order still undetermined at level {max_level}"
    )


@dataclass(frozen=True)
class GrowthReport:
    """Counts of image jets against the predicted dimension law.

    ``verdict`` is true when counts(n) / q^{(n+1)d - nu} is exactly constant
    from ``stabilization_level`` through the end of the sampled range; the
    constant itself is reported, as is the empirical level where it sets in.
    """

    counts: dict
    nu: int
    rel_dim: int
    q: int
    predicted: dict
    ratios: dict
    fitted_slope: Optional[int]
    stabilization_level: Optional[int]
    verdict: bool


def growth_check(
    charts,
    base: Base,
    n_range,
    contact: str = "touch",
    budget: Optional[Budget] = None,
) -> GrowthReport:
    """Count image jets of the exceptional locus across a level range.

    ``charts`` lists the chart/locus pairs covering the modification; images
    are merged across charts before counting, so a divisor seen from two
    charts is not double counted.  All charts must share the target.
    """
    charts = [c if isinstance(c, ChartLocus) else ChartLocus(*c) for c in charts]
    if not charts:
        raise ModelDataError("growth check needs at least one chart")
    target = charts[0].morphism.target
    for c in charts:
        if c.morphism.target.name != target.name:
            raise ModelDataError("charts must share their target model")
        if not c.morphism.source.smooth:
            raise ModelDataError("growth diagnostics need smooth chart sources")
    budget = budget or default_budget()
    q = base.q
    d = target.rel_dim
    res_field = base.field
    nu = nu_of_component(charts[0], base, budget=budget)
    levels = list(n_range)
    counts: dict = {}
    for n in levels:
        images = set()
        for chart in charts:
            cond = chart.contact_condition(contact)
            if required_level(cond) > n:
                raise ModelDataError(f"contact condition undecidable at level {n}")

            def on_locus(pt, _chart=chart):
                return all(
                    res_field.is_zero(g.evaluate(res_field, pt)) for g in _chart.locus
                )

            for j in enumerate_jets(chart.morphism.source, n, base, budget, base_filter=on_locus):
                if holds(cond, j):
                    images.add(apply_morphism(chart.morphism, j).coords)
        counts[n] = len(images)
    predicted = {n: (n + 1) * d - nu for n in levels}
    ratios = {
        n: Fraction(counts[n]) * rational_pow(q, -predicted[n]) for n in levels
    }
    stabilization = None
    for n in levels:
        tail = [ratios[m] for m in levels if m >= n]
        if len(tail) >= 2 and all(r == tail[0] for r in tail):
            stabilization = n
            break
    verdict = stabilization is not None
    fitted = None
    if len(levels) >= 2 and counts[levels[-2]] > 0:
        ratio = Fraction(counts[levels[-1]], counts[levels[-2]])
        k = 0
        while ratio % q == 0:
            ratio /= q
            k += 1
        fitted = k if ratio == 1 else None
    return GrowthReport(
        counts, nu, d, q, predicted, ratios, fitted, stabilization, verdict
    )
